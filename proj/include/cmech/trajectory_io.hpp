#pragma once

// Trajectory serialization: CSV with a fixed column order, or a JSON array of
// per-sample objects with the same keys. Floats carry 17 significant digits.

#include <array>
#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>

#include "json.hpp"

#include "cmech/flow.hpp"

namespace cmech::io {

inline constexpr std::array<std::string_view, 19> kTrajectoryColumns = {
    "t",   "R11", "R12", "R13", "R21", "R22", "R23", "R31", "R32",       "R33",
    "M1",  "M2",  "M3",  "H0",  "M2norm", "s1", "s2",  "s3",  "orthodefect"};

[[nodiscard]] inline std::string format_double(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

[[nodiscard]] inline std::array<double, 19> sample_row(const flow::Trajectory& traj, std::size_t i) {
    const auto& s = traj.states[i];
    const auto& d = traj.diagnostics[i];
    return {traj.times[i], s.R(0, 0), s.R(0, 1), s.R(0, 2), s.R(1, 0), s.R(1, 1), s.R(1, 2), s.R(2, 0),
            s.R(2, 1),     s.R(2, 2), s.M[0],    s.M[1],    s.M[2],    d.energy,  d.momentum_norm_squared,
            d.spatial_momentum[0], d.spatial_momentum[1], d.spatial_momentum[2], d.orthogonality_defect};
}

inline void write_csv(std::ostream& out, const flow::Trajectory& traj) {
    for (std::size_t c = 0; c < kTrajectoryColumns.size(); ++c) {
        out << (c ? "," : "") << kTrajectoryColumns[c];
    }
    out << '\n';
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto row = sample_row(traj, i);
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << (c ? "," : "") << format_double(row[c]);
        }
        out << '\n';
    }
}

[[nodiscard]] inline nlohmann::ordered_json to_json(const flow::Trajectory& traj) {
    auto samples = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto row = sample_row(traj, i);
        nlohmann::ordered_json sample;
        for (std::size_t c = 0; c < row.size(); ++c) {
            sample[std::string(kTrajectoryColumns[c])] = row[c];
        }
        samples.push_back(std::move(sample));
    }
    return samples;
}

inline void write_json(std::ostream& out, const flow::Trajectory& traj) {
    // nlohmann emits the shortest round-trip form of each double.
    out << to_json(traj).dump(1) << '\n';
}

}  // namespace cmech::io
