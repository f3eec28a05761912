#pragma once

// Command-line front end: `simulate` and `verify <suite>`.
//
// Option precedence: command-line flag, then RB_<FLAG> environment variable,
// then the JSON document given by --config, then built-in defaults.
// Exit codes: 0 success, 1 configuration error, 2 integration failure,
// 3 verification failure.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cmech/flow.hpp"
#include "cmech/trajectory_io.hpp"
#include "cmech/verify.hpp"

namespace cmech::cli {

enum ExitCode : int { kSuccess = 0, kConfigError = 1, kIntegrationFailure = 2, kVerificationFailure = 3 };

enum class Method { Lie, Rk4 };
enum class Format { Csv, Json };

struct RunConfig {
    rigid::Vec3 inertia{2.0, 3.0, 4.0};
    rigid::Vec3 m0{1.0, 1.0, 1.0};
    rigid::Mat3 r0 = rigid::Mat3::Identity();
    double t_final = 10.0;
    double step = 0.1;
    Method method = Method::Lie;
    int order = flow::kDefaultOrder;
    std::string surface = "sphere";
    int samples = 20;
    std::uint64_t seed = 42;
    std::map<std::string, double> tolerances;
    std::string out;
    Format format = Format::Csv;

    /// Throws MechanicsError naming the violated invariant.
    void validate() const {
        detail::require(t_final > 0.0, "t_final must be positive");
        detail::require(step > 0.0, "step must be positive");
        detail::require(order >= 4, "order must be at least 4");
        detail::require(samples > 0, "samples must be positive");
        (void)rigid::InertiaTensor(inertia);
        (void)rigid::RotationMatrix(r0);
    }

    [[nodiscard]] verify::Options verify_options() const {
        verify::Options opt;
        opt.surface = surface;
        opt.samples = samples;
        opt.seed = seed;
        opt.inertia = inertia;
        opt.m0 = m0;
        opt.r0 = r0;
        opt.t_final = t_final;
        opt.step = step;
        opt.order = order;
        opt.tolerances = tolerances;
        return opt;
    }
};

namespace detail {

[[nodiscard]] inline std::vector<double> parse_list(const std::string& text, std::size_t expected,
                                                    const std::string& what) {
    std::vector<double> values;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            cmech::detail::require(item.find_first_not_of(" \t", used) == std::string::npos,
                                   what + ": trailing characters in '" + item + "'");
        } catch (const std::logic_error&) {
            throw ContractViolation(what + ": cannot parse '" + item + "' as a number");
        }
    }
    cmech::detail::require(values.size() == expected, what + " expects " + std::to_string(expected) +
                                                          " comma-separated values, got " +
                                                          std::to_string(values.size()));
    return values;
}

[[nodiscard]] inline rigid::Vec3 parse_vec3(const std::string& text, const std::string& what) {
    const auto v = parse_list(text, 3, what);
    return {v[0], v[1], v[2]};
}

[[nodiscard]] inline rigid::Mat3 parse_mat3(const std::string& text, const std::string& what) {
    const auto v = parse_list(text, 9, what);
    rigid::Mat3 m;
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = v[static_cast<std::size_t>(i)];
    return m;
}

/// JSON scalars or arrays rendered in flag syntax.
[[nodiscard]] inline std::string json_to_flag_text(const nlohmann::json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_array()) {
        std::string out;
        for (std::size_t i = 0; i < value.size(); ++i) {
            out += (i ? "," : "") + json_to_flag_text(value[i]);
        }
        return out;
    }
    if (value.is_number_float()) return io::format_double(value.get<double>());
    return value.dump();
}

inline void parse_tolerance(const std::string& entry, std::map<std::string, double>& out) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
        const double all = parse_list(entry, 1, "--tol")[0];
        for (const auto& [name, _] : verify::default_tolerances()) out[name] = all;
        return;
    }
    const std::string name = entry.substr(0, eq);
    cmech::detail::require(verify::default_tolerances().count(name) == 1, "--tol: unknown check '" + name + "'");
    out[name] = parse_list(entry.substr(eq + 1), 1, "--tol " + name)[0];
}

/// Raw option text, gathered from flags/env and then the JSON document.
struct RawOptions {
    std::string inertia, m0, r0, t, dt, method, order, surface, samples, seed, out, format;
    std::vector<std::string> tol;
    std::string config;
};

inline void fill_from_json(CLI::App& app, RawOptions& raw) {
    if (raw.config.empty()) return;
    std::ifstream in(raw.config);
    cmech::detail::require(static_cast<bool>(in), "cannot open config file '" + raw.config + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ContractViolation("config file is not valid JSON: " + std::string(e.what()));
    }
    cmech::detail::require(doc.is_object(), "config file must hold a JSON object");
    const std::map<std::string, std::string*> fields = {
        {"inertia", &raw.inertia}, {"m0", &raw.m0},       {"r0", &raw.r0},         {"t", &raw.t},
        {"dt", &raw.dt},           {"method", &raw.method}, {"order", &raw.order},   {"surface", &raw.surface},
        {"samples", &raw.samples}, {"seed", &raw.seed},   {"out", &raw.out},       {"format", &raw.format}};
    for (const auto& [key, value] : doc.items()) {
        if (key == "tol") {
            if (app.get_option("--tol")->count() > 0) continue;
            if (value.is_object()) {
                for (const auto& [name, v] : value.items()) raw.tol.push_back(name + "=" + json_to_flag_text(v));
            } else {
                raw.tol.push_back(json_to_flag_text(value));
            }
            continue;
        }
        const auto it = fields.find(key);
        cmech::detail::require(it != fields.end(), "config file: unknown key '" + key + "'");
        if (app.get_option("--" + key)->count() == 0) *it->second = json_to_flag_text(value);
    }
}

[[nodiscard]] inline RunConfig to_config(const RawOptions& raw) {
    RunConfig cfg;
    if (!raw.inertia.empty()) cfg.inertia = parse_vec3(raw.inertia, "--inertia");
    if (!raw.m0.empty()) cfg.m0 = parse_vec3(raw.m0, "--m0");
    if (!raw.r0.empty()) cfg.r0 = parse_mat3(raw.r0, "--r0");
    if (!raw.t.empty()) cfg.t_final = parse_list(raw.t, 1, "--t")[0];
    if (!raw.dt.empty()) cfg.step = parse_list(raw.dt, 1, "--dt")[0];
    if (!raw.order.empty()) cfg.order = static_cast<int>(parse_list(raw.order, 1, "--order")[0]);
    if (!raw.samples.empty()) cfg.samples = static_cast<int>(parse_list(raw.samples, 1, "--samples")[0]);
    if (!raw.seed.empty()) {
        try {
            cfg.seed = std::stoull(raw.seed);
        } catch (const std::logic_error&) {
            throw ContractViolation("--seed: cannot parse '" + raw.seed + "'");
        }
    }
    if (!raw.method.empty()) {
        cmech::detail::require(raw.method == "lie" || raw.method == "rk4", "--method must be lie or rk4");
        cfg.method = raw.method == "lie" ? Method::Lie : Method::Rk4;
    }
    if (!raw.format.empty()) {
        cmech::detail::require(raw.format == "csv" || raw.format == "json", "--format must be csv or json");
        cfg.format = raw.format == "csv" ? Format::Csv : Format::Json;
    }
    if (!raw.surface.empty()) {
        cmech::detail::require(raw.surface == "sphere" || raw.surface == "so3", "--surface must be sphere or so3");
        cfg.surface = raw.surface;
    }
    cfg.out = raw.out;
    for (const auto& entry : raw.tol) parse_tolerance(entry, cfg.tolerances);
    cfg.validate();
    return cfg;
}

inline void add_shared_options(CLI::App& app, RawOptions& raw) {
    auto opt = [&](const std::string& flag, std::string& target, const std::string& help) {
        std::string env = "RB_";
        for (char c : flag) env += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        app.add_option("--" + flag, target, help)->envname(env);
    };
    opt("inertia", raw.inertia, "principal moments I1,I2,I3");
    opt("m0", raw.m0, "initial body angular momentum M1,M2,M3");
    opt("r0", raw.r0, "initial rotation, 9 row-major values (default identity)");
    opt("t", raw.t, "final time");
    opt("dt", raw.dt, "step size");
    opt("method", raw.method, "lie | rk4");
    opt("order", raw.order, "Lie-series truncation order");
    opt("surface", raw.surface, "sphere | so3");
    opt("samples", raw.samples, "random sample points for verify");
    opt("seed", raw.seed, "sampling seed");
    opt("out", raw.out, "output path (default stdout)");
    opt("format", raw.format, "csv | json");
    app.add_option("--tol", raw.tol, "tolerance override name=value (or a bare value for all checks)")
        ->envname("RB_TOL");
    app.add_option("--config", raw.config, "JSON document with the same keys as the flags")->envname("RB_CONFIG");
}

inline void write_summary(std::ostream& out, const flow::Trajectory& traj) {
    const auto report = flow::invariants_report(traj);
    out << "samples " << traj.size() << '\n'
        << "drift_H0 " << io::format_double(report.energy_drift) << '\n'
        << "drift_M2norm " << io::format_double(report.momentum_norm_drift) << '\n'
        << "drift_s " << io::format_double(report.spatial_momentum_drift[0]) << ' '
        << io::format_double(report.spatial_momentum_drift[1]) << ' '
        << io::format_double(report.spatial_momentum_drift[2]) << '\n'
        << "max_orthodefect " << io::format_double(report.max_orthogonality_defect) << '\n';
}

[[nodiscard]] inline int simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const rigid::InertiaTensor inertia(cfg.inertia);
    const rigid::RigidBodyState initial(rigid::RotationMatrix(cfg.r0), cfg.m0);
    flow::Trajectory traj;
    try {
        traj = cfg.method == Method::Lie ? flow::integrate_lie(inertia, initial, cfg.t_final, cfg.step, cfg.order)
                                         : flow::rk4_integrate(inertia, initial, cfg.t_final, cfg.step);
    } catch (const StepRejected& e) {
        err << e.what() << '\n';
        return kIntegrationFailure;
    }
    auto emit = [&](std::ostream& stream) {
        if (cfg.format == Format::Csv) {
            io::write_csv(stream, traj);
        } else {
            io::write_json(stream, traj);
        }
    };
    if (cfg.out.empty()) {
        emit(out);
        write_summary(err, traj);
    } else {
        std::ofstream file(cfg.out);
        if (!file) {
            err << "cannot open output file '" << cfg.out << "'\n";
            return kConfigError;
        }
        emit(file);
        write_summary(out, traj);
    }
    return kSuccess;
}

[[nodiscard]] inline int verify_suite(const std::string& suite, const RunConfig& cfg, std::ostream& out,
                                      std::ostream& err) {
    const verify::SuiteReport report = verify::run_suite(suite, cfg.verify_options());
    const std::string text = report.render();
    if (cfg.out.empty()) {
        out << text;
    } else {
        std::ofstream file(cfg.out);
        file << text;
        out << text;
    }
    if (!report.passed()) {
        const auto* worst = report.worst_failure();
        err << "verification failed: " << worst->name << " residual " << io::format_double(worst->max_residual)
            << " at " << worst->worst << '\n';
        return kVerificationFailure;
    }
    return kSuccess;
}

}  // namespace detail

/// Entry point shared by the rbsim executable and the tests.
[[nodiscard]] inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Free rigid body on SO(3): Lie-series simulation and bracket verification", "rbsim"};
    app.require_subcommand(1);

    detail::RawOptions sim_raw;
    auto* simulate = app.add_subcommand("simulate", "integrate the Euler-Poisson equations");
    detail::add_shared_options(*simulate, sim_raw);

    detail::RawOptions ver_raw;
    std::string suite;
    auto* verify = app.add_subcommand("verify", "run a property suite: brackets | jacobi | dirac | invariants");
    verify->add_option("suite", suite, "suite name")
        ->required()
        ->check(CLI::IsMember({"brackets", "jacobi", "dirac", "invariants"}));
    detail::add_shared_options(*verify, ver_raw);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return kConfigError;
    }

    CLI::App* active = simulate->parsed() ? simulate : verify;
    detail::RawOptions& raw = simulate->parsed() ? sim_raw : ver_raw;
    RunConfig cfg;
    try {
        detail::fill_from_json(*active, raw);
        cfg = detail::to_config(raw);
    } catch (const MechanicsError& e) {
        err << e.what() << '\n';
        return kConfigError;
    }

    try {
        if (active == simulate) return detail::simulate(cfg, out, err);
        return detail::verify_suite(suite, cfg, out, err);
    } catch (const StepRejected& e) {
        err << e.what() << '\n';
        return kIntegrationFailure;
    } catch (const MechanicsError& e) {
        err << e.what() << '\n';
        return kVerificationFailure;
    }
}

}  // namespace cmech::cli
