#pragma once

// Time evolution of the free rigid body. The general solution is the
// exponential of the Hamiltonian vector field applied to the coordinate
// functions; truncating it gives a Taylor method whose coefficients follow a
// Cauchy-product recurrence. A classical RK4 integrator serves as reference.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "cmech/rigidbody.hpp"

namespace cmech::flow {

using rigid::InertiaTensor;
using rigid::Mat3;
using rigid::RigidBodyState;
using rigid::Vec3;

/// Taylor coefficients x(t) = sum_k c_k t^k of M(t) and R(t) at an expansion point.
struct TaylorJet {
    std::vector<Vec3> M;
    std::vector<Mat3> R;

    [[nodiscard]] int order() const noexcept { return static_cast<int>(M.size()) - 1; }

    /// Combined max-norm of coefficient k over M and R.
    [[nodiscard]] double coefficient_norm(int k) const {
        const auto i = static_cast<std::size_t>(k);
        return std::max(M[i].cwiseAbs().maxCoeff(), R[i].cwiseAbs().maxCoeff());
    }
};

/// (k+1) M_{k+1} = sum_j M_j x Omega_{k-j},  (k+1) row_{k+1} = sum_j row_j x Omega_{k-j}.
[[nodiscard]] inline TaylorJet taylor_jet(const InertiaTensor& inertia, const RigidBodyState& s, int order) {
    detail::require(order >= 1, "taylor_jet: order must be at least 1");
    const auto size = static_cast<std::size_t>(order + 1);
    TaylorJet jet;
    jet.M.assign(size, Vec3::Zero());
    jet.R.assign(size, Mat3::Zero());
    std::vector<Vec3> omega(size, Vec3::Zero());
    jet.M[0] = s.M;
    jet.R[0] = s.R;
    omega[0] = inertia.angular_velocity(s.M);
    for (std::size_t k = 0; k < size - 1; ++k) {
        Vec3 dm = Vec3::Zero();
        Mat3 dr = Mat3::Zero();
        for (std::size_t j = 0; j <= k; ++j) {
            const Vec3& w = omega[k - j];
            dm += jet.M[j].cross(w);
            for (int row = 0; row < 3; ++row) {
                dr.row(row) += jet.R[j].row(row).cross(w.transpose());
            }
        }
        const double scale = 1.0 / static_cast<double>(k + 1);
        jet.M[k + 1] = scale * dm;
        jet.R[k + 1] = scale * dr;
        omega[k + 1] = inertia.angular_velocity(jet.M[k + 1]);
    }
    return jet;
}

/// Horner evaluation of the truncated series; no re-orthogonalization.
[[nodiscard]] inline RigidBodyState lie_series_evaluate(const TaylorJet& jet, double t) {
    const int n = jet.order();
    Vec3 m = jet.M[static_cast<std::size_t>(n)];
    Mat3 r = jet.R[static_cast<std::size_t>(n)];
    for (int k = n - 1; k >= 0; --k) {
        m = (m * t + jet.M[static_cast<std::size_t>(k)]).eval();
        r = (r * t + jet.R[static_cast<std::size_t>(k)]).eval();
    }
    return {r, m};
}

struct Diagnostics {
    double energy = 0.0;
    double momentum_norm_squared = 0.0;
    Vec3 spatial_momentum = Vec3::Zero();
    double orthogonality_defect = 0.0;
};

[[nodiscard]] inline Diagnostics diagnose(const InertiaTensor& inertia, const RigidBodyState& s) {
    return {rigid::h0(inertia, s.M), s.M.squaredNorm(), rigid::spatial_momentum(s), rigid::orthogonality_defect(s.R)};
}

struct Trajectory {
    std::vector<double> times;
    std::vector<RigidBodyState> states;
    std::vector<Diagnostics> diagnostics;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }

    void push(const InertiaTensor& inertia, double t, const RigidBodyState& s) {
        detail::require(times.empty() || t > times.back(), "trajectory times must be strictly increasing");
        times.push_back(t);
        states.push_back(s);
        diagnostics.push_back(diagnose(inertia, s));
    }
};

inline constexpr int kDefaultOrder = 16;
inline constexpr double kStepAcceptance = 0.5;

/// Accept a step when |h| * |c_N| / |c_{N-1}| < 0.5.
[[nodiscard]] inline double step_ratio(const TaylorJet& jet) {
    const int n = jet.order();
    const double last = jet.coefficient_norm(n);
    const double previous = jet.coefficient_norm(n - 1);
    if (last == 0.0) return 0.0;
    if (previous == 0.0) return std::numeric_limits<double>::infinity();
    return last / previous;
}

namespace detail {

[[nodiscard]] inline std::size_t step_count(double t_final, double h) {
    cmech::detail::require(t_final > 0.0 && h > 0.0, "integration requires T > 0 and h > 0");
    return static_cast<std::size_t>(std::ceil(t_final / h * (1.0 - 1e-12)));
}

[[nodiscard]] inline double sample_time(std::size_t step, std::size_t steps, double t_final, double h) {
    return step == steps ? t_final : static_cast<double>(step) * h;
}

}  // namespace detail

/// Piecewise Lie-series integration, re-expanding about the current state
/// every step h. Throws StepRejected when the ratio test fails.
[[nodiscard]] inline Trajectory integrate_lie(const InertiaTensor& inertia, const RigidBodyState& initial,
                                              double t_final, double h, int order = kDefaultOrder) {
    cmech::detail::require(order >= 4, "integrate_lie: order must be at least 4");
    const std::size_t steps = detail::step_count(t_final, h);
    Trajectory traj;
    traj.push(inertia, 0.0, initial);
    RigidBodyState s = initial;
    double t = 0.0;
    for (std::size_t i = 1; i <= steps; ++i) {
        const double next = detail::sample_time(i, steps, t_final, h);
        const double dt = next - t;
        const TaylorJet jet = taylor_jet(inertia, s, order);
        const double ratio = step_ratio(jet);
        if (!(dt * ratio < kStepAcceptance)) {
            const double suggested = std::isfinite(ratio) && ratio > 0.0 ? 0.9 * kStepAcceptance / ratio : 0.5 * h;
            throw StepRejected("Lie-series step " + std::to_string(dt) + " at t = " + std::to_string(t) +
                                   " fails the ratio test (h * ratio = " + std::to_string(dt * ratio) +
                                   "); try h <= " + std::to_string(suggested),
                               suggested);
        }
        s = lie_series_evaluate(jet, dt);
        t = next;
        traj.push(inertia, t, s);
    }
    return traj;
}

[[nodiscard]] inline RigidBodyState rk4_step(const InertiaTensor& inertia, const RigidBodyState& s, double h) {
    auto shifted = [](const RigidBodyState& base, const rigid::StateRate& k, double dt) {
        return RigidBodyState(base.R + dt * k.R_dot, base.M + dt * k.M_dot);
    };
    const auto k1 = rigid::euler_poisson_rhs(inertia, s);
    const auto k2 = rigid::euler_poisson_rhs(inertia, shifted(s, k1, 0.5 * h));
    const auto k3 = rigid::euler_poisson_rhs(inertia, shifted(s, k2, 0.5 * h));
    const auto k4 = rigid::euler_poisson_rhs(inertia, shifted(s, k3, h));
    return {s.R + (h / 6.0) * (k1.R_dot + 2.0 * k2.R_dot + 2.0 * k3.R_dot + k4.R_dot),
            s.M + (h / 6.0) * (k1.M_dot + 2.0 * k2.M_dot + 2.0 * k3.M_dot + k4.M_dot)};
}

/// Fixed-step classical RK4; every step is stored.
[[nodiscard]] inline Trajectory rk4_integrate(const InertiaTensor& inertia, const RigidBodyState& initial,
                                              double t_final, double h) {
    const std::size_t steps = detail::step_count(t_final, h);
    Trajectory traj;
    traj.push(inertia, 0.0, initial);
    RigidBodyState s = initial;
    double t = 0.0;
    for (std::size_t i = 1; i <= steps; ++i) {
        const double next = detail::sample_time(i, steps, t_final, h);
        s = rk4_step(inertia, s, next - t);
        t = next;
        traj.push(inertia, t, s);
    }
    return traj;
}

/// State at t_final only, without storing intermediate samples.
[[nodiscard]] inline RigidBodyState rk4_endpoint(const InertiaTensor& inertia, const RigidBodyState& initial,
                                                 double t_final, double h) {
    const std::size_t steps = detail::step_count(t_final, h);
    RigidBodyState s = initial;
    double t = 0.0;
    for (std::size_t i = 1; i <= steps; ++i) {
        const double next = detail::sample_time(i, steps, t_final, h);
        s = rk4_step(inertia, s, next - t);
        t = next;
    }
    return s;
}

/// Max drifts relative to the first sample. Spatial-momentum components are
/// normalized by |s(0)|; absolute values are used when a reference is zero.
struct InvariantsReport {
    double energy_drift = 0.0;
    double momentum_norm_drift = 0.0;
    Vec3 spatial_momentum_drift = Vec3::Zero();
    double max_orthogonality_defect = 0.0;

    [[nodiscard]] double max_spatial_drift() const { return spatial_momentum_drift.maxCoeff(); }
};

[[nodiscard]] inline InvariantsReport invariants_report(const Trajectory& traj) {
    InvariantsReport report;
    if (traj.diagnostics.empty()) return report;
    const Diagnostics& first = traj.diagnostics.front();
    auto relative = [](double value, double reference) {
        const double diff = std::abs(value - reference);
        return reference != 0.0 ? diff / std::abs(reference) : diff;
    };
    const double s_scale = first.spatial_momentum.norm();
    for (const auto& d : traj.diagnostics) {
        report.energy_drift = std::max(report.energy_drift, relative(d.energy, first.energy));
        report.momentum_norm_drift =
            std::max(report.momentum_norm_drift, relative(d.momentum_norm_squared, first.momentum_norm_squared));
        for (int i = 0; i < 3; ++i) {
            const double diff = std::abs(d.spatial_momentum[i] - first.spatial_momentum[i]);
            report.spatial_momentum_drift[i] =
                std::max(report.spatial_momentum_drift[i], s_scale > 0.0 ? diff / s_scale : diff);
        }
        report.max_orthogonality_defect = std::max(report.max_orthogonality_defect, d.orthogonality_defect);
    }
    return report;
}

/// Rodrigues rotation of v about unit axis u by angle theta.
[[nodiscard]] inline Vec3 rotate_about(const Vec3& v, const Vec3& u, double theta) {
    return v * std::cos(theta) + u.cross(v) * std::sin(theta) + u * u.dot(v) * (1.0 - std::cos(theta));
}

}  // namespace cmech::flow
