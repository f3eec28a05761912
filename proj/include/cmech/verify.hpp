#pragma once

// Property suites shared by the command line and the acceptance tests. Each
// check reports its largest residual, the tolerance it is held to, and where
// the worst residual occurred.

#include <Eigen/Dense>

#include <cstdint>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cmech/brackets.hpp"
#include "cmech/flow.hpp"
#include "cmech/rigidbody.hpp"
#include "cmech/sampling.hpp"
#include "cmech/surfaces.hpp"

namespace cmech::verify {

inline const std::map<std::string, double>& default_tolerances() {
    static const std::map<std::string, double> tolerances = {
        {"dirac_reduction", 1e-6},    {"casimir_G", 1e-6},          {"casimir_Phi", 1e-6},
        {"intermediate_vs_dirac", 1e-6}, {"structure_vanishing", 1e-6}, {"chetaev_full", 1e-6},
        {"chetaev_simple", 1e-6},     {"chetaev_jacobi", 1e-12},    {"noncanonical_jacobi", 1e-5},
        {"energy_drift", 1e-10},      {"momentum_norm_drift", 1e-10}, {"spatial_drift", 1e-10},
        {"orthogonality", 1e-9},
    };
    return tolerances;
}

struct Options {
    std::string surface = "sphere";
    int samples = 20;
    std::uint64_t seed = 42;
    rigid::Vec3 inertia{2.0, 3.0, 4.0};
    rigid::Vec3 m0{1.0, 1.0, 1.0};
    rigid::Mat3 r0 = rigid::Mat3::Identity();
    double t_final = 10.0;
    double step = 0.1;
    int order = flow::kDefaultOrder;
    std::map<std::string, double> tolerances;

    [[nodiscard]] double tolerance(const std::string& name) const {
        if (auto it = tolerances.find(name); it != tolerances.end()) return it->second;
        return default_tolerances().at(name);
    }
};

struct CheckResult {
    std::string name;
    double max_residual = 0.0;
    double tolerance = 0.0;
    std::string worst;

    [[nodiscard]] bool passed() const { return max_residual < tolerance; }

    void record(double residual, const std::string& where) {
        if (residual > max_residual || worst.empty()) {
            max_residual = std::max(max_residual, residual);
            worst = where;
        }
    }
};

struct SuiteReport {
    std::string suite;
    std::string header;
    std::vector<CheckResult> checks;

    [[nodiscard]] bool passed() const {
        for (const auto& c : checks)
            if (!c.passed()) return false;
        return true;
    }

    [[nodiscard]] const CheckResult* worst_failure() const {
        const CheckResult* worst = nullptr;
        for (const auto& c : checks) {
            if (!c.passed() && (!worst || c.max_residual / c.tolerance > worst->max_residual / worst->tolerance)) {
                worst = &c;
            }
        }
        return worst;
    }

    [[nodiscard]] std::string render() const {
        std::ostringstream out;
        out << "suite " << suite << ' ' << header << '\n';
        char line[256];
        for (const auto& c : checks) {
            std::snprintf(line, sizeof(line), "  %-22s max_residual=%.6e tol=%.1e %s", c.name.c_str(), c.max_residual,
                          c.tolerance, c.passed() ? "PASS" : "FAIL");
            out << line << "  worst: " << c.worst << '\n';
        }
        out << "result " << (passed() ? "PASS" : "FAIL") << '\n';
        return out.str();
    }
};

// --- sampling on the built-in surfaces --------------------------------------

struct SurfaceSetup {
    ConstraintSurface surface;
    QuadraticLagrangian lagrangian;
};

[[nodiscard]] inline SurfaceSetup make_setup(const std::string& name, const rigid::Vec3& inertia) {
    if (name == "so3") return {surfaces::so3(), rigid::so3_lagrangian(rigid::InertiaTensor(inertia))};
    if (name == "sphere") return {surfaces::sphere(3), QuadraticLagrangian::identity(3)};
    throw ContractViolation("unknown surface '" + name + "' (expected sphere or so3)");
}

[[nodiscard]] inline Vector random_surface_point(const ConstraintSurface& surface, sampling::Rng& rng) {
    if (surface.name() == "so3") return rigid::flatten(sampling::rotation(rng));
    if (surface.name() == "sphere") return sampling::sphere_point(rng, surface.n());
    throw ContractViolation("no sampler for surface '" + surface.name() + "'");
}

struct SampledPoint {
    ConstraintSurface surface;  // split adapted to the point
    PhasePoint point;
};

/// Random configuration on the surface and a momentum p = m v with v a random
/// combination of tangent rows, so the tertiary constraints hold.
[[nodiscard]] inline SampledPoint random_on_constraint(const SurfaceSetup& setup, sampling::Rng& rng) {
    const Vector q = random_surface_point(setup.surface, rng);
    ConstraintSurface adapted = setup.surface.adapted_at(q);
    const Matrix tangent = tangent_basis(adapted, q);
    const Vector velocity = tangent.transpose() * sampling::gaussian(rng, adapted.k());
    return {std::move(adapted), {q, setup.lagrangian.momentum(velocity)}};
}

[[nodiscard]] inline std::string pair_label(const std::string& a, const std::string& b, int sample) {
    return "sample " + std::to_string(sample) + " {" + a + "," + b + "}";
}

// --- residual kernels -------------------------------------------------------

/// Observables q^A followed by pi_i (tangent noncanonical momenta).
[[nodiscard]] inline std::vector<Observable> basic_observables(const ConstraintSurface& surface) {
    std::vector<Observable> out;
    for (int a = 0; a < surface.n(); ++a) out.push_back(observables::coordinate(surface.n(), a));
    for (int i = 0; i < surface.k(); ++i) {
        auto obs = observables::noncanonical_momentum(surface, surface.codim() + i);
        obs.label = "pi_t" + std::to_string(i);
        out.push_back(std::move(obs));
    }
    return out;
}

/// Index of each basic observable in the (2n) noncanonical table.
[[nodiscard]] inline std::vector<int> basic_table_indices(const ConstraintSurface& surface) {
    std::vector<int> out;
    for (int a = 0; a < surface.n(); ++a) out.push_back(a);
    for (int i = 0; i < surface.k(); ++i) out.push_back(surface.n() + surface.codim() + i);
    return out;
}

/// max |{x,y}_D - {x,y}| over x, y in {q^A} u {pi_i}.
inline void dirac_reduction(const SampledPoint& s, const QuadraticLagrangian& lagrangian, int sample,
                            CheckResult& check) {
    const DiracStructure dirac(s.surface, lagrangian, s.point);
    const FramePoint f = frame(s.surface, s.point.q);
    const BracketTable table = noncanonical_poisson(s.surface, s.point.q, to_noncanonical(f, s.point.p));
    const auto obs = basic_observables(s.surface);
    const auto idx = basic_table_indices(s.surface);
    std::vector<Vector> grads;
    for (const auto& o : obs) grads.push_back(gradient_of(o, s.point));
    for (std::size_t x = 0; x < obs.size(); ++x) {
        for (std::size_t y = 0; y < obs.size(); ++y) {
            const double d = dirac.bracket(grads[x], grads[y]);
            check.record(std::abs(d - table.values(idx[x], idx[y])), pair_label(obs[x].label, obs[y].label, sample));
        }
    }
}

/// Random quadratic observable f(z) = a.z + 1/2 z^T B z on phase space.
[[nodiscard]] inline Observable random_observable(int n, sampling::Rng& rng, int id) {
    const Vector a = sampling::gaussian(rng, 2 * n);
    const Vector b_raw = sampling::gaussian(rng, 4 * n * n);
    Matrix b = Eigen::Map<const Matrix>(b_raw.data(), 2 * n, 2 * n);
    b = (0.5 * (b + b.transpose())).eval();
    return {"f" + std::to_string(id),
            [a, b](const PhasePoint& z) {
                const Vector v = z.stacked();
                return a.dot(v) + 0.5 * v.dot(b * v);
            },
            [a, b](const PhasePoint& z) -> Vector { return a + b * z.stacked(); }};
}

inline void casimir(const SampledPoint& s, const QuadraticLagrangian& lagrangian, const std::vector<Observable>& fs,
                    int sample, CheckResult& check_g, CheckResult& check_phi) {
    const DiracStructure dirac(s.surface, lagrangian, s.point);
    for (int a = 0; a < s.surface.codim(); ++a) {
        const auto g = observables::constraint(s.surface, a);
        const auto phi = observables::tertiary(s.surface, lagrangian, a);
        const Vector grad_g = gradient_of(g, s.point);
        const Vector grad_phi = gradient_of(phi, s.point);
        for (const auto& f : fs) {
            const Vector grad_f = gradient_of(f, s.point);
            check_g.record(std::abs(dirac.bracket(grad_g, grad_f)), pair_label(g.label, f.label, sample));
            check_phi.record(std::abs(dirac.bracket(grad_phi, grad_f)), pair_label(phi.label, f.label, sample));
        }
    }
}

/// Reduced table entries against the Dirac bracket of the same pair.
inline void intermediate_vs_dirac(const SampledPoint& s, const QuadraticLagrangian& lagrangian, int sample,
                                  CheckResult& check) {
    const FramePoint f = frame(s.surface, s.point.q);
    const Vector pi = to_noncanonical(f, s.point.p);
    const ReducedBracketTable reduced =
        intermediate_bracket(s.surface, lagrangian, s.point.q, pi.tail(s.surface.k()));
    const DiracStructure dirac(s.surface, lagrangian, s.point);
    const auto obs = basic_observables(s.surface);
    std::vector<Vector> grads;
    for (const auto& o : obs) grads.push_back(gradient_of(o, s.point));
    for (std::size_t x = 0; x < obs.size(); ++x) {
        for (std::size_t y = 0; y < obs.size(); ++y) {
            const double d = dirac.bracket(grads[x], grads[y]);
            const auto xi = static_cast<Eigen::Index>(x);
            const auto yi = static_cast<Eigen::Index>(y);
            check.record(std::abs(d - reduced.values(xi, yi)), pair_label(obs[x].label, obs[y].label, sample));
        }
    }
}

/// Body momentum M as a function of the reduced variables (q, pi_i).
[[nodiscard]] inline rigid::Vec3 reduced_body_momentum(const ConstraintSurface& surface,
                                                       const QuadraticLagrangian& lagrangian, const rigid::Vec3& g,
                                                       const Vector& q, const Vector& pi_tangent) {
    const FramePoint f = frame(surface, q);
    const Vector p = from_noncanonical(f, complete_momentum(surface, lagrangian, f, pi_tangent));
    return rigid::body_momentum_from_canonical(rigid::unflatten(q), rigid::unflatten(p), g).M;
}

/// Pushes the reduced structure on (q, pi_i) forward to (R, M): the result is
/// a 12 x 12 tensor in the Chetaev coordinate order (R row-major, then M).
[[nodiscard]] inline rigid::PoissonTensor pushed_rigid_tensor(const ConstraintSurface& surface,
                                                              const QuadraticLagrangian& lagrangian,
                                                              const rigid::Vec3& g, const Vector& q,
                                                              const Vector& pi_tangent) {
    const ReducedBracketTable reduced = intermediate_bracket(surface, lagrangian, q, pi_tangent);
    Vector z(12);
    z << q, pi_tangent;
    const double h = fd_step(z);
    Eigen::Matrix<double, 12, 12> jac = Eigen::Matrix<double, 12, 12>::Zero();
    jac.topLeftCorner<9, 9>().setIdentity();
    for (int u = 0; u < 12; ++u) {
        Vector plus = z;
        Vector minus = z;
        plus[u] += h;
        minus[u] -= h;
        const rigid::Vec3 mp = reduced_body_momentum(surface, lagrangian, g, plus.head(9), plus.tail(3));
        const rigid::Vec3 mm = reduced_body_momentum(surface, lagrangian, g, minus.head(9), minus.tail(3));
        jac.block<3, 1>(9, u) = (mp - mm) / (2.0 * h);
    }
    return jac * reduced.values * jac.transpose();
}

/// Compares the pushed-forward reduced structure with both forms of the
/// Chetaev bracket at a random rotation and on-shell momentum.
inline void chetaev_recovery(const SurfaceSetup& setup, const rigid::InertiaTensor& inertia, sampling::Rng& rng,
                             int sample, CheckResult& full, CheckResult& simple) {
    const rigid::Mat3 r = sampling::rotation(rng);
    const Vector q = rigid::flatten(r);
    const ConstraintSurface surface = setup.surface.adapted_at(q);
    const rigid::Vec3 omega = sampling::gaussian(rng, 3);
    const rigid::Mat3 p = r * rigid::hat(omega) * inertia.mass().asDiagonal();
    const FramePoint f = frame(surface, q);
    const Vector pi = to_noncanonical(f, rigid::flatten(p));
    const Vector pi_tangent = pi.tail(3);

    const rigid::PoissonTensor pushed = pushed_rigid_tensor(surface, setup.lagrangian, inertia.mass(), q, pi_tangent);
    const rigid::RigidBodyState state(r, reduced_body_momentum(surface, setup.lagrangian, inertia.mass(), q, pi_tangent));
    for (int a = 0; a < 12; ++a) {
        for (int b = 0; b < 12; ++b) {
            const auto x = rigid::Coordinate::from_id(a);
            const auto y = rigid::Coordinate::from_id(b);
            const std::string where = pair_label(x.label(), y.label(), sample);
            full.record(std::abs(pushed(a, b) - rigid::full_bracket(x, y, state)), where);
            simple.record(std::abs(pushed(a, b) - rigid::chetaev_bracket(x, y, state)), where);
        }
    }
}

/// Jacobi residual of the noncanonical structure on (q, pi) with the tensor's
/// derivatives taken by central differences.
[[nodiscard]] inline std::pair<double, std::string> noncanonical_jacobi(const ConstraintSurface& surface,
                                                                        const Vector& q, const Vector& pi) {
    const int n = surface.n();
    const int dim = 2 * n;
    Vector z(dim);
    z << q, pi;
    const double h = fd_step(z);
    const Matrix p = noncanonical_poisson(surface, q, pi).values;
    std::vector<Matrix> dp(static_cast<std::size_t>(dim));
    for (int l = 0; l < dim; ++l) {
        Vector plus = z;
        Vector minus = z;
        plus[l] += h;
        minus[l] -= h;
        dp[static_cast<std::size_t>(l)] = (noncanonical_poisson(surface, plus.head(n), plus.tail(n)).values -
                                           noncanonical_poisson(surface, minus.head(n), minus.tail(n)).values) /
                                          (2.0 * h);
    }
    double worst = 0.0;
    std::string where;
    for (int x = 0; x < dim; ++x) {
        for (int y = 0; y < dim; ++y) {
            for (int w = 0; w < dim; ++w) {
                double sum = 0.0;
                for (int l = 0; l < dim; ++l) {
                    const auto& d = dp[static_cast<std::size_t>(l)];
                    sum += p(x, l) * d(y, w) + p(y, l) * d(w, x) + p(w, l) * d(x, y);
                }
                if (std::abs(sum) > worst) {
                    worst = std::abs(sum);
                    where = "(" + std::to_string(x) + "," + std::to_string(y) + "," + std::to_string(w) + ")";
                }
            }
        }
    }
    return {worst, where};
}

// --- suites -----------------------------------------------------------------

[[nodiscard]] inline CheckResult make_check(const Options& opt, const std::string& name) {
    return {name, 0.0, opt.tolerance(name), ""};
}

[[nodiscard]] inline std::string header(const Options& opt, bool with_surface) {
    std::ostringstream out;
    if (with_surface) out << "surface=" << opt.surface << ' ';
    out << "samples=" << opt.samples << " seed=" << opt.seed;
    return out.str();
}

[[nodiscard]] inline SuiteReport run_dirac(const Options& opt) {
    const SurfaceSetup setup = make_setup(opt.surface, opt.inertia);
    sampling::Rng rng(opt.seed);
    auto reduction = make_check(opt, "dirac_reduction");
    auto cas_g = make_check(opt, "casimir_G");
    auto cas_phi = make_check(opt, "casimir_Phi");
    for (int s = 0; s < opt.samples; ++s) {
        const SampledPoint point = random_on_constraint(setup, rng);
        dirac_reduction(point, setup.lagrangian, s, reduction);
        std::vector<Observable> fs;
        for (int i = 0; i < 5; ++i) fs.push_back(random_observable(setup.surface.n(), rng, i));
        casimir(point, setup.lagrangian, fs, s, cas_g, cas_phi);
    }
    return {"dirac", header(opt, true), {reduction, cas_g, cas_phi}};
}

[[nodiscard]] inline SuiteReport run_brackets(const Options& opt) {
    const SurfaceSetup setup = make_setup(opt.surface, opt.inertia);
    sampling::Rng rng(opt.seed);
    auto vs_dirac = make_check(opt, "intermediate_vs_dirac");
    auto vanishing = make_check(opt, "structure_vanishing");
    for (int s = 0; s < opt.samples; ++s) {
        const SampledPoint point = random_on_constraint(setup, rng);
        intermediate_vs_dirac(point, setup.lagrangian, s, vs_dirac);
        const auto c = structure_functions(point.surface, point.point.q);
        vanishing.record(max_tangent_structure_function(point.surface, c), "sample " + std::to_string(s));
    }
    SuiteReport report{"brackets", header(opt, true), {vs_dirac, vanishing}};
    if (opt.surface == "so3") {
        const rigid::InertiaTensor inertia(opt.inertia);
        auto full = make_check(opt, "chetaev_full");
        auto simple = make_check(opt, "chetaev_simple");
        for (int s = 0; s < opt.samples; ++s) chetaev_recovery(setup, inertia, rng, s, full, simple);
        report.checks.push_back(full);
        report.checks.push_back(simple);
    }
    return report;
}

[[nodiscard]] inline rigid::RigidBodyState random_rigid_state(sampling::Rng& rng) {
    return {sampling::rotation(rng), sampling::gaussian(rng, 3)};
}

[[nodiscard]] inline SuiteReport run_jacobi(const Options& opt) {
    sampling::Rng rng(opt.seed);
    auto chetaev = make_check(opt, "chetaev_jacobi");
    for (int s = 0; s < opt.samples; ++s) {
        chetaev.record(rigid::chetaev_jacobi_residual(random_rigid_state(rng)), "sample " + std::to_string(s));
    }
    const SurfaceSetup setup = make_setup(opt.surface, opt.inertia);
    auto noncanonical = make_check(opt, "noncanonical_jacobi");
    for (int s = 0; s < opt.samples; ++s) {
        const SampledPoint point = random_on_constraint(setup, rng);
        const Vector pi = to_noncanonical(frame(point.surface, point.point.q), point.point.p);
        const auto [residual, where] = noncanonical_jacobi(point.surface, point.point.q, pi);
        noncanonical.record(residual, "sample " + std::to_string(s) + " triple " + where);
    }
    return {"jacobi", header(opt, true), {chetaev, noncanonical}};
}

/// Sample 0 integrates the configured initial state; the rest use seeded
/// random rotations and momenta of comparable size.
[[nodiscard]] inline SuiteReport run_invariants(const Options& opt) {
    const rigid::InertiaTensor inertia(opt.inertia);
    sampling::Rng rng(opt.seed);
    auto energy = make_check(opt, "energy_drift");
    auto norm = make_check(opt, "momentum_norm_drift");
    auto spatial = make_check(opt, "spatial_drift");
    auto ortho = make_check(opt, "orthogonality");
    for (int s = 0; s < opt.samples; ++s) {
        const rigid::RigidBodyState initial =
            s == 0 ? rigid::RigidBodyState(rigid::RotationMatrix(opt.r0), opt.m0) : random_rigid_state(rng);
        const auto traj = flow::integrate_lie(inertia, initial, opt.t_final, opt.step, opt.order);
        const auto report = flow::invariants_report(traj);
        const std::string where = "sample " + std::to_string(s);
        energy.record(report.energy_drift, where);
        norm.record(report.momentum_norm_drift, where);
        spatial.record(report.max_spatial_drift(), where);
        ortho.record(report.max_orthogonality_defect, where);
    }
    std::ostringstream head;
    head << "samples=" << opt.samples << " seed=" << opt.seed << " t=" << opt.t_final << " dt=" << opt.step
         << " order=" << opt.order;
    return {"invariants", head.str(), {energy, norm, spatial, ortho}};
}

[[nodiscard]] inline SuiteReport run_suite(const std::string& suite, const Options& opt) {
    if (suite == "dirac") return run_dirac(opt);
    if (suite == "brackets") return run_brackets(opt);
    if (suite == "jacobi") return run_jacobi(opt);
    if (suite == "invariants") return run_invariants(opt);
    throw ContractViolation("unknown verify suite '" + suite + "'");
}

}  // namespace cmech::verify
