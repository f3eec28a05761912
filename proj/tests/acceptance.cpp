// Acceptance criteria: one PASS/FAIL line each, nonzero exit on any failure.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "cmech/cli.hpp"
#include "cmech/flow.hpp"
#include "cmech/verify.hpp"

using namespace cmech;

namespace {

struct Outcome {
    double value;
    double tolerance;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double time_limit, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o{};
    bool threw = false;
    std::string error;
    try {
        o = body();
    } catch (const std::exception& e) {
        threw = true;
        error = e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = !threw && o.value < o.tolerance && seconds < time_limit;
    if (!ok) ++failures;
    if (threw) {
        std::printf("[FAIL] %2d. %s: exception: %s (%.3fs)\n", id, name.c_str(), error.c_str(), seconds);
    } else {
        std::printf("[%s] %2d. %s: %.3e vs tol %.1e, %.3fs (limit %.0fs)%s%s\n", ok ? "PASS" : "FAIL", id,
                    name.c_str(), o.value, o.tolerance, seconds, time_limit, o.detail.empty() ? "" : "  ",
                    o.detail.c_str());
    }
    std::fflush(stdout);
}

double worst_of(const verify::SuiteReport& report, const std::string& check) {
    for (const auto& c : report.checks)
        if (c.name == check) return c.max_residual;
    throw ContractViolation("missing check " + check);
}

const rigid::Vec3 kInertia{2.0, 3.0, 4.0};

double state_distance(const rigid::RigidBodyState& a, const rigid::RigidBodyState& b) {
    return std::max((a.M - b.M).cwiseAbs().maxCoeff(), (a.R - b.R).cwiseAbs().maxCoeff());
}

std::string run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "rbsim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return std::to_string(code) + "\n" + out.str();
}

}  // namespace

int main() {
    criterion(1, "Dirac bracket reproduces the noncanonical bracket (sphere, so3; 20 points)", 10.0, [] {
        double worst = 0.0;
        for (const char* surface : {"sphere", "so3"}) {
            verify::Options opt;
            opt.surface = surface;
            opt.samples = 20;
            worst = std::max(worst, worst_of(verify::run_dirac(opt), "dirac_reduction"));
        }
        return Outcome{worst, 1e-6, ""};
    });

    criterion(2, "reduced bracket on so3 recovers both Chetaev forms (20 points)", 10.0, [] {
        verify::Options opt;
        opt.surface = "so3";
        opt.samples = 20;
        const auto report = verify::run_brackets(opt);
        const double full = worst_of(report, "chetaev_full");
        const double simple = worst_of(report, "chetaev_simple");
        char detail[96];
        std::snprintf(detail, sizeof(detail), "full %.2e, simple %.2e", full, simple);
        return Outcome{std::max(full, simple), 1e-6, detail};
    });

    criterion(3, "structure functions vanish on tangent indices (100 points per surface)", 5.0, [] {
        double worst = 0.0;
        for (const char* name : {"sphere", "so3"}) {
            const auto setup = verify::make_setup(name, kInertia);
            sampling::Rng rng(42);
            for (int s = 0; s < 100; ++s) {
                const auto point = verify::random_on_constraint(setup, rng);
                const auto c = structure_functions(point.surface, point.point.q);
                worst = std::max(worst, max_tangent_structure_function(point.surface, c));
            }
        }
        return Outcome{worst, 1e-6, ""};
    });

    criterion(4, "Chetaev bracket satisfies Jacobi (50 states)", 1.0, [] {
        sampling::Rng rng(42);
        double worst = 0.0;
        for (int s = 0; s < 50; ++s) {
            worst = std::max(worst, rigid::chetaev_jacobi_residual(verify::random_rigid_state(rng)));
        }
        return Outcome{worst, 1e-12, ""};
    });

    criterion(5, "constraints are Dirac Casimirs (50 random observables)", 5.0, [] {
        double worst = 0.0;
        for (const char* name : {"sphere", "so3"}) {
            const auto setup = verify::make_setup(name, kInertia);
            sampling::Rng rng(42);
            auto check_g = verify::CheckResult{"casimir_G", 0.0, 1e-6, ""};
            auto check_phi = verify::CheckResult{"casimir_Phi", 0.0, 1e-6, ""};
            for (int s = 0; s < 10; ++s) {
                const auto point = verify::random_on_constraint(setup, rng);
                std::vector<Observable> fs;
                for (int i = 0; i < 5; ++i) fs.push_back(verify::random_observable(setup.surface.n(), rng, i));
                verify::casimir(point, setup.lagrangian, fs, s, check_g, check_phi);
            }
            worst = std::max({worst, check_g.max_residual, check_phi.max_residual});
        }
        return Outcome{worst, 1e-6, ""};
    });

    criterion(6, "single order-20 Lie expansion vs RK4 (h = 1e-4) on [0, 1]", 1.0, [] {
        const rigid::InertiaTensor inertia(kInertia);
        const rigid::RigidBodyState initial(rigid::RotationMatrix(), rigid::Vec3(1.0, 1.0, 1.0));
        const auto jet = flow::taylor_jet(inertia, initial, 20);
        const auto reference = flow::rk4_integrate(inertia, initial, 1.0, 1e-4);
        double worst = 0.0;
        for (std::size_t i = 0; i < reference.times.size(); i += 100) {
            const auto lie = flow::lie_series_evaluate(jet, reference.times[i]);
            worst = std::max(worst, state_distance(lie, reference.states[i]));
        }
        return Outcome{worst, 1e-9, ""};
    });

    criterion(7, "spherical top: M constant and R matches the axis-angle rotation", 1.0, [] {
        const rigid::InertiaTensor inertia(rigid::Vec3(2.0, 2.0, 2.0));
        sampling::Rng rng(7);
        const rigid::Mat3 r0 = sampling::rotation(rng);
        const rigid::Vec3 m0(0.3, -0.8, 0.5);
        const rigid::Vec3 omega = inertia.angular_velocity(m0);
        const auto jet = flow::taylor_jet(inertia, rigid::RigidBodyState(rigid::RotationMatrix(r0), m0), 24);
        double m_drift = 0.0;
        double r_error = 0.0;
        for (int i = 0; i <= 20; ++i) {
            const double t = 0.05 * i;
            const auto s = flow::lie_series_evaluate(jet, t);
            const rigid::Mat3 exact =
                r0 * Eigen::AngleAxisd(omega.norm() * t, omega.normalized()).toRotationMatrix();
            m_drift = std::max(m_drift, (s.M - m0).cwiseAbs().maxCoeff());
            r_error = std::max(r_error, (s.R - exact).cwiseAbs().maxCoeff());
        }
        char detail[96];
        std::snprintf(detail, sizeof(detail), "M drift %.2e / 1e-14, R error %.2e / 1e-12", m_drift, r_error);
        // worst residual/tolerance ratio
        return Outcome{std::max(m_drift / 1e-14, r_error / 1e-12), 1.0, detail};
    });

    criterion(8, "conservation over T = 10, h = 0.1, order 16", 10.0, [] {
        const rigid::InertiaTensor inertia(kInertia);
        const rigid::RigidBodyState initial(rigid::RotationMatrix(), rigid::Vec3(1.0, 1.0, 1.0));
        const auto report = flow::invariants_report(flow::integrate_lie(inertia, initial, 10.0, 0.1, 16));
        char detail[128];
        std::snprintf(detail, sizeof(detail), "H0 %.2e, |M|^2 %.2e, s %.2e, orthodefect %.2e",
                      report.energy_drift, report.momentum_norm_drift, report.max_spatial_drift(),
                      report.max_orthogonality_defect);
        // drifts against 1e-10, orthogonality against 1e-9; worst ratio
        const double ratio = std::max({report.energy_drift / 1e-10, report.momentum_norm_drift / 1e-10,
                                       report.max_spatial_drift() / 1e-10, report.max_orthogonality_defect / 1e-9});
        return Outcome{ratio, 1.0, detail};
    });

    criterion(9, "inertia (1, 2, 3) is rejected as a degenerate body", 1.0, [] {
        try {
            const rigid::InertiaTensor inertia(rigid::Vec3(1.0, 2.0, 3.0));
        } catch (const DegenerateBody&) {
            return Outcome{0.0, 1.0, "DegenerateBody raised"};
        }
        return Outcome{1.0, 1.0, "no error raised"};
    });

    criterion(10, "verify output is byte-identical across runs with a fixed seed", 10.0, [] {
        double mismatches = 0.0;
        for (const char* suite : {"dirac", "brackets", "jacobi", "invariants"}) {
            const std::vector<std::string> args{"verify", suite, "--surface", "so3", "--samples", "5", "--seed", "42"};
            if (run_cli(args) != run_cli(args)) mismatches += 1.0;
        }
        const std::string cmd = std::string(RBSIM_PATH) + " verify jacobi --samples 10 --seed 42";
        std::string outputs[2];
        for (auto& text : outputs) {
            FILE* pipe = ::popen(cmd.c_str(), "r");
            if (!pipe) throw ContractViolation("cannot launch " + cmd);
            char buf[4096];
            std::size_t n = 0;
            while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) text.append(buf, n);
            if (WEXITSTATUS(::pclose(pipe)) != 0) mismatches += 1.0;
        }
        if (outputs[0].empty() || outputs[0] != outputs[1]) mismatches += 1.0;
        return Outcome{mismatches, 0.5, ""};
    });

    std::printf("%s: %d failure(s)\n", failures == 0 ? "ALL PASS" : "FAILED", failures);
    return failures == 0 ? 0 : 1;
}
