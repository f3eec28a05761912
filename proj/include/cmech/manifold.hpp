#pragma once

// Constraint surfaces G_a(q) = 0 in R^n, the quadratic Lagrangian class, the
// Legendre map, and the rank / nondegeneracy gate used by everything else.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cmech/errors.hpp"

namespace cmech {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Finite-difference step for first differences of a supplied first derivative.
[[nodiscard]] inline double fd_step(const Vector& at) {
    const double scale = at.size() == 0 ? 1.0 : std::max(1.0, at.cwiseAbs().maxCoeff());
    return std::cbrt(std::numeric_limits<double>::epsilon()) * scale;
}

class ConstraintSurface {
public:
    using ValueFn = std::function<Vector(const Vector&)>;
    using JacobianFn = std::function<Matrix(const Vector&)>;
    /// One n x n matrix d^2 G_a / dq^B dq^C per constraint a.
    using HessianFn = std::function<std::vector<Matrix>(const Vector&)>;

    static constexpr double kDefaultTolerance = 1e-9;

    /// Split chosen by pivoted elimination on the jacobian at `reference`.
    ConstraintSurface(std::string name, int n, int k, ValueFn value, JacobianFn jacobian,
                      std::optional<HessianFn> hessians, const Vector& reference)
        : name_(std::move(name)), n_(n), k_(k), value_(std::move(value)),
          jacobian_(std::move(jacobian)), hessians_(std::move(hessians)) {
        validate_dimensions();
        detail::require(reference.size() == n_, "reference point has wrong dimension");
        split_ = choose_split(jacobian_(reference), codim());
    }

    /// Explicit split: the first n-k entries are the resolved coordinates q^a.
    ConstraintSurface(std::string name, int n, int k, ValueFn value, JacobianFn jacobian,
                      std::optional<HessianFn> hessians, std::vector<int> split)
        : name_(std::move(name)), n_(n), k_(k), value_(std::move(value)),
          jacobian_(std::move(jacobian)), hessians_(std::move(hessians)), split_(std::move(split)) {
        validate_dimensions();
        validate_split();
    }

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] int k() const noexcept { return k_; }
    [[nodiscard]] int codim() const noexcept { return n_ - k_; }
    [[nodiscard]] double tolerance() const noexcept { return tolerance_; }
    [[nodiscard]] const std::vector<int>& split() const noexcept { return split_; }
    [[nodiscard]] bool has_second_derivatives() const noexcept { return hessians_.has_value(); }

    [[nodiscard]] std::vector<int> constraint_columns() const {
        return {split_.begin(), split_.begin() + codim()};
    }
    [[nodiscard]] std::vector<int> tangent_columns() const {
        return {split_.begin() + codim(), split_.end()};
    }

    [[nodiscard]] Vector value(const Vector& q) const {
        check_point(q);
        return value_(q);
    }
    [[nodiscard]] Matrix jacobian(const Vector& q) const {
        check_point(q);
        return jacobian_(q);
    }

    /// Supplied second derivatives, or central differences of the jacobian.
    [[nodiscard]] std::vector<Matrix> second_derivatives(const Vector& q) const {
        check_point(q);
        if (hessians_) {
            return (*hessians_)(q);
        }
        const double h = fd_step(q);
        std::vector<Matrix> out(static_cast<std::size_t>(codim()), Matrix::Zero(n_, n_));
        for (int c = 0; c < n_; ++c) {
            Vector plus = q;
            Vector minus = q;
            plus[c] += h;
            minus[c] -= h;
            const Matrix dj = (jacobian_(plus) - jacobian_(minus)) / (2.0 * h);
            for (int a = 0; a < codim(); ++a) {
                out[static_cast<std::size_t>(a)].col(c) = dj.row(a).transpose();
            }
        }
        for (auto& hess : out) {
            hess = (0.5 * (hess + hess.transpose())).eval();
        }
        return out;
    }

    [[nodiscard]] bool contains(const Vector& q) const {
        return value(q).cwiseAbs().maxCoeff() < tolerance_;
    }

    /// Copy of this surface whose split is re-chosen at q.
    [[nodiscard]] ConstraintSurface adapted_at(const Vector& q) const {
        ConstraintSurface copy = *this;
        copy.split_ = choose_split(jacobian(q), codim());
        return copy;
    }

    [[nodiscard]] ConstraintSurface with_tolerance(double tolerance) const {
        ConstraintSurface copy = *this;
        copy.tolerance_ = tolerance;
        return copy;
    }

    /// Column-pivoted elimination: at each stage take the largest remaining
    /// entry, lowest column index on ties. Result lists the chosen columns
    /// (ascending) followed by the remaining ones (ascending).
    [[nodiscard]] static std::vector<int> choose_split(Matrix work, int codim) {
        const int n = static_cast<int>(work.cols());
        std::vector<bool> taken(static_cast<std::size_t>(n), false);
        std::vector<int> chosen;
        const double scale = std::max(1.0, work.cwiseAbs().maxCoeff());
        for (int stage = 0; stage < codim; ++stage) {
            int best_row = -1;
            int best_col = -1;
            double best = 0.0;
            for (int c = 0; c < n; ++c) {
                if (taken[static_cast<std::size_t>(c)]) continue;
                for (int r = stage; r < codim; ++r) {
                    if (std::abs(work(r, c)) > best) {
                        best = std::abs(work(r, c));
                        best_row = r;
                        best_col = c;
                    }
                }
            }
            if (best_col < 0 || best <= 1e-12 * scale) {
                throw SurfaceDegenerate("constraint jacobian has rank " + std::to_string(stage) +
                                        ", expected " + std::to_string(codim));
            }
            work.row(stage).swap(work.row(best_row));
            for (int r = stage + 1; r < codim; ++r) {
                work.row(r) -= (work(r, best_col) / work(stage, best_col)) * work.row(stage);
            }
            taken[static_cast<std::size_t>(best_col)] = true;
            chosen.push_back(best_col);
        }
        std::sort(chosen.begin(), chosen.end());
        std::vector<int> split = chosen;
        for (int c = 0; c < n; ++c) {
            if (!taken[static_cast<std::size_t>(c)]) split.push_back(c);
        }
        return split;
    }

private:
    void validate_dimensions() const {
        detail::require(n_ > 0 && k_ > 0 && k_ < n_, "surface requires 0 < k < n");
    }

    void validate_split() const {
        detail::require(static_cast<int>(split_.size()) == n_, "split must list every coordinate");
        std::vector<int> sorted = split_;
        std::sort(sorted.begin(), sorted.end());
        for (int i = 0; i < n_; ++i) {
            detail::require(sorted[static_cast<std::size_t>(i)] == i, "split is not a permutation");
        }
    }

    void check_point(const Vector& q) const {
        detail::require(q.size() == n_, "configuration has dimension " + std::to_string(q.size()) +
                                            ", surface expects " + std::to_string(n_));
    }

    std::string name_;
    int n_;
    int k_;
    ValueFn value_;
    JacobianFn jacobian_;
    std::optional<HessianFn> hessians_;
    std::vector<int> split_;
    double tolerance_ = kDefaultTolerance;
};

/// L = 1/2 qdot^T m qdot with a constant symmetric positive-definite mass.
class QuadraticLagrangian {
public:
    explicit QuadraticLagrangian(Matrix mass) : mass_(std::move(mass)) {
        detail::require(mass_.rows() == mass_.cols() && mass_.rows() > 0, "mass matrix must be square");
        const double scale = std::max(1.0, mass_.cwiseAbs().maxCoeff());
        detail::require((mass_ - mass_.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
                        "mass matrix must be symmetric");
        llt_.compute(mass_);
        detail::require(llt_.info() == Eigen::Success, "mass matrix must be positive definite");
        inverse_ = llt_.solve(Matrix::Identity(mass_.rows(), mass_.cols()));
    }

    [[nodiscard]] static QuadraticLagrangian identity(int n) { return QuadraticLagrangian(Matrix::Identity(n, n)); }

    [[nodiscard]] int n() const noexcept { return static_cast<int>(mass_.rows()); }
    [[nodiscard]] const Matrix& mass() const noexcept { return mass_; }
    [[nodiscard]] const Matrix& inverse_mass() const noexcept { return inverse_; }

    [[nodiscard]] Vector momentum(const Vector& qdot) const { return mass_ * qdot; }
    [[nodiscard]] Vector velocity(const Vector& p) const { return llt_.solve(p); }
    [[nodiscard]] double value(const Vector& qdot) const { return 0.5 * qdot.dot(mass_ * qdot); }

private:
    Matrix mass_;
    Matrix inverse_;
    Eigen::LLT<Matrix> llt_;
};

struct PhasePoint {
    Vector q;
    Vector p;

    [[nodiscard]] int n() const noexcept { return static_cast<int>(q.size()); }

    /// Stacked (q, p) vector of length 2n.
    [[nodiscard]] Vector stacked() const {
        Vector z(q.size() + p.size());
        z << q, p;
        return z;
    }

    [[nodiscard]] static PhasePoint from_stacked(const Vector& z) {
        const auto n = z.size() / 2;
        return {z.head(n), z.tail(n)};
    }

    void validate(int expected_n) const {
        detail::require(q.size() == expected_n && p.size() == expected_n,
                        "phase point dimensions do not match n = " + std::to_string(expected_n));
        detail::require(q.allFinite() && p.allFinite(), "phase point has non-finite entries");
    }
};

[[nodiscard]] inline Vector legendre(const QuadraticLagrangian& lagrangian, const Vector& q, const Vector& qdot) {
    detail::require(q.size() == lagrangian.n() && qdot.size() == lagrangian.n(), "legendre: dimension mismatch");
    return lagrangian.momentum(qdot);
}

[[nodiscard]] inline Vector inverse_legendre(const QuadraticLagrangian& lagrangian, const Vector& q, const Vector& p) {
    detail::require(q.size() == lagrangian.n() && p.size() == lagrangian.n(),
                    "inverse_legendre: dimension mismatch");
    return lagrangian.velocity(p);
}

/// H = 1/2 p^T m^{-1} p. Multiplier terms are dropped: they vanish on the
/// constraint surface and do not contribute to Dirac-bracket evolution.
[[nodiscard]] inline double canonical_hamiltonian(const QuadraticLagrangian& lagrangian, const PhasePoint& point) {
    point.validate(lagrangian.n());
    return 0.5 * point.p.dot(lagrangian.velocity(point.p));
}

struct AdmissibilityReport {
    int rank = 0;
    int expected_rank = 0;
    double block_min_singular_value = 0.0;  // q^a block of the jacobian
    double kinetic_block_determinant = 0.0;  // det(G_a m^{-1} G_b^T)
    double kinetic_block_relative_min_singular_value = 0.0;
    bool surface_regular = false;
    bool lagrangian_admissible = false;

    [[nodiscard]] bool passed() const noexcept { return surface_regular && lagrangian_admissible; }
};

namespace detail {

[[nodiscard]] inline Matrix select_columns(const Matrix& m, const std::vector<int>& columns) {
    Matrix out(m.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out.col(static_cast<Eigen::Index>(i)) = m.col(columns[i]);
    }
    return out;
}

}  // namespace detail

inline constexpr double kRankTolerance = 1e-10;
inline constexpr double kAdmissibilityTolerance = 1e-10;

/// Non-throwing admissibility assessment; see check_admissibility.
[[nodiscard]] inline AdmissibilityReport assess_admissibility(const ConstraintSurface& surface,
                                                              const QuadraticLagrangian& lagrangian,
                                                              const Vector& q) {
    detail::require(lagrangian.n() == surface.n(), "lagrangian and surface dimensions differ");
    const Vector g = surface.value(q);
    detail::require(g.cwiseAbs().maxCoeff() < surface.tolerance(),
                    "point is off the surface: |G| = " + std::to_string(g.cwiseAbs().maxCoeff()));

    AdmissibilityReport report;
    report.expected_rank = surface.codim();
    const Matrix jac = surface.jacobian(q);

    const Eigen::JacobiSVD<Matrix> svd(jac);
    const Vector sv = svd.singularValues();
    const double threshold = kRankTolerance * std::max(1.0, sv.size() ? sv.maxCoeff() : 0.0);
    report.rank = static_cast<int>((sv.array() > threshold).count());

    const Matrix block = detail::select_columns(jac, surface.constraint_columns());
    const Vector block_sv = Eigen::JacobiSVD<Matrix>(block).singularValues();
    report.block_min_singular_value = block_sv.minCoeff();
    report.surface_regular = report.rank == report.expected_rank &&
                             report.block_min_singular_value > kRankTolerance * std::max(1.0, block_sv.maxCoeff());

    const Matrix kinetic = jac * lagrangian.inverse_mass() * jac.transpose();
    report.kinetic_block_determinant = kinetic.determinant();
    const Vector kinetic_sv = Eigen::JacobiSVD<Matrix>(kinetic).singularValues();
    report.kinetic_block_relative_min_singular_value =
        kinetic_sv.maxCoeff() > 0.0 ? kinetic_sv.minCoeff() / kinetic_sv.maxCoeff() : 0.0;
    report.lagrangian_admissible = report.kinetic_block_relative_min_singular_value > kAdmissibilityTolerance;
    return report;
}

/// Throws SurfaceDegenerate on a rank deficit (or a singular q^a block for the
/// surface's split) and LagrangianInadmissible when G m^{-1} G^T is singular.
inline AdmissibilityReport check_admissibility(const ConstraintSurface& surface,
                                               const QuadraticLagrangian& lagrangian, const Vector& q) {
    const AdmissibilityReport report = assess_admissibility(surface, lagrangian, q);
    if (!report.surface_regular) {
        throw SurfaceDegenerate("jacobian rank " + std::to_string(report.rank) + " (expected " +
                                std::to_string(report.expected_rank) + "), resolved-block min singular value " +
                                std::to_string(report.block_min_singular_value));
    }
    if (!report.lagrangian_admissible) {
        throw LagrangianInadmissible("constraint kinetic block is singular, relative min singular value " +
                                     std::to_string(report.kinetic_block_relative_min_singular_value));
    }
    return report;
}

}  // namespace cmech
