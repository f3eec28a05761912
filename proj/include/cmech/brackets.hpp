#pragma once

// Tangent frame, noncanonical momenta pi_B = G_BA p_A, structure functions,
// the Dirac bracket and the reduced ("intermediate") Poisson structure on
// (q^A, pi_i).

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "cmech/manifold.hpp"

namespace cmech {

namespace detail {

[[nodiscard]] inline Eigen::FullPivLU<Matrix> resolved_block_lu(const ConstraintSurface& surface, const Matrix& jac) {
    const Matrix block = select_columns(jac, surface.constraint_columns());
    Eigen::FullPivLU<Matrix> lu(block);
    lu.setThreshold(kRankTolerance);
    if (!lu.isInvertible()) {
        throw SurfaceDegenerate("resolved-coordinate block of the constraint jacobian is singular");
    }
    return lu;
}

}  // namespace detail

/// Rows G_i spanning the tangent space: unit entry in tangent column i, zeros
/// in the other tangent columns, and G_ia = -(B^{-1} G_{.,c_i})_a in the
/// resolved columns, where B is the resolved block of the jacobian.
[[nodiscard]] inline Matrix tangent_basis(const ConstraintSurface& surface, const Vector& q) {
    const Matrix jac = surface.jacobian(q);
    const auto lu = detail::resolved_block_lu(surface, jac);
    const auto resolved = surface.constraint_columns();
    const auto tangent = surface.tangent_columns();
    const Matrix rhs = detail::select_columns(jac, tangent);
    const Matrix x = -lu.solve(rhs);  // codim x k

    Matrix rows = Matrix::Zero(surface.k(), surface.n());
    for (int i = 0; i < surface.k(); ++i) {
        rows(i, tangent[static_cast<std::size_t>(i)]) = 1.0;
        for (int a = 0; a < surface.codim(); ++a) {
            rows(i, resolved[static_cast<std::size_t>(a)]) = x(a, i);
        }
    }
    return rows;
}

struct FramePoint {
    Vector q;
    Matrix G;      // rows: constraint gradients G_b, then tangent rows G_j
    Matrix G_inv;  // G~ = G^{-1}
    int codim = 0;

    [[nodiscard]] int n() const noexcept { return static_cast<int>(q.size()); }
    [[nodiscard]] int k() const noexcept { return n() - codim; }
    [[nodiscard]] Matrix tangent_rows() const { return G.bottomRows(k()); }
};

[[nodiscard]] inline FramePoint frame(const ConstraintSurface& surface, const Vector& q) {
    FramePoint f;
    f.q = q;
    f.codim = surface.codim();
    f.G.resize(surface.n(), surface.n());
    f.G << surface.jacobian(q), tangent_basis(surface, q);
    Eigen::FullPivLU<Matrix> lu(f.G);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) {
        throw FrameSingular("frame matrix is numerically singular");
    }
    f.G_inv = lu.inverse();
    return f;
}

[[nodiscard]] inline Vector to_noncanonical(const FramePoint& f, const Vector& p) {
    detail::require(p.size() == f.n(), "to_noncanonical: dimension mismatch");
    return f.G * p;
}

[[nodiscard]] inline Vector from_noncanonical(const FramePoint& f, const Vector& pi) {
    detail::require(pi.size() == f.n(), "from_noncanonical: dimension mismatch");
    return f.G_inv * pi;
}

/// d G_BA / dq^E for every E, from the constraint second derivatives. Tangent
/// rows differentiate through the block solve: d(G_i)_a = -B^{-1} (dJ G_i^T)_a.
[[nodiscard]] inline std::vector<Matrix> frame_derivatives(const ConstraintSurface& surface, const Vector& q) {
    const int n = surface.n();
    const int m = surface.codim();
    const Matrix jac = surface.jacobian(q);
    const auto lu = detail::resolved_block_lu(surface, jac);
    const Matrix tangent = tangent_basis(surface, q);
    const auto hessians = surface.second_derivatives(q);
    const auto resolved = surface.constraint_columns();

    std::vector<Matrix> out(static_cast<std::size_t>(n), Matrix::Zero(n, n));
    for (int e = 0; e < n; ++e) {
        Matrix djac(m, n);
        for (int a = 0; a < m; ++a) djac.row(a) = hessians[static_cast<std::size_t>(a)].row(e);
        Matrix& d = out[static_cast<std::size_t>(e)];
        d.topRows(m) = djac;
        const Matrix dx = -lu.solve(djac * tangent.transpose());  // m x k
        for (int i = 0; i < surface.k(); ++i) {
            for (int a = 0; a < m; ++a) {
                d(m + i, resolved[static_cast<std::size_t>(a)]) = dx(a, i);
            }
        }
    }
    return out;
}

/// c_AB^D = G_AE d_E G_BD - G_BE d_E G_AD (A, B frame indices, D coordinate).
class StructureFunctions {
public:
    StructureFunctions() = default;
    explicit StructureFunctions(int n) : n_(n), data_(static_cast<std::size_t>(n * n * n), 0.0) {}

    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] double operator()(int a, int b, int d) const { return data_[index(a, b, d)]; }
    double& operator()(int a, int b, int d) { return data_[index(a, b, d)]; }

    [[nodiscard]] double max_abs() const {
        double out = 0.0;
        for (double v : data_) out = std::max(out, std::abs(v));
        return out;
    }

private:
    [[nodiscard]] std::size_t index(int a, int b, int d) const {
        return static_cast<std::size_t>((a * n_ + b) * n_ + d);
    }

    int n_ = 0;
    std::vector<double> data_;
};

[[nodiscard]] inline StructureFunctions structure_functions(const ConstraintSurface& surface, const Vector& q) {
    const int n = surface.n();
    const Matrix g = frame(surface, q).G;
    const auto dg = frame_derivatives(surface, q);

    // w[A](B, D) = G_AE d_E G_BD
    std::vector<Matrix> w(static_cast<std::size_t>(n), Matrix::Zero(n, n));
    for (int a = 0; a < n; ++a) {
        for (int e = 0; e < n; ++e) {
            if (g(a, e) != 0.0) w[static_cast<std::size_t>(a)] += g(a, e) * dg[static_cast<std::size_t>(e)];
        }
    }
    StructureFunctions c(n);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            for (int d = 0; d < n; ++d) {
                c(a, b, d) = w[static_cast<std::size_t>(a)](b, d) - w[static_cast<std::size_t>(b)](a, d);
            }
        }
    }
    return c;
}

/// Largest |c_ij^k| over tangent frame indices i, j and tangent columns k.
[[nodiscard]] inline double max_tangent_structure_function(const ConstraintSurface& surface,
                                                           const StructureFunctions& c) {
    double out = 0.0;
    const int m = surface.codim();
    for (int i = 0; i < surface.k(); ++i) {
        for (int j = 0; j < surface.k(); ++j) {
            for (int col : surface.tangent_columns()) out = std::max(out, std::abs(c(m + i, m + j, col)));
        }
    }
    return out;
}

struct NoncanonicalPoint {
    Vector q;
    Vector pi;  // (pi_a, pi_i)
};

/// Dense table of fundamental brackets, indexed (q^0..q^{n-1}, pi_0..pi_{n-1}).
struct BracketTable {
    int n = 0;
    Matrix values;

    [[nodiscard]] double q_q(int a, int b) const { return values(a, b); }
    [[nodiscard]] double q_pi(int a, int b) const { return values(a, n + b); }
    [[nodiscard]] double pi_pi(int a, int b) const { return values(n + a, n + b); }
};

[[nodiscard]] inline BracketTable noncanonical_poisson(const ConstraintSurface& surface, const Vector& q,
                                                       const Vector& pi) {
    const int n = surface.n();
    detail::require(pi.size() == n, "noncanonical_poisson: momentum dimension mismatch");
    const FramePoint f = frame(surface, q);
    const StructureFunctions c = structure_functions(surface, q);
    const Vector p = f.G_inv * pi;

    BracketTable table{n, Matrix::Zero(2 * n, 2 * n)};
    table.values.topRightCorner(n, n) = f.G.transpose();
    table.values.bottomLeftCorner(n, n) = -f.G;
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            double s = 0.0;
            for (int d = 0; d < n; ++d) s += c(a, b, d) * p[d];
            table.values(n + a, n + b) = -s;
        }
    }
    return table;
}

/// Phi_a = G_aB(q) (m^{-1} p)^B.
[[nodiscard]] inline Vector tertiary_constraints(const ConstraintSurface& surface,
                                                 const QuadraticLagrangian& lagrangian, const PhasePoint& point) {
    point.validate(surface.n());
    return surface.jacobian(point.q) * lagrangian.velocity(point.p);
}

/// The unique pi_a for which Phi(q, G~ pi) = 0 given the tangent momenta pi_i.
[[nodiscard]] inline Vector solve_pi_alpha(const ConstraintSurface& surface, const QuadraticLagrangian& lagrangian,
                                           const FramePoint& f, const Vector& pi_tangent) {
    const int m = surface.codim();
    detail::require(pi_tangent.size() == surface.k(), "solve_pi_alpha: expected k tangent momenta");
    const Matrix jm = f.G.topRows(m) * lagrangian.inverse_mass();
    const Matrix a = jm * f.G_inv.leftCols(m);
    const Vector rhs = -(jm * (f.G_inv.rightCols(surface.k()) * pi_tangent));
    const Vector sv = Eigen::JacobiSVD<Matrix>(a).singularValues();
    if (sv.minCoeff() <= kAdmissibilityTolerance * sv.maxCoeff()) {
        throw LagrangianInadmissible("tertiary constraints cannot be resolved for pi_a");
    }
    return a.fullPivLu().solve(rhs);
}

[[nodiscard]] inline Vector solve_pi_alpha(const ConstraintSurface& surface, const QuadraticLagrangian& lagrangian,
                                           const Vector& q, const Vector& pi_tangent) {
    return solve_pi_alpha(surface, lagrangian, frame(surface, q), pi_tangent);
}

/// Full noncanonical momentum (pi_a, pi_i) on the tertiary constraint set.
[[nodiscard]] inline Vector complete_momentum(const ConstraintSurface& surface, const QuadraticLagrangian& lagrangian,
                                              const FramePoint& f, const Vector& pi_tangent) {
    Vector pi(surface.n());
    pi << solve_pi_alpha(surface, lagrangian, f, pi_tangent), pi_tangent;
    return pi;
}

// --- Observables and the Dirac bracket -------------------------------------

/// Phase-space function with an optional analytic gradient (length 2n,
/// d/dq then d/dp). Missing gradients fall back to central differences.
struct Observable {
    std::string label;
    std::function<double(const PhasePoint&)> value;
    std::function<Vector(const PhasePoint&)> gradient;
};

[[nodiscard]] inline Vector gradient_of(const Observable& f, const PhasePoint& point) {
    if (f.gradient) return f.gradient(point);
    const Vector z = point.stacked();
    const double h = fd_step(z);
    Vector grad(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        Vector plus = z;
        Vector minus = z;
        plus[i] += h;
        minus[i] -= h;
        grad[i] = (f.value(PhasePoint::from_stacked(plus)) - f.value(PhasePoint::from_stacked(minus))) / (2.0 * h);
    }
    return grad;
}

/// {f, g} = df/dq . dg/dp - df/dp . dg/dq from stacked gradients.
[[nodiscard]] inline double canonical_bracket(const Vector& grad_f, const Vector& grad_g) {
    const auto n = grad_f.size() / 2;
    return grad_f.head(n).dot(grad_g.tail(n)) - grad_f.tail(n).dot(grad_g.head(n));
}

[[nodiscard]] inline double canonical_bracket(const Observable& f, const Observable& g, const PhasePoint& point) {
    return canonical_bracket(gradient_of(f, point), gradient_of(g, point));
}

namespace observables {

[[nodiscard]] inline Observable coordinate(int n, int a) {
    return {"q" + std::to_string(a), [a](const PhasePoint& z) { return z.q[a]; },
            [n, a](const PhasePoint&) {
                Vector g = Vector::Zero(2 * n);
                g[a] = 1.0;
                return g;
            }};
}

[[nodiscard]] inline Observable canonical_momentum(int n, int a) {
    return {"p" + std::to_string(a), [a](const PhasePoint& z) { return z.p[a]; },
            [n, a](const PhasePoint&) {
                Vector g = Vector::Zero(2 * n);
                g[n + a] = 1.0;
                return g;
            }};
}

/// pi_B(q, p) = G_BA(q) p_A.
[[nodiscard]] inline Observable noncanonical_momentum(const ConstraintSurface& surface, int b) {
    return {"pi" + std::to_string(b),
            [surface, b](const PhasePoint& z) { return frame(surface, z.q).G.row(b).dot(z.p); },
            [surface, b](const PhasePoint& z) {
                const int n = surface.n();
                const auto dg = frame_derivatives(surface, z.q);
                Vector g(2 * n);
                for (int e = 0; e < n; ++e) g[e] = dg[static_cast<std::size_t>(e)].row(b).dot(z.p);
                g.tail(n) = frame(surface, z.q).G.row(b).transpose();
                return g;
            }};
}

[[nodiscard]] inline Observable constraint(const ConstraintSurface& surface, int a) {
    return {"G" + std::to_string(a), [surface, a](const PhasePoint& z) { return surface.value(z.q)[a]; },
            [surface, a](const PhasePoint& z) {
                const int n = surface.n();
                Vector g = Vector::Zero(2 * n);
                g.head(n) = surface.jacobian(z.q).row(a).transpose();
                return g;
            }};
}

[[nodiscard]] inline Observable tertiary(const ConstraintSurface& surface, const QuadraticLagrangian& lagrangian,
                                         int a) {
    return {"Phi" + std::to_string(a),
            [surface, lagrangian, a](const PhasePoint& z) {
                return surface.jacobian(z.q).row(a).dot(lagrangian.velocity(z.p));
            },
            [surface, lagrangian, a](const PhasePoint& z) {
                const int n = surface.n();
                const Vector v = lagrangian.velocity(z.p);
                Vector g(2 * n);
                g.head(n) = surface.second_derivatives(z.q)[static_cast<std::size_t>(a)] * v;
                g.tail(n) = lagrangian.inverse_mass() * surface.jacobian(z.q).row(a).transpose();
                return g;
            }};
}

}  // namespace observables

inline constexpr double kOnConstraintTolerance = 1e-6;

/// Dirac bracket machinery at one on-constraint point: constraint gradients
/// T = (G_a, Phi_b) and the inverse of Delta_ij = {T_i, T_j}.
class DiracStructure {
public:
    DiracStructure(const ConstraintSurface& surface, const QuadraticLagrangian& lagrangian, const PhasePoint& point)
        : point_(point) {
        point.validate(surface.n());
        const int n = surface.n();
        const int m = surface.codim();
        const Vector g = surface.value(point.q);
        const Vector phi = tertiary_constraints(surface, lagrangian, point);
        if (g.cwiseAbs().maxCoeff() > kOnConstraintTolerance || phi.cwiseAbs().maxCoeff() > kOnConstraintTolerance) {
            throw ContractViolation("dirac bracket requested off the constraint set: |G| = " +
                                    std::to_string(g.cwiseAbs().maxCoeff()) +
                                    ", |Phi| = " + std::to_string(phi.cwiseAbs().maxCoeff()));
        }
        const Matrix jac = surface.jacobian(point.q);
        const auto hessians = surface.second_derivatives(point.q);
        const Vector v = lagrangian.velocity(point.p);

        constraint_gradients_ = Matrix::Zero(2 * m, 2 * n);
        constraint_gradients_.block(0, 0, m, n) = jac;
        for (int a = 0; a < m; ++a) {
            constraint_gradients_.block(m + a, 0, 1, n) = (hessians[static_cast<std::size_t>(a)] * v).transpose();
        }
        constraint_gradients_.block(m, n, m, n) = jac * lagrangian.inverse_mass();

        const Matrix tq = constraint_gradients_.leftCols(n);
        const Matrix tp = constraint_gradients_.rightCols(n);
        delta_ = tq * tp.transpose() - tp * tq.transpose();

        const Vector sv = Eigen::JacobiSVD<Matrix>(delta_).singularValues();
        condition_ = sv.minCoeff() > 0.0 ? sv.maxCoeff() / sv.minCoeff() : std::numeric_limits<double>::infinity();
        if (!(sv.minCoeff() > 1e-12 * sv.maxCoeff())) {
            throw ConstraintsNotSecondClass("constraint bracket matrix is singular, condition " +
                                            std::to_string(condition_));
        }
        qr_.compute(delta_);
    }

    [[nodiscard]] const Matrix& delta() const noexcept { return delta_; }
    [[nodiscard]] double condition_number() const noexcept { return condition_; }
    [[nodiscard]] const PhasePoint& point() const noexcept { return point_; }

    [[nodiscard]] double bracket(const Vector& grad_f, const Vector& grad_g) const {
        Vector f_t(constraint_gradients_.rows());
        Vector t_g(constraint_gradients_.rows());
        for (Eigen::Index i = 0; i < constraint_gradients_.rows(); ++i) {
            const Vector t = constraint_gradients_.row(i).transpose();
            f_t[i] = canonical_bracket(grad_f, t);
            t_g[i] = canonical_bracket(t, grad_g);
        }
        return canonical_bracket(grad_f, grad_g) - f_t.dot(qr_.solve(t_g));
    }

    [[nodiscard]] double bracket(const Observable& f, const Observable& g) const {
        return bracket(gradient_of(f, point_), gradient_of(g, point_));
    }

private:
    PhasePoint point_;
    Matrix constraint_gradients_;
    Matrix delta_;
    Eigen::ColPivHouseholderQR<Matrix> qr_;
    double condition_ = 0.0;
};

[[nodiscard]] inline double dirac_bracket(const ConstraintSurface& surface, const QuadraticLagrangian& lagrangian,
                                          const Observable& f, const Observable& g, const PhasePoint& point) {
    return DiracStructure(surface, lagrangian, point).bracket(f, g);
}

/// Reduced structure on (q^0..q^{n-1}, pi_0..pi_{k-1}).
struct ReducedBracketTable {
    int n = 0;
    int k = 0;
    Matrix values;
    Vector pi_alpha;  // solved resolved momenta at this point

    [[nodiscard]] double q_pi(int a, int i) const { return values(a, n + i); }
    [[nodiscard]] double pi_pi(int i, int j) const { return values(n + i, n + j); }
};

/// {q^A, pi_i} = G_iA, {pi_i, pi_j} = -c_ij^a [G~_ak pi_k + G~_ab pi_b(q, pi_i)],
/// with the sum over resolved coordinate columns a.
[[nodiscard]] inline ReducedBracketTable intermediate_bracket(const ConstraintSurface& surface,
                                                              const QuadraticLagrangian& lagrangian, const Vector& q,
                                                              const Vector& pi_tangent) {
    const int n = surface.n();
    const int k = surface.k();
    const int m = surface.codim();
    const FramePoint f = frame(surface, q);
    const Vector pi = complete_momentum(surface, lagrangian, f, pi_tangent);
    const Vector p = f.G_inv * pi;
    const StructureFunctions c = structure_functions(surface, q);

    ReducedBracketTable table{n, k, Matrix::Zero(n + k, n + k), pi.head(m)};
    for (int i = 0; i < k; ++i) {
        for (int a = 0; a < n; ++a) {
            table.values(a, n + i) = f.G(m + i, a);
            table.values(n + i, a) = -f.G(m + i, a);
        }
    }
    const auto resolved = surface.constraint_columns();
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            double s = 0.0;
            for (int col : resolved) s += c(m + i, m + j, col) * p[col];
            table.values(n + i, n + j) = -s;
        }
    }
    return table;
}

}  // namespace cmech
