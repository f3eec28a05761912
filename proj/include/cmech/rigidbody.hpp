#pragma once

// Free rigid body on SO(3): inertia <-> mass-matrix dictionary, the Chetaev
// bracket, Euler-Poisson right-hand side and the canonical-to-body momentum map.
// Conventions: eps_123 = +1, R row-major with rows a, b, c, Omega = I^{-1} M.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string>

#include "cmech/manifold.hpp"

namespace cmech::rigid {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

[[nodiscard]] constexpr double levi_civita(int i, int j, int k) noexcept {
    return static_cast<double>((i - j) * (j - k) * (k - i)) / 2.0;
}

/// hat(w) v = w x v.
[[nodiscard]] inline Mat3 hat(const Vec3& w) {
    Mat3 out;
    out << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
    return out;
}

inline constexpr double kDegenerateMass = 1e-12;

/// 2 g_1 = I_2 + I_3 - I_1 and cyclic.
[[nodiscard]] inline Vec3 mass_from_inertia(const Vec3& inertia) {
    const Vec3 g(0.5 * (inertia[1] + inertia[2] - inertia[0]), 0.5 * (inertia[0] + inertia[2] - inertia[1]),
                 0.5 * (inertia[0] + inertia[1] - inertia[2]));
    for (int a = 0; a < 3; ++a) {
        if (!(g[a] > kDegenerateMass)) {
            throw DegenerateBody("inertia (" + std::to_string(inertia[0]) + ", " + std::to_string(inertia[1]) + ", " +
                                 std::to_string(inertia[2]) + ") violates the strict triangle inequality: g" +
                                 std::to_string(a + 1) + " = " + std::to_string(g[a]));
        }
    }
    return g;
}

/// I_1 = g_2 + g_3 and cyclic.
[[nodiscard]] inline Vec3 inertia_from_mass(const Vec3& g) {
    for (int a = 0; a < 3; ++a) {
        if (!(g[a] > kDegenerateMass)) {
            throw DegenerateBody("mass parameter g" + std::to_string(a + 1) + " must be positive");
        }
    }
    return {g[1] + g[2], g[0] + g[2], g[0] + g[1]};
}

class InertiaTensor {
public:
    explicit InertiaTensor(const Vec3& moments) : moments_(moments), mass_(mass_from_inertia(moments)) {
        for (int a = 0; a < 3; ++a) {
            if (!(moments[a] > 0.0)) throw DegenerateBody("principal moments must be positive");
        }
    }
    InertiaTensor(double i1, double i2, double i3) : InertiaTensor(Vec3(i1, i2, i3)) {}

    [[nodiscard]] const Vec3& moments() const noexcept { return moments_; }
    [[nodiscard]] const Vec3& mass() const noexcept { return mass_; }
    [[nodiscard]] Vec3 angular_velocity(const Vec3& m) const { return m.cwiseQuotient(moments_); }

private:
    Vec3 moments_;
    Vec3 mass_;
};

inline constexpr double kOrthogonalityTolerance = 1e-9;

[[nodiscard]] inline double orthogonality_defect(const Mat3& r) {
    return (r.transpose() * r - Mat3::Identity()).cwiseAbs().rowwise().sum().maxCoeff();
}

/// Validated proper rotation; used for initial conditions.
class RotationMatrix {
public:
    RotationMatrix() : r_(Mat3::Identity()) {}
    explicit RotationMatrix(const Mat3& r) : r_(r) {
        detail::require(r.allFinite(), "rotation has non-finite entries");
        detail::require(orthogonality_defect(r) <= kOrthogonalityTolerance,
                        "rotation is not orthogonal: |R^T R - 1| = " + std::to_string(orthogonality_defect(r)));
        detail::require(r.determinant() > 0.0, "rotation has negative determinant");
    }

    [[nodiscard]] const Mat3& matrix() const noexcept { return r_; }
    [[nodiscard]] Vec3 a() const { return r_.row(0).transpose(); }
    [[nodiscard]] Vec3 b() const { return r_.row(1).transpose(); }
    [[nodiscard]] Vec3 c() const { return r_.row(2).transpose(); }

private:
    Mat3 r_;
};

/// R is stored unchecked so integrators can report drift instead of failing.
struct RigidBodyState {
    Mat3 R = Mat3::Identity();
    Vec3 M = Vec3::Zero();

    RigidBodyState() = default;
    RigidBodyState(const Mat3& r, const Vec3& m) : R(r), M(m) {}
    RigidBodyState(const RotationMatrix& r, const Vec3& m) : R(r.matrix()), M(m) {}

    [[nodiscard]] bool finite() const { return R.allFinite() && M.allFinite(); }
};

[[nodiscard]] inline double h0(const InertiaTensor& inertia, const Vec3& m) {
    return 0.5 * m.dot(inertia.angular_velocity(m));
}

/// Phase coordinates of the reduced rigid body: R_ij (row-major, ids 0..8)
/// followed by M_1..M_3 (ids 9..11).
struct Coordinate {
    enum class Kind { R, M };
    Kind kind;
    int i;
    int j;

    [[nodiscard]] static constexpr Coordinate rot(int row, int col) noexcept { return {Kind::R, row, col}; }
    [[nodiscard]] static constexpr Coordinate mom(int index) noexcept { return {Kind::M, index, 0}; }

    [[nodiscard]] static constexpr Coordinate from_id(int id) noexcept {
        return id < 9 ? rot(id / 3, id % 3) : mom(id - 9);
    }
    [[nodiscard]] constexpr int id() const noexcept { return kind == Kind::R ? 3 * i + j : 9 + i; }

    [[nodiscard]] std::string label() const {
        return kind == Kind::R ? "R" + std::to_string(i + 1) + std::to_string(j + 1) : "M" + std::to_string(i + 1);
    }
};

inline constexpr int kPhaseDimension = 12;

[[nodiscard]] inline Eigen::Matrix<double, 12, 1> to_phase_vector(const RigidBodyState& s) {
    Eigen::Matrix<double, 12, 1> z;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) z[3 * i + j] = s.R(i, j);
    z.tail<3>() = s.M;
    return z;
}

[[nodiscard]] inline RigidBodyState from_phase_vector(const Eigen::Matrix<double, 12, 1>& z) {
    RigidBodyState s;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s.R(i, j) = z[3 * i + j];
    s.M = z.tail<3>();
    return s;
}

namespace detail {

// {M_i, M_j} = -eps_ijk mv_k, {M_i, R_jk} = -eps_ikm rv_jm.
[[nodiscard]] inline double bracket_from(const Coordinate& x, const Coordinate& y, const Vec3& mv, const Mat3& rv) {
    using Kind = Coordinate::Kind;
    if (x.kind == Kind::R && y.kind == Kind::R) return 0.0;
    if (x.kind == Kind::M && y.kind == Kind::M) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s -= levi_civita(x.i, y.i, k) * mv[k];
        return s;
    }
    const bool flipped = x.kind == Kind::R;
    const Coordinate& m = flipped ? y : x;
    const Coordinate& r = flipped ? x : y;
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s -= levi_civita(m.i, r.j, k) * rv(r.i, k);
    return flipped ? -s : s;
}

}  // namespace detail

/// Chetaev bracket with the orthogonality constraint used on the right-hand side.
[[nodiscard]] inline double chetaev_bracket(const Coordinate& x, const Coordinate& y, const RigidBodyState& s) {
    return detail::bracket_from(x, y, s.M, s.R);
}

/// Bracket before simplification on R^T R = 1: M -> (R^T R)^{-1} M and R -> R^{-T}.
[[nodiscard]] inline double full_bracket(const Coordinate& x, const Coordinate& y, const RigidBodyState& s) {
    const Mat3 gram = s.R.transpose() * s.R;
    Eigen::FullPivLU<Mat3> lu(gram);
    cmech::detail::require(lu.isInvertible(), "full_bracket: R^T R is singular");
    return detail::bracket_from(x, y, lu.solve(s.M), s.R.inverse().transpose());
}

using PoissonTensor = Eigen::Matrix<double, 12, 12>;

[[nodiscard]] inline PoissonTensor chetaev_tensor(const RigidBodyState& s) {
    PoissonTensor p;
    for (int a = 0; a < 12; ++a)
        for (int b = 0; b < 12; ++b) p(a, b) = chetaev_bracket(Coordinate::from_id(a), Coordinate::from_id(b), s);
    return p;
}

/// Largest |{x,{y,z}} + {y,{z,x}} + {z,{x,y}}| over coordinate triples. The
/// Chetaev tensor is linear in (R, M), so d/dz_l P equals P(e_l) exactly.
[[nodiscard]] inline double chetaev_jacobi_residual(const RigidBodyState& s) {
    const PoissonTensor p = chetaev_tensor(s);
    std::array<PoissonTensor, 12> dp;
    for (int l = 0; l < 12; ++l) {
        Eigen::Matrix<double, 12, 1> e = Eigen::Matrix<double, 12, 1>::Zero();
        e[l] = 1.0;
        dp[static_cast<std::size_t>(l)] = chetaev_tensor(from_phase_vector(e));
    }
    double worst = 0.0;
    for (int x = 0; x < 12; ++x) {
        for (int y = 0; y < 12; ++y) {
            for (int z = 0; z < 12; ++z) {
                double sum = 0.0;
                for (int l = 0; l < 12; ++l) {
                    const auto& d = dp[static_cast<std::size_t>(l)];
                    sum += p(x, l) * d(y, z) + p(y, l) * d(z, x) + p(z, l) * d(x, y);
                }
                worst = std::max(worst, std::abs(sum));
            }
        }
    }
    return worst;
}

struct StateRate {
    Mat3 R_dot;
    Vec3 M_dot;
};

/// R_dot_ij = -eps_jkm Omega_k R_im (i.e. R hat(Omega)), M_dot = M x Omega.
[[nodiscard]] inline StateRate euler_poisson_rhs(const InertiaTensor& inertia, const RigidBodyState& s) {
    const Vec3 omega = inertia.angular_velocity(s.M);
    return {s.R * hat(omega), s.M.cross(omega)};
}

/// s = R M, the angular momentum in the space frame.
[[nodiscard]] inline Vec3 spatial_momentum(const RigidBodyState& s) { return s.R * s.M; }

/// Diagonal mass matrix of L = 1/2 g_ij Rdot_ki Rdot_kj on row-major R:
/// entry for R_ki is g_i.
[[nodiscard]] inline Matrix so3_mass_matrix(const Vec3& g) {
    Matrix m = Matrix::Zero(9, 9);
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i) m(3 * k + i, 3 * k + i) = g[i];
    return m;
}

[[nodiscard]] inline QuadraticLagrangian so3_lagrangian(const InertiaTensor& inertia) {
    return QuadraticLagrangian(so3_mass_matrix(inertia.mass()));
}

[[nodiscard]] inline Vector flatten(const Mat3& r) {
    Vector q(9);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) q[3 * i + j] = r(i, j);
    return q;
}

[[nodiscard]] inline Mat3 unflatten(const Vector& q) {
    cmech::detail::require(q.size() == 9, "expected 9 entries for a 3x3 matrix");
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = q[3 * i + j];
    return r;
}

struct BodyMomentum {
    Vec3 M;               // -eps_nij (R^T p)_ij
    Mat3 omega_hat;       // -1/2 [R^T p g^{-1} - (.)^T]
    Mat3 symmetric_part;  // 1/2 [R^T p g^{-1} + (.)^T], vanishes on-shell
    Vec3 M_from_velocity; // I * Omega with Omega_k = 1/2 eps_kij omega_hat_ij
};

/// Body angular momentum from canonical (R, p). M uses the momentum-map form,
/// whose canonical brackets close as {M_i, M_j} = -eps_ijk M_k everywhere; the
/// velocity route I*Omega agrees with it only where the symmetric part vanishes.
[[nodiscard]] inline BodyMomentum body_momentum_from_canonical(const Mat3& r, const Mat3& p, const Vec3& g) {
    const Mat3 rtp = r.transpose() * p;
    const Mat3 y = rtp * g.cwiseInverse().asDiagonal();
    BodyMomentum out;
    out.omega_hat = -0.5 * (y - y.transpose());
    out.symmetric_part = 0.5 * (y + y.transpose());
    const Vec3 inertia = inertia_from_mass(g);
    Vec3 omega = Vec3::Zero();
    for (int n = 0; n < 3; ++n) {
        double m = 0.0;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const double e = levi_civita(n, i, j);
                m -= e * rtp(i, j);
                omega[n] += 0.5 * e * out.omega_hat(i, j);
            }
        }
        out.M[n] = m;
    }
    out.M_from_velocity = inertia.cwiseProduct(omega);
    return out;
}

/// Polar projection onto the nearest rotation. Never applied implicitly.
[[nodiscard]] inline Mat3 nearest_rotation(const Mat3& r) {
    Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 u = svd.matrixU();
    const Mat3 v = svd.matrixV();
    if ((u * v.transpose()).determinant() < 0.0) u.col(2) = -u.col(2);
    return u * v.transpose();
}

}  // namespace cmech::rigid
