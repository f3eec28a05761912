#pragma once

// Built-in constraint surfaces.

#include <string>
#include <string_view>

#include "cmech/manifold.hpp"

namespace cmech::surfaces {

/// Unit sphere q.q - 1 = 0 in R^n.
[[nodiscard]] inline ConstraintSurface sphere(int n, const Vector& reference) {
    return ConstraintSurface(
        "sphere", n, n - 1,
        [](const Vector& q) {
            Vector g(1);
            g[0] = q.squaredNorm() - 1.0;
            return g;
        },
        [](const Vector& q) -> Matrix { return 2.0 * q.transpose(); },
        [n](const Vector&) { return std::vector<Matrix>{2.0 * Matrix::Identity(n, n)}; }, reference);
}

[[nodiscard]] inline ConstraintSurface sphere(int n) { return sphere(n, Vector::Unit(n, 0)); }

/// Single affine constraint normal.q - offset = 0.
[[nodiscard]] inline ConstraintSurface hyperplane(const Vector& normal, double offset) {
    const int n = static_cast<int>(normal.size());
    Vector reference = Vector::Zero(n);
    return ConstraintSurface(
        "hyperplane", n, n - 1,
        [normal, offset](const Vector& q) {
            Vector g(1);
            g[0] = normal.dot(q) - offset;
            return g;
        },
        [normal](const Vector&) -> Matrix { return normal.transpose(); },
        [n](const Vector&) { return std::vector<Matrix>{Matrix::Zero(n, n)}; }, reference);
}

namespace detail {

// Pairs (a, b), a <= b, in the order (11),(12),(13),(22),(23),(33).
inline constexpr int kSo3Pairs[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};

[[nodiscard]] constexpr int flat(int row, int col) noexcept { return 3 * row + col; }

}  // namespace detail

/// Orthogonality constraints R^T R = 1 on row-major flattened 3x3 matrices:
/// G_(ab) = R_ka R_kb - delta_ab for a <= b.
[[nodiscard]] inline ConstraintSurface so3(const Vector& reference) {
    using detail::flat;
    using detail::kSo3Pairs;
    auto value = [](const Vector& q) {
        Vector g(6);
        for (int c = 0; c < 6; ++c) {
            const int a = kSo3Pairs[c][0];
            const int b = kSo3Pairs[c][1];
            double s = a == b ? -1.0 : 0.0;
            for (int k = 0; k < 3; ++k) s += q[flat(k, a)] * q[flat(k, b)];
            g[c] = s;
        }
        return g;
    };
    auto jacobian = [](const Vector& q) {
        Matrix jac = Matrix::Zero(6, 9);
        for (int c = 0; c < 6; ++c) {
            const int a = kSo3Pairs[c][0];
            const int b = kSo3Pairs[c][1];
            for (int k = 0; k < 3; ++k) {
                jac(c, flat(k, a)) += q[flat(k, b)];
                jac(c, flat(k, b)) += q[flat(k, a)];
            }
        }
        return jac;
    };
    auto hessians = [](const Vector&) {
        std::vector<Matrix> out(6, Matrix::Zero(9, 9));
        for (int c = 0; c < 6; ++c) {
            const int a = kSo3Pairs[c][0];
            const int b = kSo3Pairs[c][1];
            for (int k = 0; k < 3; ++k) {
                out[static_cast<std::size_t>(c)](flat(k, a), flat(k, b)) += 1.0;
                out[static_cast<std::size_t>(c)](flat(k, b), flat(k, a)) += 1.0;
            }
        }
        return out;
    };
    return ConstraintSurface("so3", 9, 3, value, jacobian, hessians, reference);
}

[[nodiscard]] inline Vector identity_rotation_flat() {
    Vector q = Vector::Zero(9);
    q[0] = q[4] = q[8] = 1.0;
    return q;
}

[[nodiscard]] inline ConstraintSurface so3() { return so3(identity_rotation_flat()); }

/// Name lookup used by the command line: "sphere" (dimension n) or "so3".
[[nodiscard]] inline ConstraintSurface by_name(std::string_view name, int n = 3) {
    if (name == "sphere") return sphere(n);
    if (name == "so3") return so3();
    throw ContractViolation("unknown surface '" + std::string(name) + "'");
}

}  // namespace cmech::surfaces
