#pragma once

// Seeded random points used by property checks and the verify suites.

#include <Eigen/Dense>

#include <random>

#include "cmech/manifold.hpp"

namespace cmech::sampling {

using Rng = std::mt19937_64;

[[nodiscard]] inline Vector gaussian(Rng& rng, int n) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = dist(rng);
    return v;
}

[[nodiscard]] inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Gaussian sample projected radially onto the unit sphere.
[[nodiscard]] inline Vector sphere_point(Rng& rng, int n) {
    Vector v = gaussian(rng, n);
    while (v.norm() < 1e-3) v = gaussian(rng, n);
    return v.normalized();
}

/// Proper rotation from the QR factor of a Gaussian matrix.
[[nodiscard]] inline Eigen::Matrix3d rotation(Rng& rng) {
    const Vector v = gaussian(rng, 9);
    const Eigen::Matrix3d a = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(v.data());
    Eigen::HouseholderQR<Eigen::Matrix3d> qr(a);
    Eigen::Matrix3d q = qr.householderQ();
    const Eigen::Matrix3d r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < 3; ++i) {
        if (r(i, i) < 0.0) q.col(i) = -q.col(i);
    }
    if (q.determinant() < 0.0) q.col(0) = -q.col(0);
    return q;
}

/// Random symmetric positive-definite matrix with eigenvalues in [lo, hi].
[[nodiscard]] inline Matrix spd_matrix(Rng& rng, int n, double lo = 0.5, double hi = 3.0) {
    const Vector v = gaussian(rng, n * n);
    const Matrix a = Eigen::Map<const Matrix>(v.data(), n, n);
    const Matrix q = Eigen::HouseholderQR<Matrix>(a).householderQ();
    Vector eig(n);
    for (int i = 0; i < n; ++i) eig[i] = uniform(rng, lo, hi);
    const Matrix m = q * eig.asDiagonal() * q.transpose();
    return 0.5 * (m + m.transpose());
}

}  // namespace cmech::sampling
