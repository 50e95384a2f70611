#pragma once

// Helpers shared by the unit tests: independent oracles and random instances.

#include <cmath>
#include <functional>
#include <stdexcept>

#include "nncrit/linalg.hpp"
#include "nncrit/random.hpp"

namespace testsupport {

using nncrit::Matrix;
using nncrit::Vector;

/// Gauss-Jordan inverse with partial pivoting, independent of Eigen's solvers.
inline Matrix gauss_jordan_inverse(Matrix a) {
    const Eigen::Index n = a.rows();
    Matrix inv = Matrix::Identity(n, n);
    for (Eigen::Index col = 0; col < n; ++col) {
        Eigen::Index piv = col;
        for (Eigen::Index r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (a(piv, col) == 0.0) throw std::runtime_error("singular");
        for (Eigen::Index c = 0; c < n; ++c) {
            std::swap(a(col, c), a(piv, c));
            std::swap(inv(col, c), inv(piv, c));
        }
        const double p = a(col, col);
        for (Eigen::Index c = 0; c < n; ++c) {
            a(col, c) /= p;
            inv(col, c) /= p;
        }
        for (Eigen::Index r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            if (f == 0.0) continue;
            for (Eigen::Index c = 0; c < n; ++c) {
                a(r, c) -= f * a(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    return inv;
}

inline Matrix random_matrix(Eigen::Index r, Eigen::Index c, nncrit::simlab::Rng& rng) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
    return m;
}

inline Vector random_vector(Eigen::Index n, nncrit::simlab::Rng& rng) { return random_matrix(n, 1, rng); }

/// A A'/n + I/2, well conditioned and SPD.
inline Matrix random_spd(Eigen::Index n, nncrit::simlab::Rng& rng) {
    const Matrix a = random_matrix(n, n, rng);
    return a * a.transpose() / static_cast<double>(n) + 0.5 * Matrix::Identity(n, n);
}

/// Central-difference gradient of f at x.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-6) {
    Vector g(x.size());
    Vector xp = x, xm = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + h;
        xm[i] = x[i] - h;
        g[i] = (f(xp) - f(xm)) / (2.0 * h);
        xp[i] = xm[i] = x[i];
    }
    return g;
}

/// Central-difference Jacobian of a vector function (rows: outputs).
inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x, double h = 1e-6) {
    const Vector f0 = f(x);
    Matrix j(f0.size(), x.size());
    Vector xp = x, xm = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + h;
        xm[i] = x[i] - h;
        j.col(i) = (f(xp) - f(xm)) / (2.0 * h);
        xp[i] = xm[i] = x[i];
    }
    return j;
}

/// max_i |a_i - b_i| / max(1, |a_i|, |b_i|)
inline double rel_err(const Matrix& a, const Matrix& b) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double x = a.data()[i], y = b.data()[i];
        worst = std::max(worst, std::abs(x - y) / std::max({1.0, std::abs(x), std::abs(y)}));
    }
    return worst;
}

}  // namespace testsupport
