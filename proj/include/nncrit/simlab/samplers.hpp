#pragma once

// Synthetic data generators for the experiments. Every sampler draws from
// the Rng it is handed and nothing else.

#include <cmath>
#include <numbers>

#include "nncrit/error.hpp"
#include "nncrit/linalg.hpp"
#include "nncrit/random.hpp"

namespace nncrit::simlab {

/// (1-eps) N(0,1) + eps N(0,10); the second component has variance 10.
inline Matrix sample_contaminated_gaussian(Eigen::Index n, double eps, Rng& rng) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw DomainError("contaminated gaussian: eps must lie in [0,1]");
    const double wide = std::sqrt(10.0);
    Matrix x(n, 1);
    for (Eigen::Index t = 0; t < n; ++t) {
        const bool outlier = rng.uniform() < eps;
        x(t, 0) = outlier ? wide * rng.normal() : rng.normal();
    }
    return x;
}

inline double contaminated_gaussian_density(double x, double eps) {
    const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    return (1.0 - eps) * c * std::exp(-0.5 * x * x) + eps * c / std::sqrt(10.0) * std::exp(-0.05 * x * x);
}

inline Matrix sample_mvn(const Matrix& sigma, Eigen::Index n, Rng& rng) {
    const Matrix l = linalg::cholesky(sigma).matrixL();
    const Eigen::Index d = sigma.rows();
    Matrix z(n, d);
    for (Eigen::Index t = 0; t < n; ++t)
        for (Eigen::Index i = 0; i < d; ++i) z(t, i) = rng.normal();
    return z * l.transpose();
}

/// Standard normal conditioned on z > a.
inline double truncated_standard_normal(double a, Rng& rng) {
    if (a < 0.5) {
        for (;;) {
            const double z = rng.normal();
            if (z > a) return z;
        }
    }
    // Exponential proposal with the optimal rate.
    const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
    for (;;) {
        const double z = a + rng.exponential(1.0 / alpha);
        if (std::log(rng.uniform_open()) <= -0.5 * (z - alpha) * (z - alpha)) return z;
    }
}

struct TruncationStats {
    std::size_t proposals = 0;
    std::size_t accepted = 0;
    bool used_gibbs = false;
    double acceptance_rate() const { return proposals ? static_cast<double>(accepted) / proposals : 0.0; }
};

/// N(0, sigma) restricted to the open positive orthant. Rejection from the
/// untruncated law; if fewer than 1% of at least 1000 proposals land in the
/// orthant, the remaining rows come from a coordinate Gibbs sampler after 100
/// burn-in sweeps.
inline Matrix sample_truncated_mvn(const Matrix& sigma, Eigen::Index n, Rng& rng, TruncationStats* stats = nullptr) {
    const Matrix l = linalg::cholesky(sigma).matrixL();
    const Eigen::Index d = sigma.rows();
    Matrix x(n, d);
    TruncationStats st;
    Vector z(d);
    Eigen::Index filled = 0;
    while (filled < n) {
        if (st.proposals >= 1000 && st.accepted * 100 < st.proposals) break;
        for (Eigen::Index i = 0; i < d; ++i) z[i] = rng.normal();
        const Vector v = l * z;
        ++st.proposals;
        if ((v.array() > 0.0).all()) {
            ++st.accepted;
            x.row(filled++) = v.transpose();
        }
    }
    if (filled < n) {
        st.used_gibbs = true;
        const Matrix k = linalg::solve_spd(sigma, Matrix::Identity(d, d));
        Vector cur = Vector::Ones(d);
        auto sweep = [&] {
            for (Eigen::Index i = 0; i < d; ++i) {
                const double sd = 1.0 / std::sqrt(k(i, i));
                const double mean = -(k.row(i).dot(cur) - k(i, i) * cur[i]) / k(i, i);
                cur[i] = mean + sd * truncated_standard_normal(-mean / sd, rng);
            }
        };
        for (int b = 0; b < 100; ++b) sweep();
        for (; filled < n; ++filled) {
            sweep();
            x.row(filled) = cur.transpose();
        }
    }
    if (stats) *stats = st;
    return x;
}

inline Matrix sample_exponential_product(const Vector& means, Eigen::Index n, Rng& rng) {
    if (!(means.array() > 0.0).all()) throw DomainError("exponential product: means must be positive");
    Matrix x(n, means.size());
    for (Eigen::Index t = 0; t < n; ++t)
        for (Eigen::Index i = 0; i < means.size(); ++i) x(t, i) = rng.exponential(means[i]);
    return x;
}

inline Matrix sample_uniform_torus(int d, Eigen::Index n, Rng& rng) {
    Matrix x(n, d);
    for (Eigen::Index t = 0; t < n; ++t)
        for (int i = 0; i < d; ++i) x(t, i) = 2.0 * std::numbers::pi * rng.uniform();
    return x;
}

/// Natural parameters of the bivariate von Mises sine model.
struct BvmParams {
    double kappa1 = 0.0, kappa2 = 0.0, mu1 = 0.0, mu2 = 0.0, lambda = 0.0;
};

/// Gibbs sampler: x1 | x2 ~ vM(mu1 + atan2(b, k1), hypot(k1, b)) with
/// b = lambda sin(x2 - mu2), and symmetrically for x2. 200 burn-in sweeps,
/// one retained draw every 10 sweeps.
inline Matrix sample_bivariate_von_mises(const BvmParams& p, Eigen::Index n, Rng& rng) {
    if (!(p.kappa1 >= 0.0 && p.kappa2 >= 0.0)) throw DomainError("bivariate von Mises: concentrations must be >= 0");
    double x1 = p.mu1, x2 = p.mu2;
    auto sweep = [&] {
        const double b1 = p.lambda * std::sin(x2 - p.mu2);
        x1 = rng.von_mises(p.mu1 + std::atan2(b1, p.kappa1), std::hypot(p.kappa1, b1));
        const double b2 = p.lambda * std::sin(x1 - p.mu1);
        x2 = rng.von_mises(p.mu2 + std::atan2(b2, p.kappa2), std::hypot(p.kappa2, b2));
    };
    for (int b = 0; b < 200; ++b) sweep();
    Matrix x(n, 2);
    for (Eigen::Index t = 0; t < n; ++t) {
        for (int s = 0; s < 10; ++s) sweep();
        x(t, 0) = x1;
        x(t, 1) = x2;
    }
    return x;
}

/// Drton-style path-graph precision [[1, s, 0], [s, 1, 0.55], [0, 0.55, 1]].
inline Matrix path_precision(double sigma12) {
    Matrix k(3, 3);
    k << 1.0, sigma12, 0.0, sigma12, 1.0, 0.55, 0.0, 0.55, 1.0;
    return k;
}

}  // namespace nncrit::simlab
