#pragma once

// Noise distributions for NCE: proper densities with exact evaluation and
// sampling.

#include <cmath>
#include <numbers>
#include <string>

#include "nncrit/error.hpp"
#include "nncrit/linalg.hpp"
#include "nncrit/random.hpp"

namespace nncrit::nce {

enum class NoiseKind { Gaussian, ExponentialProduct, UniformTorus };

inline std::string to_string(NoiseKind k) {
    switch (k) {
        case NoiseKind::Gaussian: return "gaussian";
        case NoiseKind::ExponentialProduct: return "exp-product";
        case NoiseKind::UniformTorus: return "uniform-torus";
    }
    return "unknown";
}

inline NoiseKind parse_noise_kind(const std::string& s) {
    if (s == "gaussian") return NoiseKind::Gaussian;
    if (s == "exp-product") return NoiseKind::ExponentialProduct;
    if (s == "uniform-torus") return NoiseKind::UniformTorus;
    throw ParseError("unknown noise family '" + s + "' (expected gaussian, exp-product or uniform-torus)");
}

class NoiseSpec {
public:
    /// N(mean, cov).
    static NoiseSpec gaussian(const Vector& mean, const Matrix& cov) {
        if (mean.size() != cov.rows() || cov.rows() != cov.cols())
            throw DomainError("gaussian noise: mean and covariance sizes differ");
        NoiseSpec n(NoiseKind::Gaussian, static_cast<int>(mean.size()));
        n.mean_ = mean;
        n.chol_ = linalg::cholesky(linalg::symmetrize(cov)).matrixL();
        n.log_norm_ = -0.5 * static_cast<double>(mean.size()) * std::log(2.0 * std::numbers::pi) -
                      n.chol_.diagonal().array().log().sum();
        return n;
    }

    /// Independent exponentials with the given means.
    static NoiseSpec exponential_product(const Vector& means) {
        if (means.size() == 0 || !(means.array() > 0.0).all() || !means.allFinite())
            throw DomainError("exponential noise: means must be positive");
        NoiseSpec n(NoiseKind::ExponentialProduct, static_cast<int>(means.size()));
        n.mean_ = means;
        n.log_norm_ = -means.array().log().sum();
        return n;
    }

    /// Uniform on [0, 2 pi)^d.
    static NoiseSpec uniform_torus(int d) {
        if (d < 1) throw DomainError("uniform torus noise: need d >= 1");
        NoiseSpec n(NoiseKind::UniformTorus, d);
        n.log_norm_ = -d * std::log(2.0 * std::numbers::pi);
        return n;
    }

    /// Noise fitted to the data's moments. Gaussian noise uses the sample mean
    /// and the (1/N) sample covariance plus a 1e-8 ridge; exponential noise
    /// uses the coordinate means.
    static NoiseSpec moment_matched(NoiseKind kind, const Matrix& data) {
        if (data.rows() < 1) throw DomainError("moment-matched noise: empty data");
        const int d = static_cast<int>(data.cols());
        switch (kind) {
            case NoiseKind::Gaussian: {
                const Vector mean = data.colwise().mean().transpose();
                const Matrix centered = data.rowwise() - mean.transpose();
                Matrix cov = (centered.transpose() * centered) / static_cast<double>(data.rows());
                cov.diagonal().array() += 1e-8;
                return gaussian(mean, cov);
            }
            case NoiseKind::ExponentialProduct: return exponential_product(data.colwise().mean().transpose());
            case NoiseKind::UniformTorus: return uniform_torus(d);
        }
        throw DomainError("unknown noise kind");
    }

    NoiseKind kind() const { return kind_; }
    int dim() const { return d_; }
    const Vector& mean() const { return mean_; }
    Matrix covariance() const { return chol_ * chol_.transpose(); }

    /// log n(z); -inf outside the support.
    double log_density(const Eigen::Ref<const Vector>& z) const {
        if (z.size() != d_) throw DomainError("noise density: point has the wrong dimension");
        switch (kind_) {
            case NoiseKind::Gaussian: {
                const Vector u = chol_.triangularView<Eigen::Lower>().solve(z - mean_);
                return log_norm_ - 0.5 * u.squaredNorm();
            }
            case NoiseKind::ExponentialProduct: {
                if ((z.array() < 0.0).any()) return -std::numeric_limits<double>::infinity();
                return log_norm_ - (z.array() / mean_.array()).sum();
            }
            case NoiseKind::UniformTorus: {
                constexpr double two_pi = 2.0 * std::numbers::pi;
                if ((z.array() < 0.0).any() || (z.array() >= two_pi).any())
                    return -std::numeric_limits<double>::infinity();
                return log_norm_;
            }
        }
        return -std::numeric_limits<double>::infinity();
    }

    /// log n at every row of `z`.
    Vector log_density_rows(const Matrix& z) const {
        if (z.cols() != d_) throw DomainError("noise density: sample matrix has the wrong width");
        Vector out(z.rows());
        if (kind_ == NoiseKind::Gaussian) {
            const Matrix centered = (z.rowwise() - mean_.transpose()).transpose();
            const Matrix u = chol_.triangularView<Eigen::Lower>().solve(centered);
            out = (log_norm_ - 0.5 * u.colwise().squaredNorm().array()).matrix().transpose();
            return out;
        }
        for (Eigen::Index t = 0; t < z.rows(); ++t) out[t] = log_density(z.row(t).transpose());
        return out;
    }

    Matrix sample(Eigen::Index m, simlab::Rng& rng) const {
        Matrix y(m, d_);
        Vector e(d_);
        for (Eigen::Index t = 0; t < m; ++t) {
            switch (kind_) {
                case NoiseKind::Gaussian:
                    for (int i = 0; i < d_; ++i) e[i] = rng.normal();
                    y.row(t) = (mean_ + chol_ * e).transpose();
                    break;
                case NoiseKind::ExponentialProduct:
                    for (int i = 0; i < d_; ++i) y(t, i) = rng.exponential(mean_[i]);
                    break;
                case NoiseKind::UniformTorus:
                    for (int i = 0; i < d_; ++i) y(t, i) = 2.0 * std::numbers::pi * rng.uniform();
                    break;
            }
        }
        return y;
    }

    std::string describe() const { return to_string(kind_); }

private:
    NoiseSpec(NoiseKind k, int d) : kind_(k), d_(d) {}

    NoiseKind kind_;
    int d_;
    Vector mean_;
    Matrix chol_;
    double log_norm_ = 0.0;
};

}  // namespace nncrit::nce
