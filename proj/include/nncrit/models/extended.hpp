#pragma once

// Models with the normalization treated as free parameters:
//   log p(x | theta, c) = log p~(x | theta) + c                    (K = 1)
//   p(x | theta, c)     = sum_k exp(log p~(x | theta_k) + c_k)      (K >= 1)
// Extended parameter layout: xi = (theta_1, ..., theta_K, c_1, ..., c_K).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "nncrit/models/family.hpp"
#include "nncrit/models/gaussian.hpp"

namespace nncrit::models {

/// xi split into per-component blocks.
struct ExtendedParams {
    std::vector<Vector> theta;
    Vector c;

    int components() const { return static_cast<int>(theta.size()); }
};

/// log sum_k exp(log p~(x | theta_k) + c_k), stabilized by the running max.
inline double mixture_log_density(const ModelFamily& family, const std::vector<Vector>& theta_blocks, const Vector& c,
                                  const Vector& x) {
    if (theta_blocks.empty() || static_cast<Eigen::Index>(theta_blocks.size()) != c.size())
        throw DomainError("mixture_log_density: need one constant per component and K >= 1");
    std::vector<double> a(theta_blocks.size());
    for (std::size_t k = 0; k < theta_blocks.size(); ++k) a[k] = family.log_unnorm(x, theta_blocks[k]) + c[k];
    const double mx = *std::max_element(a.begin(), a.end());
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double v : a) s += std::exp(v - mx);
    return mx + std::log(s);
}

class ExtendedModel {
public:
    explicit ExtendedModel(FamilyPtr family, int components = 1) : family_(std::move(family)), k_(components) {
        if (!family_) throw DomainError("ExtendedModel: null family");
        if (k_ < 1) throw DomainError("ExtendedModel: need at least one component");
    }

    const ModelFamily& family() const { return *family_; }
    const FamilyPtr& family_ptr() const { return family_; }
    int components() const { return k_; }
    int block_dim() const { return family_->theta_dim(); }
    int dim() const { return k_ * (block_dim() + 1); }
    bool is_mixture() const { return k_ > 1; }

    ExtendedParams split(const Vector& xi) const {
        check_dim(xi);
        ExtendedParams p;
        const int b = block_dim();
        for (int k = 0; k < k_; ++k) p.theta.emplace_back(xi.segment(k * b, b));
        p.c = xi.tail(k_);
        return p;
    }

    Vector join(const ExtendedParams& p) const {
        if (p.components() != k_ || p.c.size() != k_) throw DomainError("ExtendedModel::join: component mismatch");
        Vector xi(dim());
        const int b = block_dim();
        for (int k = 0; k < k_; ++k) xi.segment(k * b, b) = p.theta[k];
        xi.tail(k_) = p.c;
        return xi;
    }

    bool feasible(const Vector& xi) const {
        if (xi.size() != dim() || !xi.allFinite()) return false;
        const int b = block_dim();
        for (int k = 0; k < k_; ++k)
            if (!family_->feasible(xi.segment(k * b, b))) return false;
        return true;
    }

    /// theta_0 = family default for every block, c_0 = 0.
    Vector default_start() const {
        Vector xi = Vector::Zero(dim());
        const int b = block_dim();
        for (int k = 0; k < k_; ++k) xi.segment(k * b, b) = family_->initial_theta();
        return xi;
    }

    double log_density(const Vector& x, const Vector& xi) const {
        const auto p = split(xi);
        if (k_ == 1) return family_->log_unnorm(x, p.theta[0]) + p.c[0];
        return mixture_log_density(*family_, p.theta, p.c, x);
    }

    /// Gradient of log p(x | xi) with respect to xi.
    Vector score(const Vector& x, const Vector& xi) const {
        const auto p = split(xi);
        const int b = block_dim();
        Vector s = Vector::Zero(dim());
        const Vector w = weights(x, p);
        for (int k = 0; k < k_; ++k) {
            s.segment(k * b, b) = w[k] * family_->grad_theta(x, p.theta[k]);
            s[k_ * b + k] = w[k];
        }
        return s;
    }

    /// Hessian of log p(x | xi) with respect to xi.
    Matrix hessian(const Vector& x, const Vector& xi) const {
        const auto p = split(xi);
        const int b = block_dim(), m = dim();
        const Vector w = weights(x, p);
        Matrix h = Matrix::Zero(m, m);
        Vector mean_grad = Vector::Zero(m);
        for (int k = 0; k < k_; ++k) {
            Vector ga = Vector::Zero(m);
            ga.segment(k * b, b) = family_->grad_theta(x, p.theta[k]);
            ga[k_ * b + k] = 1.0;
            h.block(k * b, k * b, b, b) += w[k] * family_->hess_theta(x, p.theta[k]);
            if (k_ > 1) h.noalias() += w[k] * ga * ga.transpose();
            mean_grad += w[k] * ga;
        }
        if (k_ > 1) h.noalias() -= mean_grad * mean_grad.transpose();
        return h;
    }

    /// Per-sample precomputation for repeated batch evaluation.
    struct Prepared {
        const Matrix* samples = nullptr;
        bool linear = false;
        Matrix features;  // n x block_dim
        Vector base;      // n
    };

    Prepared prepare(const Matrix& samples) const {
        if (samples.cols() != family_->data_dim())
            throw DomainError(family_->name() + ": sample matrix has " + std::to_string(samples.cols()) +
                              " columns, expected " + std::to_string(family_->data_dim()));
        Prepared p;
        p.samples = &samples;
        const Eigen::Index n = samples.rows();
        Vector x(samples.cols());
        for (Eigen::Index t = 0; t < n; ++t) {
            x = samples.row(t).transpose();
            if (!family_->in_domain(x))
                throw DomainError(family_->name() + ": sample " + std::to_string(t + 1) + " is outside the support");
        }
        p.linear = family_->capabilities().linear_in_theta;
        if (p.linear) {
            p.features.resize(n, block_dim());
            p.base.resize(n);
            for (Eigen::Index t = 0; t < n; ++t) {
                x = samples.row(t).transpose();
                p.features.row(t) = family_->features(x).transpose();
                p.base[t] = family_->base(x);
            }
        }
        return p;
    }

    /// log p(z_t | xi) for every prepared sample, and optionally the n x m
    /// matrix of scores.
    void evaluate(const Prepared& prep, const Vector& xi, Vector& logp, Matrix* scores) const {
        check_dim(xi);
        const Eigen::Index n = prep.samples->rows();
        const int b = block_dim(), m = dim();
        logp.resize(n);
        if (scores) scores->resize(n, m);

        if (prep.linear) {
            if (k_ == 1) {
                logp.noalias() = prep.features * xi.head(b);
                logp.array() += prep.base.array() + xi[b];
                if (scores) {
                    scores->leftCols(b) = prep.features;
                    scores->col(b).setOnes();
                }
                return;
            }
            Matrix a(n, k_);
            for (int k = 0; k < k_; ++k) {
                a.col(k).noalias() = prep.features * xi.segment(k * b, b);
                a.col(k).array() += xi[k_ * b + k];
            }
            const Vector mx = a.rowwise().maxCoeff();
            a.colwise() -= mx;
            a = a.array().exp();
            const Vector s = a.rowwise().sum();
            logp = (mx.array() + s.array().log() + prep.base.array()).matrix();
            if (scores) {
                for (int k = 0; k < k_; ++k) {
                    const Vector w = (a.col(k).array() / s.array()).matrix();
                    scores->middleCols(k * b, b) = prep.features.array().colwise() * w.array();
                    scores->col(k_ * b + k) = w;
                }
            }
            return;
        }

        Vector x(prep.samples->cols());
        for (Eigen::Index t = 0; t < n; ++t) {
            x = prep.samples->row(t).transpose();
            logp[t] = log_density(x, xi);
            if (scores) scores->row(t) = score(x, xi).transpose();
        }
    }

    /// Mixture blocks reordered by ascending component mean. Only defined for
    /// the 1-D non-normalized Gaussian family; other families are returned as is.
    Vector canonical(const Vector& xi) const {
        if (k_ == 1 || family_->name() != "nn-gaussian-1d") return xi;
        auto p = split(xi);
        std::vector<int> order(k_);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return NNGaussian1D::component_mean(p.theta[a][0], p.theta[a][1]) <
                   NNGaussian1D::component_mean(p.theta[b][0], p.theta[b][1]);
        });
        ExtendedParams q;
        q.c.resize(k_);
        for (int k = 0; k < k_; ++k) {
            q.theta.push_back(p.theta[order[k]]);
            q.c[k] = p.c[order[k]];
        }
        return join(q);
    }

private:
    void check_dim(const Vector& xi) const {
        if (xi.size() != dim())
            throw DomainError("ExtendedModel: xi has length " + std::to_string(xi.size()) + ", expected " +
                              std::to_string(dim()));
    }

    // Posterior component weights softmax(log p~_k + c_k); {1} when K = 1.
    Vector weights(const Vector& x, const ExtendedParams& p) const {
        Vector a(k_);
        for (int k = 0; k < k_; ++k) a[k] = family_->log_unnorm(x, p.theta[k]) + p.c[k];
        const double mx = a.maxCoeff();
        a = (a.array() - mx).exp();
        return a / a.sum();
    }

    FamilyPtr family_;
    int k_;
};

}  // namespace nncrit::models
