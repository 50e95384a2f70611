#pragma once

// Zero-mean Gaussian graphical models parametrized by the free entries of
// the precision matrix K (diagonal first, then one entry per edge). The
// (2 pi)^{-d/2} det(K)^{1/2} factor is left out of log p~.

#include <cmath>

#include "nncrit/models/family.hpp"
#include "nncrit/models/graph.hpp"

namespace nncrit::models {

namespace detail {

/// Coefficient vector a_i with (K x)_i = a_i . theta for the pattern
/// parametrization of `graph`. Written into `out` (length graph.free_parameters()).
inline void precision_row_coefficients(const GraphSpec& graph, const Vector& x, int i, Eigen::Ref<Vector> out) {
    out.setZero();
    out[i] = x[i];
    const int d = graph.nodes();
    for (int e = 0; e < graph.edge_count(); ++e) {
        const auto [a, b] = graph.edges()[e];
        if (a == i) out[d + e] = x[b];
        else if (b == i) out[d + e] = x[a];
    }
}

inline Vector precision_features(const GraphSpec& graph, const Vector& x) {
    const int d = graph.nodes();
    Vector f(graph.free_parameters());
    for (int i = 0; i < d; ++i) f[i] = -0.5 * x[i] * x[i];
    for (int e = 0; e < graph.edge_count(); ++e) {
        const auto [a, b] = graph.edges()[e];
        f[d + e] = -x[a] * x[b];
    }
    return f;
}

}  // namespace detail

/// Shared machinery for exp(-x'Kx/2) on R^d and on the positive orthant.
class PrecisionFamilyBase : public ModelFamily {
public:
    explicit PrecisionFamilyBase(GraphSpec graph) : graph_(std::move(graph)) {}

    const GraphSpec& graph() const { return graph_; }
    int theta_dim() const override { return graph_.free_parameters(); }
    int data_dim() const override { return graph_.nodes(); }
    Capabilities capabilities() const override {
        return {.theta_differentiable = true, .x_differentiable = true, .exponential_family = true,
                .linear_in_theta = true};
    }

    Matrix precision(const Vector& theta) const { return graph_.precision(theta); }

    double log_unnorm(const Vector& x, const Vector& theta) const override {
        check_args(x, theta);
        return -0.5 * x.dot(precision(theta) * x);
    }

    Vector grad_theta(const Vector& x, const Vector& theta) const override {
        check_args(x, theta);
        return features(x);
    }

    Vector dx(const Vector& x, const Vector& theta) const override {
        check_args(x, theta);
        return -(precision(theta) * x);
    }

    Vector dxx(const Vector& x, const Vector& theta) const override {
        check_args(x, theta);
        return -theta.head(graph_.nodes());
    }

    Matrix dx_jacobian_theta(const Vector& x, const Vector& theta) const override {
        check_args(x, theta);
        const int d = graph_.nodes();
        Matrix j(d, theta_dim());
        Vector row(theta_dim());
        for (int i = 0; i < d; ++i) {
            detail::precision_row_coefficients(graph_, x, i, row);
            j.row(i) = -row.transpose();
        }
        return j;
    }

    Matrix dxx_jacobian_theta(const Vector& x, const Vector& theta) const override {
        check_args(x, theta);
        const int d = graph_.nodes();
        Matrix j = Matrix::Zero(d, theta_dim());
        for (int i = 0; i < d; ++i) j(i, i) = -1.0;
        return j;
    }

    Vector features(const Vector& x) const override { return detail::precision_features(graph_, x); }

    bool feasible(const Vector& theta) const override { return linalg::is_pd(precision(theta)); }

    Vector initial_theta() const override {
        Vector t = Vector::Zero(theta_dim());
        t.head(graph_.nodes()).setOnes();
        return t;
    }

protected:
    GraphSpec graph_;
};

/// Gaussian graphical model on R^d.
class GGM final : public PrecisionFamilyBase {
public:
    using PrecisionFamilyBase::PrecisionFamilyBase;

    std::string name() const override { return "ggm"; }
    Domain domain() const override { return Domain::Reals; }

    // rho_SM = sum_i [-2 K_ii + (Kx)_i^2]
    QuadraticFormTerms exp_family_terms(const Vector& x) const override {
        if (!in_domain(x)) throw DomainError(name() + ": sample outside the family's support");
        const int k = theta_dim(), d = graph_.nodes();
        QuadraticFormTerms t{Matrix::Zero(k, k), Vector::Zero(k), 0.0};
        Vector a(k);
        for (int i = 0; i < d; ++i) {
            detail::precision_row_coefficients(graph_, x, i, a);
            t.gamma.noalias() += 2.0 * a * a.transpose();
            t.g[i] -= 2.0;
        }
        return t;
    }
};

/// Gaussian graphical model truncated to the non-negative orthant.
class TruncatedGGM final : public PrecisionFamilyBase {
public:
    using PrecisionFamilyBase::PrecisionFamilyBase;

    std::string name() const override { return "tggm"; }
    Domain domain() const override { return Domain::NonNegative; }

    // rho_SM+ = sum_i [-2 x_i (Kx)_i - x_i^2 K_ii + x_i^2 (Kx)_i^2]
    QuadraticFormTerms exp_family_terms(const Vector& x) const override {
        if (!in_domain(x)) throw DomainError(name() + ": sample outside the family's support");
        const int k = theta_dim(), d = graph_.nodes();
        QuadraticFormTerms t{Matrix::Zero(k, k), Vector::Zero(k), 0.0};
        Vector a(k);
        for (int i = 0; i < d; ++i) {
            detail::precision_row_coefficients(graph_, x, i, a);
            const double x2 = x[i] * x[i];
            t.gamma.noalias() += 2.0 * x2 * a * a.transpose();
            t.g.noalias() -= 2.0 * x[i] * a;
            t.g[i] -= x2;
        }
        return t;
    }
};

/// Gaussian graphical model on log-coordinates, including the Jacobian
/// -sum log x_i. Natural parametrization theta = (pattern entries of K, h)
/// with h = K mu, which keeps the family linear in theta:
///   log p~ = -1/2 l'Kl + h'l - sum_i l_i,   l = log x.
class LogGGM final : public ModelFamily {
public:
    explicit LogGGM(GraphSpec graph) : graph_(std::move(graph)) {}

    const GraphSpec& graph() const { return graph_; }
    std::string name() const override { return "log-ggm"; }
    int theta_dim() const override { return graph_.free_parameters() + graph_.nodes(); }
    int data_dim() const override { return graph_.nodes(); }
    Domain domain() const override { return Domain::NonNegative; }
    Capabilities capabilities() const override {
        return {.theta_differentiable = true, .x_differentiable = true, .exponential_family = true,
                .linear_in_theta = true};
    }

    bool in_domain(const Vector& x) const override {
        if (x.size() != data_dim()) return false;
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (!(x[i] > 0.0) || !std::isfinite(x[i])) return false;
        return true;
    }

    Matrix precision(const Vector& theta) const { return graph_.precision(theta); }
    Vector linear_term(const Vector& theta) const { return theta.tail(graph_.nodes()); }

    /// Mean of log x: K^{-1} h.
    Vector log_mean(const Vector& theta) const { return linalg::solve_spd(precision(theta), linear_term(theta)); }

    /// theta for given log-scale mean and precision pattern entries.
    Vector theta_from(const Vector& mu, const Matrix& k) const {
        Vector t(theta_dim());
        t.head(graph_.free_parameters()) = graph_.pattern_entries(k);
        t.tail(graph_.nodes()) = k * mu;
        return t;
    }

    double log_unnorm(const Vector& x, const Vector& theta) const override {
        check_args(x, theta);
        const Vector l = x.array().log().matrix();
        return -0.5 * l.dot(precision(theta) * l) + linear_term(theta).dot(l) - l.sum();
    }

    Vector grad_theta(const Vector& x, const Vector& theta) const override {
        check_args(x, theta);
        return features(x);
    }

    Vector dx(const Vector& x, const Vector& theta) const override {
        check_args(x, theta);
        return (score_numerator(x, theta).array() / x.array()).matrix();
    }

    Vector dxx(const Vector& x, const Vector& theta) const override {
        check_args(x, theta);
        const Vector v = score_numerator(x, theta);
        const int d = graph_.nodes();
        Vector out(d);
        for (int i = 0; i < d; ++i) out[i] = (-theta[i] - v[i]) / (x[i] * x[i]);
        return out;
    }

    Matrix dx_jacobian_theta(const Vector& x, const Vector& theta) const override {
        check_args(x, theta);
        const int d = graph_.nodes();
        Matrix j(d, theta_dim());
        Vector b(theta_dim());
        for (int i = 0; i < d; ++i) {
            numerator_coefficients(x, i, b);
            j.row(i) = b.transpose() / x[i];
        }
        return j;
    }

    Matrix dxx_jacobian_theta(const Vector& x, const Vector& theta) const override {
        check_args(x, theta);
        const int d = graph_.nodes();
        Matrix j(d, theta_dim());
        Vector b(theta_dim());
        for (int i = 0; i < d; ++i) {
            numerator_coefficients(x, i, b);
            b[i] += 1.0;
            j.row(i) = -b.transpose() / (x[i] * x[i]);
        }
        return j;
    }

    // With v_i = x_i d_i log p~ = b_i . theta - 1 the non-negative score
    // matching loss is sum_i [v_i - K_ii + v_i^2].
    QuadraticFormTerms exp_family_terms(const Vector& x) const override {
        if (!in_domain(x)) throw DomainError(name() + ": sample outside the family's support");
        const int k = theta_dim(), d = graph_.nodes();
        QuadraticFormTerms t{Matrix::Zero(k, k), Vector::Zero(k), 0.0};
        Vector b(k);
        for (int i = 0; i < d; ++i) {
            numerator_coefficients(x, i, b);
            t.gamma.noalias() += 2.0 * b * b.transpose();
            t.g -= b;
            t.g[i] -= 1.0;
        }
        return t;
    }

    Vector features(const Vector& x) const override {
        const Vector l = x.array().log().matrix();
        Vector f(theta_dim());
        f.head(graph_.free_parameters()) = detail::precision_features(graph_, l);
        f.tail(graph_.nodes()) = l;
        return f;
    }

    double base(const Vector& x) const override { return -x.array().log().sum(); }

    bool feasible(const Vector& theta) const override { return linalg::is_pd(precision(theta)); }

    Vector initial_theta() const override {
        Vector t = Vector::Zero(theta_dim());
        t.head(graph_.nodes()).setOnes();
        return t;
    }

private:
    // v = -K l + h - 1
    Vector score_numerator(const Vector& x, const Vector& theta) const {
        const Vector l = x.array().log().matrix();
        return (-(precision(theta) * l) + linear_term(theta)).array() - 1.0;
    }

    // b_i with v_i = b_i . theta - 1
    void numerator_coefficients(const Vector& x, int i, Vector& b) const {
        const Vector l = x.array().log().matrix();
        const int kp = graph_.free_parameters();
        Vector a(kp);
        detail::precision_row_coefficients(graph_, l, i, a);
        b.setZero();
        b.head(kp) = -a;
        b[kp + i] = 1.0;
    }

    GraphSpec graph_;
};

}  // namespace nncrit::models
