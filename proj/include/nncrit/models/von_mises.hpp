#pragma once

#include <cmath>
#include <numbers>

#include "nncrit/models/family.hpp"

namespace nncrit::models {

/// Bivariate von Mises (sine model) on the torus:
///   log p~ = k1 cos(x1 - m1) + k2 cos(x2 - m2) + lambda sin(x1 - m1) sin(x2 - m2).
///
/// theta = (s1, s2, m1, m2[, lambda]) with k_i = softplus(s_i), so every
/// theta keeps k_i > 0. The independent variant fixes lambda = 0 and drops it.
class BivariateVonMises final : public ModelFamily {
public:
    explicit BivariateVonMises(bool with_interaction = true) : with_interaction_(with_interaction) {}

    bool with_interaction() const { return with_interaction_; }

    std::string name() const override { return "bvm"; }
    int theta_dim() const override { return with_interaction_ ? 5 : 4; }
    int data_dim() const override { return 2; }
    Domain domain() const override { return Domain::Torus; }
    Capabilities capabilities() const override { return {.theta_differentiable = true}; }

    static double softplus(double s) { return s > 30.0 ? s : std::log1p(std::exp(s)); }
    static double softplus_inverse(double k) { return k > 30.0 ? k : std::log(std::expm1(k)); }
    static double logistic(double s) { return 1.0 / (1.0 + std::exp(-s)); }

    /// (k1, k2, m1, m2, lambda) with the means reduced to [0, 2 pi).
    Vector to_natural(const Vector& theta) const {
        Vector out(5);
        out << softplus(theta[0]), softplus(theta[1]), wrap(theta[2]), wrap(theta[3]),
            with_interaction_ ? theta[4] : 0.0;
        return out;
    }

    /// Inverse of to_natural; lambda is ignored by the independent variant.
    Vector from_natural(double k1, double k2, double m1, double m2, double lambda = 0.0) const {
        Vector t(theta_dim());
        t[0] = softplus_inverse(k1);
        t[1] = softplus_inverse(k2);
        t[2] = m1;
        t[3] = m2;
        if (with_interaction_) t[4] = lambda;
        return t;
    }

    static double wrap(double angle) {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        double a = std::fmod(angle, two_pi);
        if (a < 0.0) a += two_pi;
        return a >= two_pi ? 0.0 : a;
    }

    double log_unnorm(const Vector& x, const Vector& theta) const override {
        check_args(x, theta);
        const double d1 = x[0] - theta[2], d2 = x[1] - theta[3];
        return softplus(theta[0]) * std::cos(d1) + softplus(theta[1]) * std::cos(d2) +
               lambda(theta) * std::sin(d1) * std::sin(d2);
    }

    Vector grad_theta(const Vector& x, const Vector& theta) const override {
        check_args(x, theta);
        const double d1 = x[0] - theta[2], d2 = x[1] - theta[3];
        const double c1 = std::cos(d1), s1 = std::sin(d1), c2 = std::cos(d2), s2 = std::sin(d2);
        const double k1 = softplus(theta[0]), k2 = softplus(theta[1]), lam = lambda(theta);
        Vector g(theta_dim());
        g[0] = logistic(theta[0]) * c1;
        g[1] = logistic(theta[1]) * c2;
        g[2] = k1 * s1 - lam * c1 * s2;
        g[3] = k2 * s2 - lam * s1 * c2;
        if (with_interaction_) g[4] = s1 * s2;
        return g;
    }

    Matrix hess_theta(const Vector& x, const Vector& theta) const override {
        check_args(x, theta);
        const double d1 = x[0] - theta[2], d2 = x[1] - theta[3];
        const double c1 = std::cos(d1), s1 = std::sin(d1), c2 = std::cos(d2), s2 = std::sin(d2);
        const double k1 = softplus(theta[0]), k2 = softplus(theta[1]), lam = lambda(theta);
        const double l1 = logistic(theta[0]), l2 = logistic(theta[1]);
        Matrix h = Matrix::Zero(theta_dim(), theta_dim());
        h(0, 0) = l1 * (1.0 - l1) * c1;
        h(1, 1) = l2 * (1.0 - l2) * c2;
        h(0, 2) = h(2, 0) = l1 * s1;
        h(1, 3) = h(3, 1) = l2 * s2;
        h(2, 2) = -k1 * c1 - lam * s1 * s2;
        h(3, 3) = -k2 * c2 - lam * s1 * s2;
        h(2, 3) = h(3, 2) = lam * c1 * c2;
        if (with_interaction_) {
            h(2, 4) = h(4, 2) = -c1 * s2;
            h(3, 4) = h(4, 3) = -s1 * c2;
        }
        return h;
    }

    Vector initial_theta() const override { return Vector::Zero(theta_dim()); }

private:
    double lambda(const Vector& theta) const { return with_interaction_ ? theta[4] : 0.0; }

    bool with_interaction_;
};

}  // namespace nncrit::models
