#pragma once

#include <limits>

#include "nncrit/models/family.hpp"

namespace nncrit::models {

/// log p~(x | theta) = theta_1 x^2 + theta_2 x on the real line.
class NNGaussian1D final : public ModelFamily {
public:
    std::string name() const override { return "nn-gaussian-1d"; }
    int theta_dim() const override { return 2; }
    int data_dim() const override { return 1; }
    Domain domain() const override { return Domain::Reals; }
    Capabilities capabilities() const override {
        return {.theta_differentiable = true, .x_differentiable = true, .exponential_family = true,
                .linear_in_theta = true};
    }

    double log_unnorm(const Vector& x, const Vector& theta) const override {
        check_args(x, theta);
        const double v = x[0];
        return theta[0] * v * v + theta[1] * v;
    }

    Vector grad_theta(const Vector& x, const Vector& theta) const override {
        check_args(x, theta);
        return features(x);
    }

    Vector dx(const Vector& x, const Vector& theta) const override {
        check_args(x, theta);
        return Vector::Constant(1, 2.0 * theta[0] * x[0] + theta[1]);
    }

    Vector dxx(const Vector& x, const Vector& theta) const override {
        check_args(x, theta);
        return Vector::Constant(1, 2.0 * theta[0]);
    }

    Matrix dx_jacobian_theta(const Vector& x, const Vector& theta) const override {
        check_args(x, theta);
        Matrix j(1, 2);
        j << 2.0 * x[0], 1.0;
        return j;
    }

    Matrix dxx_jacobian_theta(const Vector& x, const Vector& theta) const override {
        check_args(x, theta);
        Matrix j(1, 2);
        j << 2.0, 0.0;
        return j;
    }

    // rho_SM = 4 theta_1 + (2 theta_1 x + theta_2)^2
    QuadraticFormTerms exp_family_terms(const Vector& x) const override {
        if (!in_domain(x)) throw DomainError(name() + ": sample outside the family's support");
        const double v = x[0];
        QuadraticFormTerms t;
        t.gamma.resize(2, 2);
        t.gamma << 8.0 * v * v, 4.0 * v, 4.0 * v, 2.0;
        t.g.resize(2);
        t.g << 4.0, 0.0;
        t.c0 = 0.0;
        return t;
    }

    Vector features(const Vector& x) const override {
        Vector f(2);
        f << x[0] * x[0], x[0];
        return f;
    }

    /// Mean of the Gaussian encoded by theta; +inf when theta_1 >= 0.
    static double component_mean(double theta1, double theta2) {
        if (!(theta1 < 0.0)) return std::numeric_limits<double>::infinity();
        return -theta2 / (2.0 * theta1);
    }

    /// (theta_1, theta_2) of N(mean, var): (-1/(2 var), mean/var).
    static Vector from_moments(double mean, double var) {
        Vector t(2);
        t << -0.5 / var, mean / var;
        return t;
    }
};

}  // namespace nncrit::models
