#pragma once

// Population discrepancies by adaptive Gauss-Kronrod quadrature on the line.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>

#include "nncrit/error.hpp"
#include "nncrit/models/extended.hpp"
#include "nncrit/nce.hpp"
#include "nncrit/noise.hpp"
#include "nncrit/optim.hpp"
#include "nncrit/sm.hpp"

namespace nncrit::simlab {

struct QuadratureOptions {
    double lower = -40.0;
    double upper = 40.0;
    double abs_tol = 1e-9;
    unsigned max_depth = 15;
};

using Density1d = std::function<double(double)>;

/// Integral of f over [lower, upper]; throws QuadratureNonConvergence when
/// the error estimate stays above abs_tol.
inline double integrate(const std::function<double(double)>& f, const QuadratureOptions& o = {}) {
    using boost::math::quadrature::gauss_kronrod;
    double err = 0.0;
    // Kronrod's own stopping test is relative; the integrands here are O(1),
    // so aim well below abs_tol and check the absolute estimate afterwards.
    const double value =
        gauss_kronrod<double, 61>::integrate(f, o.lower, o.upper, o.max_depth, 1e-3 * o.abs_tol, &err);
    if (!std::isfinite(value) || !(err <= o.abs_tol))
        throw QuadratureNonConvergence("quadrature error estimate " + std::to_string(err) + " exceeds " +
                                       std::to_string(o.abs_tol));
    return value;
}

/// d_NCE(q, p_xi) = E_q softplus(-u) + (M/N) E_n softplus(u), with
/// u = log(N p_xi / (M n)).
inline double d_nce_population(const Density1d& q, const models::ExtendedModel& model, const Vector& xi,
                               const nce::NoiseSpec& noise, double N, double M, const QuadratureOptions& o = {}) {
    if (model.family().data_dim() != 1 || noise.dim() != 1) throw DomainError("d_nce_population: 1-D models only");
    const double off = std::log(N) - std::log(M);
    Vector z(1);
    auto logit = [&](double x, double& log_n) {
        z[0] = x;
        log_n = noise.log_density(z);
        return off + model.log_density(z, xi) - log_n;
    };
    const double data_part = integrate(
        [&](double x) {
            const double qx = q(x);
            if (qx == 0.0) return 0.0;
            double ln;
            return qx * nce::softplus(-logit(x, ln));
        },
        o);
    const double noise_part = integrate(
        [&](double y) {
            double ln;
            const double u = logit(y, ln);
            if (ln == -std::numeric_limits<double>::infinity()) return 0.0;
            return std::exp(ln) * nce::softplus(u);
        },
        o);
    return data_part + (M / N) * noise_part;
}

/// d_SM(q, p_theta) = E_q rho_SM(x, theta).
inline double d_sm_population(const Density1d& q, const Vector& theta, const models::ModelFamily& family,
                              const QuadratureOptions& o = {}) {
    if (family.data_dim() != 1) throw DomainError("d_sm_population: 1-D models only");
    Vector z(1);
    return integrate(
        [&](double x) {
            const double qx = q(x);
            if (qx == 0.0) return 0.0;
            z[0] = x;
            return qx * sm::rho_sm(z, theta, family);
        },
        o);
}

/// Minimizer over xi of d_NCE(q, p_xi), by CG on quadrature values and
/// gradients. Throws LineSearchFailure when CG stalls.
inline Vector nce_population_minimizer(const Density1d& q, const models::ExtendedModel& model,
                                       const nce::NoiseSpec& noise, double N, double M, const Vector& start,
                                       const QuadratureOptions& o = {}) {
    if (model.family().data_dim() != 1 || noise.dim() != 1)
        throw DomainError("nce_population_minimizer: 1-D models only");
    const double off = std::log(N) - std::log(M);
    optim::OptProblem prob;
    prob.dim = model.dim();
    prob.value_and_gradient = [&](const Vector& xi, Vector& g) {
        if (!model.feasible(xi)) return std::numeric_limits<double>::infinity();
        Vector z(1);
        // Component 0 is the value, then the gradient entries.
        auto term = [&](double x, int i) {
            z[0] = x;
            const double ln = noise.log_density(z);
            if (ln == -std::numeric_limits<double>::infinity()) return 0.0;
            const double u = off + model.log_density(z, xi) - ln;
            const double qx = q(x), nx = std::exp(ln);
            if (i == 0) return (qx > 0.0 ? qx * nce::softplus(-u) : 0.0) + (M / N) * nx * nce::softplus(u);
            const double s = model.score(z, xi)[i - 1];
            return (-qx * nce::sigmoid(-u) + (M / N) * nx * nce::sigmoid(u)) * s;
        };
        g.resize(prob.dim);
        for (int i = 0; i < prob.dim; ++i) g[i] = integrate([&](double x) { return term(x, i + 1); }, o);
        return integrate([&](double x) { return term(x, 0); }, o);
    };
    optim::OptOptions opts;
    opts.grad_tol = 1e-8;
    const auto r = optim::minimize_cg(prob, start, opts);
    if (!r.converged)
        throw LineSearchFailure("nce_population_minimizer: CG stopped with gradient norm " +
                                std::to_string(r.grad_norm));
    return r.x_star;
}

/// Minimizer of d_SM(q, p_theta) for an exponential family:
/// theta* = -(E_q gamma)^{-1} E_q g.
inline Vector sm_population_minimizer(const Density1d& q, const models::ModelFamily& family,
                                      const QuadratureOptions& o = {}) {
    if (family.data_dim() != 1) throw DomainError("sm_population_minimizer: 1-D models only");
    family.require(family.capabilities().exponential_family, "exponential-family");
    const int k = family.theta_dim();
    Matrix gamma(k, k);
    Vector g(k);
    Vector z(1);
    auto expect = [&](auto pick) {
        return integrate(
            [&](double x) {
                const double qx = q(x);
                if (qx == 0.0) return 0.0;
                z[0] = x;
                return qx * pick(family.exp_family_terms(z));
            },
            o);
    };
    for (int i = 0; i < k; ++i) {
        g[i] = expect([i](const models::QuadraticFormTerms& t) { return t.g[i]; });
        for (int j = 0; j < k; ++j) gamma(i, j) = expect([i, j](const models::QuadraticFormTerms& t) { return t.gamma(i, j); });
    }
    return -linalg::solve_spd(gamma, g);
}

}  // namespace nncrit::simlab
