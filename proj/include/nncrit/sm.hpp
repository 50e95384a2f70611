#pragma once

// Score matching on R^d and on the non-negative orthant, SMIC and SM-CV.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "nncrit/error.hpp"
#include "nncrit/linalg.hpp"
#include "nncrit/models/family.hpp"
#include "nncrit/optim.hpp"

namespace nncrit::sm {

using models::ModelFamily;

enum class SmDomain { Reals, NonNegative };
enum class SmMethod { ClosedForm, Cg };

inline std::string to_string(SmDomain d) { return d == SmDomain::Reals ? "reals" : "nonneg"; }
inline std::string to_string(SmMethod m) { return m == SmMethod::ClosedForm ? "closed-form-linear" : "cg"; }

inline SmDomain parse_sm_domain(const std::string& s) {
    if (s == "reals") return SmDomain::Reals;
    if (s == "nonneg") return SmDomain::NonNegative;
    throw ParseError("unknown score-matching domain '" + s + "' (expected reals or nonneg)");
}

/// Score-matching variant matching the family's support.
inline SmDomain default_domain(const ModelFamily& family) {
    switch (family.domain()) {
        case models::Domain::Reals: return SmDomain::Reals;
        case models::Domain::NonNegative: return SmDomain::NonNegative;
        case models::Domain::Torus: break;
    }
    throw CapabilityError(family.name() + ": score matching is not defined on the torus");
}

/// sum_i [2 d_i^2 log p~ + (d_i log p~)^2]
inline double rho_sm(const Vector& x, const Vector& theta, const ModelFamily& family) {
    family.require(family.capabilities().x_differentiable, "x-differentiable");
    const Vector d1 = family.dx(x, theta), d2 = family.dxx(x, theta);
    return 2.0 * d2.sum() + d1.squaredNorm();
}

/// sum_i [2 x_i d_i log p~ + x_i^2 d_i^2 log p~ + x_i^2 (d_i log p~)^2]
inline double rho_sm_plus(const Vector& x, const Vector& theta, const ModelFamily& family) {
    family.require(family.capabilities().x_differentiable, "x-differentiable");
    if ((x.array() < 0.0).any()) throw DomainError(family.name() + ": non-negative score matching needs x >= 0");
    const Vector d1 = family.dx(x, theta), d2 = family.dxx(x, theta);
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double x2 = x[i] * x[i];
        if (x2 == 0.0) continue;
        s += 2.0 * x[i] * d1[i] + x2 * d2[i] + x2 * d1[i] * d1[i];
    }
    return s;
}

inline double rho(const Vector& x, const Vector& theta, const ModelFamily& family, SmDomain domain) {
    return domain == SmDomain::Reals ? rho_sm(x, theta, family) : rho_sm_plus(x, theta, family);
}

/// theta-gradient of rho from the x-derivative Jacobians.
inline Vector grad_rho(const Vector& x, const Vector& theta, const ModelFamily& family, SmDomain domain) {
    family.require(family.capabilities().x_differentiable, "x-differentiable");
    const Vector d1 = family.dx(x, theta);
    const Matrix j1 = family.dx_jacobian_theta(x, theta);
    const Matrix j2 = family.dxx_jacobian_theta(x, theta);
    if (domain == SmDomain::Reals) return 2.0 * j2.colwise().sum().transpose() + 2.0 * j1.transpose() * d1;
    Vector g = Vector::Zero(theta.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double x2 = x[i] * x[i];
        if (x2 == 0.0) continue;
        g += (2.0 * x[i] + 2.0 * x2 * d1[i]) * j1.row(i).transpose() + x2 * j2.row(i).transpose();
    }
    return g;
}

struct SmFit {
    Vector theta_hat;
    double objective_value = 0.0;
    SmMethod method = SmMethod::ClosedForm;
    SmDomain domain = SmDomain::Reals;
    std::optional<optim::OptResult> opt;
};

/// A dataset paired with a family for score matching. Exponential-family
/// terms are assembled once when the family provides them for `domain`.
class SmProblem {
public:
    // Holds references; temporaries would dangle.
    SmProblem(const ModelFamily&&, const Matrix&, std::optional<SmDomain> = std::nullopt) = delete;
    SmProblem(const ModelFamily&, const Matrix&&, std::optional<SmDomain> = std::nullopt) = delete;
    SmProblem(const ModelFamily& family, const Matrix& data, std::optional<SmDomain> domain = std::nullopt)
        : family_(family), data_(data), domain_(domain ? *domain : default_domain(family)) {
        family.require(family.capabilities().x_differentiable, "x-differentiable");
        if (data.rows() < 1) throw DomainError("score matching: data is empty");
        if (data.cols() != family.data_dim())
            throw DomainError(family.name() + ": data has " + std::to_string(data.cols()) + " columns, expected " +
                              std::to_string(family.data_dim()));
        Vector x(data.cols());
        for (Eigen::Index t = 0; t < data.rows(); ++t) {
            x = data.row(t).transpose();
            if (!family.in_domain(x))
                throw DomainError(family.name() + ": sample " + std::to_string(t + 1) + " is outside the support");
        }
        quadratic_ = family.capabilities().exponential_family && domain_ == default_domain(family);
        if (quadratic_) {
            const int k = family.theta_dim();
            terms_.reserve(data.rows());
            gamma_sum_ = Matrix::Zero(k, k);
            g_sum_ = Vector::Zero(k);
            c_sum_ = 0.0;
            for (Eigen::Index t = 0; t < data.rows(); ++t) {
                terms_.push_back(family.exp_family_terms(data.row(t).transpose()));
                gamma_sum_ += terms_.back().gamma;
                g_sum_ += terms_.back().g;
                c_sum_ += terms_.back().c0;
            }
        }
    }

    const ModelFamily& family() const { return family_; }
    SmDomain domain() const { return domain_; }
    bool quadratic() const { return quadratic_; }
    Eigen::Index N() const { return data_.rows(); }

    double rho_at(Eigen::Index t, const Vector& theta) const {
        if (quadratic_) {
            const auto& q = terms_[t];
            return 0.5 * theta.dot(q.gamma * theta) + q.g.dot(theta) + q.c0;
        }
        return rho(data_.row(t).transpose(), theta, family_, domain_);
    }

    /// (1/N) sum rho, skipping sample `exclude` if >= 0.
    double objective(const Vector& theta, Eigen::Index exclude = -1) const {
        const double n = static_cast<double>(N() - (exclude >= 0 ? 1 : 0));
        if (quadratic_) {
            Matrix gs = gamma_sum_;
            Vector gv = g_sum_;
            double cs = c_sum_;
            if (exclude >= 0) {
                gs -= terms_[exclude].gamma;
                gv -= terms_[exclude].g;
                cs -= terms_[exclude].c0;
            }
            return (0.5 * theta.dot(gs * theta) + gv.dot(theta) + cs) / n;
        }
        double s = 0.0;
        for (Eigen::Index t = 0; t < N(); ++t)
            if (t != exclude) s += rho_at(t, theta);
        return s / n;
    }

    Vector gradient(const Vector& theta, Eigen::Index exclude = -1) const {
        const double n = static_cast<double>(N() - (exclude >= 0 ? 1 : 0));
        Vector g = Vector::Zero(theta.size());
        for (Eigen::Index t = 0; t < N(); ++t)
            if (t != exclude) g += grad_rho(data_.row(t).transpose(), theta, family_, domain_);
        return g / n;
    }

    optim::OptProblem opt_problem(Eigen::Index exclude = -1) const {
        optim::OptProblem p;
        p.dim = family_.theta_dim();
        p.objective = [this, exclude](const Vector& th) { return objective(th, exclude); };
        p.gradient = [this, exclude](const Vector& th) { return gradient(th, exclude); };
        return p;
    }

    /// Solves (sum Gamma) theta = -sum g.
    SmFit fit_closed_form() const {
        if (!quadratic_)
            throw CapabilityError(family_.name() + ": closed-form score matching needs an exponential family on its own domain");
        SmFit f;
        f.method = SmMethod::ClosedForm;
        f.domain = domain_;
        f.theta_hat = solve(gamma_sum_, g_sum_);
        f.objective_value = objective(f.theta_hat);
        return f;
    }

    SmFit fit_generic(const std::optional<Vector>& start = std::nullopt, const optim::OptOptions& opts = {},
                      Eigen::Index exclude = -1) const {
        const Vector x0 = start ? *start : family_.initial_theta();
        SmFit f;
        f.method = SmMethod::Cg;
        f.domain = domain_;
        f.opt = optim::minimize_cg(opt_problem(exclude), x0, opts);
        if (f.opt->termination_reason == optim::Termination::LineSearchFailure)
            throw LineSearchFailure("score matching fit of " + family_.name() + ": line search failed");
        f.theta_hat = f.opt->x_star;
        f.objective_value = f.opt->f_star;
        return f;
    }

    SmFit fit() const { return quadratic_ ? fit_closed_form() : fit_generic(); }

    /// Uncentered (1/N) sum grad rho grad rho'.
    Matrix I_hat(const Vector& theta) const {
        const int k = family_.theta_dim();
        Matrix i = Matrix::Zero(k, k);
        for (Eigen::Index t = 0; t < N(); ++t) {
            const Vector g = quadratic_ ? Vector(terms_[t].gamma * theta + terms_[t].g)
                                        : grad_rho(data_.row(t).transpose(), theta, family_, domain_);
            i.noalias() += g * g.transpose();
        }
        return i / static_cast<double>(N());
    }

    /// (1/N) sum Gamma for exponential families; otherwise the Hessian of the
    /// mean loss by central differences of its analytic gradient.
    Matrix J_hat(const Vector& theta) const {
        if (quadratic_) return gamma_sum_ / static_cast<double>(N());
        const int k = family_.theta_dim();
        Matrix j(k, k);
        Vector tp = theta, tm = theta;
        for (int a = 0; a < k; ++a) {
            const double h = 1e-5 * std::max(1.0, std::abs(theta[a]));
            tp[a] = theta[a] + h;
            tm[a] = theta[a] - h;
            j.col(a) = (gradient(tp) - gradient(tm)) / (2.0 * h);
            tp[a] = tm[a] = theta[a];
        }
        return linalg::symmetrize(j);
    }

    double penalty(const Vector& theta) const { return linalg::trace_product_inv(I_hat(theta), J_hat(theta)); }

    double smic(const SmFit& f) const { return N() * f.objective_value + penalty(f.theta_hat); }

    /// sum_t rho(x_t, theta^(-t)). Exponential families solve the downdated
    /// system (sum Gamma - Gamma_t) theta = -(sum g - g_t); others refit by CG
    /// from `full`.
    double loocv(const SmFit& full, const optim::OptOptions& opts = {}) const {
        if (N() < 2) throw EmptyFold("SM-CV needs at least two samples");
        double total = 0.0;
        for (Eigen::Index t = 0; t < N(); ++t) {
            Vector th;
            if (quadratic_) th = solve(gamma_sum_ - terms_[t].gamma, g_sum_ - terms_[t].g);
            else th = fit_generic(full.theta_hat, opts, t).theta_hat;
            total += rho_at(t, th);
        }
        return total;
    }

private:
    Vector solve(const Matrix& gamma, const Vector& g) const {
        try {
            const auto llt = linalg::cholesky(linalg::symmetrize(gamma));
            // Exactly singular sums can factor with a roundoff-sized pivot.
            if (llt.rcond() < 1e-13) throw NotPositiveDefinite("ill-conditioned");
            return llt.solve(Vector(-g));
        } catch (const NotPositiveDefinite&) {
            throw SingularMatrix(family_.name() + ": score-matching system is singular");
        }
    }

    const ModelFamily& family_;
    const Matrix& data_;
    SmDomain domain_;
    bool quadratic_ = false;
    std::vector<models::QuadraticFormTerms> terms_;
    Matrix gamma_sum_;
    Vector g_sum_;
    double c_sum_ = 0.0;
};

inline SmFit fit_sm_closed_form(const ModelFamily& family, const Matrix& data) {
    return SmProblem(family, data).fit_closed_form();
}

inline SmFit fit_sm_generic(const ModelFamily& family, const Matrix& data, const Vector& x0,
                            std::optional<SmDomain> domain = std::nullopt, const optim::OptOptions& opts = {}) {
    return SmProblem(family, data, domain).fit_generic(x0, opts);
}

inline double smic(const SmFit& fit, const Matrix& data, const ModelFamily& family) {
    return SmProblem(family, data, fit.domain).smic(fit);
}

inline double sm_loocv(const ModelFamily& family, const Matrix& data, std::optional<SmDomain> domain = std::nullopt) {
    if (data.rows() < 2) throw EmptyFold("SM-CV needs at least two samples");
    const SmProblem p(family, data, domain);
    return p.loocv(p.fit());
}

}  // namespace nncrit::sm
