#pragma once

#include <cmath>
#include <memory>
#include <string>

#include "nncrit/error.hpp"
#include "nncrit/linalg.hpp"

namespace nncrit::models {

enum class Domain { Reals, NonNegative, Torus };

inline std::string to_string(Domain d) {
    switch (d) {
        case Domain::Reals: return "reals";
        case Domain::NonNegative: return "nonneg";
        case Domain::Torus: return "torus";
    }
    return "unknown";
}

struct Capabilities {
    bool theta_differentiable = true;
    bool x_differentiable = false;  // first and pure second x-derivatives
    bool exponential_family = false;
    bool linear_in_theta = false;  // log p~ = features(x) . theta + base(x)
};

/// Per-sample terms of the score-matching loss for exponential families:
/// rho(x, theta) = 1/2 theta' gamma theta + g' theta + c0.
struct QuadraticFormTerms {
    Matrix gamma;
    Vector g;
    double c0 = 0.0;
};

/// A non-normalized density log p~(x | theta) with its derivatives.
///
/// Implementations are immutable after construction, so one instance may be
/// shared across threads. Samples are passed as column vectors of length
/// data_dim(); sample matrices hold one observation per row.
class ModelFamily {
public:
    virtual ~ModelFamily() = default;

    virtual std::string name() const = 0;
    virtual int theta_dim() const = 0;
    virtual int data_dim() const = 0;
    virtual Domain domain() const = 0;
    virtual Capabilities capabilities() const = 0;

    virtual double log_unnorm(const Vector& x, const Vector& theta) const = 0;
    virtual Vector grad_theta(const Vector& x, const Vector& theta) const = 0;

    /// theta-Hessian of log p~. Zero for families linear in theta.
    virtual Matrix hess_theta(const Vector& x, const Vector& theta) const {
        check_args(x, theta);
        return Matrix::Zero(theta_dim(), theta_dim());
    }

    /// d/dx_i log p~, i = 1..d.
    virtual Vector dx(const Vector& x, const Vector& theta) const {
        (void)x, (void)theta;
        throw CapabilityError(name() + ": x-derivatives are not available for this family");
    }

    /// d^2/dx_i^2 log p~, i = 1..d.
    virtual Vector dxx(const Vector& x, const Vector& theta) const {
        (void)x, (void)theta;
        throw CapabilityError(name() + ": x-derivatives are not available for this family");
    }

    /// theta-Jacobians (d x k) of dx and dxx; used by generic score matching.
    virtual Matrix dx_jacobian_theta(const Vector& x, const Vector& theta) const {
        (void)x, (void)theta;
        throw CapabilityError(name() + ": x-derivatives are not available for this family");
    }
    virtual Matrix dxx_jacobian_theta(const Vector& x, const Vector& theta) const {
        (void)x, (void)theta;
        throw CapabilityError(name() + ": x-derivatives are not available for this family");
    }

    /// Quadratic-form terms of rho_SM (reals) or rho_SM+ (non-negative
    /// orthant), matching the family's domain.
    virtual QuadraticFormTerms exp_family_terms(const Vector& x) const {
        (void)x;
        throw CapabilityError(name() + ": not an exponential family");
    }

    /// Sufficient statistics for families linear in theta.
    virtual Vector features(const Vector& x) const {
        (void)x;
        throw CapabilityError(name() + ": not linear in theta");
    }
    virtual double base(const Vector& x) const {
        (void)x;
        return 0.0;
    }

    /// Parameters outside the admissible set (e.g. a precision matrix that is
    /// not positive definite). Objectives return +inf there.
    virtual bool feasible(const Vector& theta) const {
        (void)theta;
        return true;
    }

    virtual Vector initial_theta() const { return Vector::Zero(theta_dim()); }

    /// Whether x lies in the family's support.
    virtual bool in_domain(const Vector& x) const {
        if (x.size() != data_dim()) return false;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double v = x[i];
            if (!std::isfinite(v)) return false;
            if (domain() == Domain::NonNegative && v < 0.0) return false;
        }
        return true;
    }

    void check_args(const Vector& x, const Vector& theta) const {
        if (theta.size() != theta_dim())
            throw DomainError(name() + ": theta has length " + std::to_string(theta.size()) + ", expected " +
                              std::to_string(theta_dim()));
        if (!in_domain(x)) throw DomainError(name() + ": sample outside the family's support");
    }

    void require(bool flag, const char* what) const {
        if (!flag) throw CapabilityError(name() + ": missing capability '" + what + "'");
    }
};

using FamilyPtr = std::shared_ptr<const ModelFamily>;

}  // namespace nncrit::models
