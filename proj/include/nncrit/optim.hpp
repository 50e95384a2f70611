#pragma once

// Nonlinear conjugate gradient (Polak-Ribiere-plus) with a strong-Wolfe line
// search, and a central-difference gradient checker.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "nncrit/error.hpp"
#include "nncrit/linalg.hpp"

namespace nncrit::optim {

/// Objective returning +inf marks an infeasible point; the line search
/// backtracks from it. NaN anywhere is an error.
struct OptProblem {
    int dim = 0;
    std::function<double(const Vector&)> objective;
    std::function<Vector(const Vector&)> gradient;
    /// Optional fused evaluation; writes the gradient only when the value is finite.
    std::function<double(const Vector&, Vector&)> value_and_gradient;

    double value(const Vector& x) const {
        if (objective) return objective(x);
        Vector g;
        return value_and_gradient(x, g);
    }

    double evaluate(const Vector& x, Vector& g) const {
        if (value_and_gradient) return value_and_gradient(x, g);
        const double f = objective(x);
        if (std::isfinite(f)) g = gradient(x);
        return f;
    }
};

enum class Termination { GradTol, MaxIter, LineSearchFailure };

inline std::string to_string(Termination t) {
    switch (t) {
        case Termination::GradTol: return "grad-tol";
        case Termination::MaxIter: return "max-iter";
        case Termination::LineSearchFailure: return "line-search-failure";
    }
    return "unknown";
}

struct OptOptions {
    double grad_tol = 1e-7;  // on the infinity norm
    int max_iter = 2000;
    int restart_every = 0;  // 0: problem dimension
    double c1 = 1e-4;
    double c2 = 0.1;
    int max_line_search = 60;
};

struct OptResult {
    Vector x_star;
    double f_star = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    Termination termination_reason = Termination::MaxIter;
    Vector gradient;
};

namespace detail {

struct LinePoint {
    double alpha = 0.0;
    double f = 0.0;
    double slope = 0.0;  // phi'(alpha); NaN when f is infinite
    Vector x, g;
};

// Minimizer of the cubic interpolating (a, fa, da) and (b, fb, db); NaN when
// the cubic has no real minimizer.
inline double cubic_minimizer(double a, double fa, double da, double b, double fb, double db) {
    const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
    const double disc = d1 * d1 - da * db;
    if (disc < 0.0) return std::numeric_limits<double>::quiet_NaN();
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    return b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
}

class LineSearch {
public:
    LineSearch(const OptProblem& p, const OptOptions& o, const Vector& x0, double f0, const Vector& d, double slope0)
        : p_(p), o_(o), x0_(x0), d_(d), f0_(f0), slope0_(slope0) {}

    /// Returns true with the accepted point in `out`, false when no acceptable
    /// step was found. `out` then holds the best strictly lower point, if any.
    bool run(double alpha0, LinePoint& out) {
        LinePoint prev{0.0, f0_, slope0_, x0_, {}};
        double alpha = alpha0;
        for (int i = 0; i < o_.max_line_search; ++i) {
            LinePoint cur = eval(alpha);
            if (!std::isfinite(cur.f) || cur.f > f0_ + o_.c1 * alpha * slope0_ || (i > 0 && cur.f >= prev.f))
                return zoom(prev, cur, out);
            if (std::abs(cur.slope) <= -o_.c2 * slope0_) {
                out = std::move(cur);
                return true;
            }
            if (cur.slope >= 0.0) return zoom(cur, prev, out);
            note_best(cur);
            prev = std::move(cur);
            alpha *= 2.0;
        }
        return give_up(out);
    }

private:
    LinePoint eval(double alpha) {
        LinePoint pt;
        pt.alpha = alpha;
        pt.x = x0_ + alpha * d_;
        pt.f = p_.evaluate(pt.x, pt.g);
        if (std::isnan(pt.f)) throw NonFiniteObjective("objective is NaN during line search");
        if (pt.f == -std::numeric_limits<double>::infinity())
            throw NonFiniteObjective("objective is -inf during line search");
        if (std::isfinite(pt.f)) {
            if (!pt.g.allFinite()) throw NonFiniteObjective("gradient is not finite during line search");
            pt.slope = pt.g.dot(d_);
        } else {
            pt.slope = std::numeric_limits<double>::quiet_NaN();
        }
        return pt;
    }

    void note_best(const LinePoint& pt) {
        if (std::isfinite(pt.f) && pt.f < f0_ && (!have_best_ || pt.f < best_.f)) {
            best_ = pt;
            have_best_ = true;
        }
    }

    bool give_up(LinePoint& out) {
        if (have_best_) out = best_;
        return false;
    }

    // lo: lowest finite point satisfying sufficient decrease so far.
    bool zoom(LinePoint lo, LinePoint hi, LinePoint& out) {
        for (int i = 0; i < o_.max_line_search; ++i) {
            const double a = lo.alpha, b = hi.alpha;
            const double width = std::abs(b - a);
            if (width * d_.lpNorm<Eigen::Infinity>() <= 1e-16 * (1.0 + x0_.lpNorm<Eigen::Infinity>())) break;
            double trial = std::numeric_limits<double>::quiet_NaN();
            if (std::isfinite(hi.f)) trial = cubic_minimizer(a, lo.f, lo.slope, b, hi.f, hi.slope);
            const double lo_edge = std::min(a, b) + 0.1 * width, hi_edge = std::max(a, b) - 0.1 * width;
            if (!std::isfinite(trial) || trial < lo_edge || trial > hi_edge) trial = 0.5 * (a + b);

            LinePoint cur = eval(trial);
            if (!std::isfinite(cur.f) || cur.f > f0_ + o_.c1 * cur.alpha * slope0_ || cur.f >= lo.f) {
                // Roundoff fallback near a minimizer: f is flat to machine
                // precision but the point is not higher and the curvature
                // condition holds.
                if (std::isfinite(cur.f) && cur.f <= f0_ && std::abs(cur.slope) <= -o_.c2 * slope0_) {
                    out = std::move(cur);
                    return true;
                }
                hi = std::move(cur);
                continue;
            }
            if (std::abs(cur.slope) <= -o_.c2 * slope0_) {
                out = std::move(cur);
                return true;
            }
            note_best(cur);
            if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
            lo = std::move(cur);
        }
        if (lo.alpha > 0.0) note_best(lo);
        return give_up(out);
    }

    const OptProblem& p_;
    const OptOptions& o_;
    const Vector& x0_;
    const Vector& d_;
    double f0_, slope0_;
    LinePoint best_;
    bool have_best_ = false;
};

}  // namespace detail

/// Minimizes problem.objective from x0.
///
/// Accepted steps never increase f. Throws NonFiniteObjective if f(x0) is not
/// finite or any evaluation produces NaN. A line search that finds no lower
/// point from a steepest-descent direction ends the run with
/// Termination::LineSearchFailure.
inline OptResult minimize_cg(const OptProblem& problem, const Vector& x0, const OptOptions& opts = {}) {
    if (x0.size() != problem.dim) throw DomainError("minimize_cg: start point has the wrong dimension");
    OptResult res;
    res.x_star = x0;
    Vector g;
    double f = problem.evaluate(x0, g);
    if (!std::isfinite(f)) throw NonFiniteObjective("objective is not finite at the start point");
    if (g.size() != problem.dim || !g.allFinite()) throw NonFiniteObjective("gradient is not finite at the start point");

    const int restart = opts.restart_every > 0 ? opts.restart_every : std::max(1, problem.dim);
    Vector x = x0, d = -g;
    double prev_slope = 0.0, prev_alpha = 0.0;
    int since_restart = 0;
    bool steepest = true;

    auto finish = [&](Termination t, int iters) {
        res.x_star = x;
        res.f_star = f;
        res.gradient = g;
        res.grad_norm = linalg::inf_norm(g);
        res.iterations = iters;
        res.termination_reason = t;
        res.converged = t == Termination::GradTol;
        return res;
    };

    for (int it = 0; it < opts.max_iter; ++it) {
        if (linalg::inf_norm(g) <= opts.grad_tol) return finish(Termination::GradTol, it);

        double slope = g.dot(d);
        if (!(slope < 0.0)) {
            d = -g;
            slope = -g.squaredNorm();
            steepest = true;
        }

        double alpha0;
        if (it == 0) alpha0 = std::min(1.0, 1.0 / std::max(1e-300, linalg::inf_norm(g)));
        else alpha0 = prev_alpha * prev_slope / slope;
        if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) alpha0 = 1.0;

        detail::LinePoint pt;
        detail::LineSearch ls(problem, opts, x, f, d, slope);
        const bool ok = ls.run(alpha0, pt);
        if (!ok) {
            if (pt.x.size() == x.size() && pt.f < f) {
                // Take the lower point but restart along the gradient.
                x = std::move(pt.x);
                f = pt.f;
                g = std::move(pt.g);
                d = -g;
                prev_slope = -g.squaredNorm();
                prev_alpha = pt.alpha;
                since_restart = 0;
                steepest = true;
                continue;
            }
            if (steepest) return finish(Termination::LineSearchFailure, it);
            d = -g;
            since_restart = 0;
            steepest = true;
            continue;
        }

        Vector g_new = std::move(pt.g);
        x = std::move(pt.x);
        f = pt.f;
        prev_alpha = pt.alpha;
        prev_slope = slope;

        ++since_restart;
        double beta = 0.0;
        if (since_restart < restart) {
            const double denom = g.squaredNorm();
            beta = std::max(0.0, g_new.dot(g_new - g) / denom);
        }
        if (beta == 0.0) since_restart = 0;
        d = -g_new + beta * d;
        steepest = beta == 0.0;
        g = std::move(g_new);
    }
    if (linalg::inf_norm(g) <= opts.grad_tol) return finish(Termination::GradTol, opts.max_iter);
    return finish(Termination::MaxIter, opts.max_iter);
}

/// Largest coordinate-wise relative error |a - n| / max(1, |a|, |n|) between
/// the analytic gradient a and the central difference n with step h.
inline double check_gradient(const OptProblem& problem, const Vector& x, double h = 1e-5) {
    Vector a;
    if (problem.gradient) a = problem.gradient(x);
    else problem.value_and_gradient(x, a);
    double worst = 0.0;
    Vector xp = x, xm = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + h;
        xm[i] = x[i] - h;
        const double n = (problem.value(xp) - problem.value(xm)) / (2.0 * h);
        xp[i] = xm[i] = x[i];
        const double err = std::abs(a[i] - n) / std::max({1.0, std::abs(a[i]), std::abs(n)});
        worst = std::max(worst, std::isnan(err) ? std::numeric_limits<double>::infinity() : err);
    }
    return worst;
}

}  // namespace nncrit::optim
