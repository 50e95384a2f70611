#pragma once

// Noise contrastive estimation of (theta, c) and its information criteria.

#include <cmath>
#include <optional>
#include <string>

#include "nncrit/error.hpp"
#include "nncrit/linalg.hpp"
#include "nncrit/models/extended.hpp"
#include "nncrit/noise.hpp"
#include "nncrit/optim.hpp"

namespace nncrit::nce {

using models::ExtendedModel;

/// log(1 + e^u) without overflow.
inline double softplus(double u) { return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

inline double sigmoid(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

/// u = log(N p(z)) - log(M n(z)); the classifier's log-odds for "data".
inline double logit(double log_p, double log_n, double n_data, double n_noise) {
    if (log_n == -std::numeric_limits<double>::infinity())
        throw NoiseDensityZero("noise density is zero at an evaluation point");
    return std::log(n_data) + log_p - std::log(n_noise) - log_n;
}

/// -log(N p / (N p + M n)) at a data point.
inline double rho_d(const Vector& x, const Vector& xi, double n_data, double n_noise, const ExtendedModel& model,
                    const NoiseSpec& noise) {
    return softplus(-logit(model.log_density(x, xi), noise.log_density(x), n_data, n_noise));
}

/// -log(M n / (N p + M n)) at a noise point.
inline double rho_n(const Vector& y, const Vector& xi, double n_data, double n_noise, const ExtendedModel& model,
                    const NoiseSpec& noise) {
    return softplus(logit(model.log_density(y, xi), noise.log_density(y), n_data, n_noise));
}

struct NceFit {
    Vector xi_hat;
    models::ExtendedParams params;
    double objective_value = 0.0;
    Eigen::Index N = 0, M = 0;
    optim::OptResult opt;
};

/// Data, noise samples and their precomputations for one model. Holds
/// references: the model, data, noise samples and noise spec must outlive it.
class NceProblem {
public:
    // Holds references; temporaries would dangle.
    NceProblem(const ExtendedModel&&, const Matrix&, const Matrix&, const NoiseSpec&) = delete;
    NceProblem(const ExtendedModel&, const Matrix&&, const Matrix&, const NoiseSpec&) = delete;
    NceProblem(const ExtendedModel&, const Matrix&, const Matrix&&, const NoiseSpec&) = delete;
    NceProblem(const ExtendedModel& model, const Matrix& data, const Matrix& noise_samples, const NoiseSpec& noise)
        : model_(model), data_(data), noise_samples_(noise_samples), noise_(noise) {
        if (data.rows() < 1) throw DomainError("NCE: data is empty");
        if (noise_samples.rows() < 1) throw DomainError("NCE: no noise samples");
        if (noise.dim() != model.family().data_dim()) throw DomainError("NCE: noise dimension differs from the model's");
        prep_d_ = model.prepare(data);
        prep_n_ = model.prepare(noise_samples);
        log_n_d_ = noise.log_density_rows(data);
        log_n_n_ = noise.log_density_rows(noise_samples);
        if ((log_n_d_.array() == -std::numeric_limits<double>::infinity()).any() ||
            (log_n_n_.array() == -std::numeric_limits<double>::infinity()).any())
            throw NoiseDensityZero("noise density is zero at a data or noise point");
    }

    const ExtendedModel& model() const { return model_; }
    const Matrix& data() const { return data_; }
    const Matrix& noise_samples() const { return noise_samples_; }
    const NoiseSpec& noise() const { return noise_; }
    Eigen::Index N() const { return data_.rows(); }
    Eigen::Index M() const { return noise_samples_.rows(); }

    /// Classifier log-odds at data and noise points, with optional score
    /// matrices. `exclude` >= 0 drops data point and noise point with that
    /// index from the sample sizes (used by the LOOCV folds).
    void logits(const Vector& xi, Vector& ud, Vector& un, Matrix* sd, Matrix* sn, Eigen::Index exclude = -1) const {
        model_.evaluate(prep_d_, xi, ud, sd);
        model_.evaluate(prep_n_, xi, un, sn);
        const double off = log_odds_offset(exclude);
        ud.array() += off - log_n_d_.array();
        un.array() += off - log_n_n_.array();
    }

    /// (1/N)[sum rho_d + sum rho_n]; +inf at infeasible xi.
    double objective(const Vector& xi, Eigen::Index exclude = -1) const {
        if (!model_.feasible(xi)) return std::numeric_limits<double>::infinity();
        Vector ud, un;
        logits(xi, ud, un, nullptr, nullptr, exclude);
        return assemble(ud, un, exclude);
    }

    double objective_and_gradient(const Vector& xi, Vector& g, Eigen::Index exclude = -1) const {
        if (!model_.feasible(xi)) return std::numeric_limits<double>::infinity();
        Vector ud, un;
        Matrix sd, sn;
        logits(xi, ud, un, &sd, &sn, exclude);
        Vector wd(ud.size()), wn(un.size());
        for (Eigen::Index t = 0; t < ud.size(); ++t) wd[t] = -sigmoid(-ud[t]);
        for (Eigen::Index t = 0; t < un.size(); ++t) wn[t] = sigmoid(un[t]);
        if (exclude >= 0) wd[exclude] = wn[exclude] = 0.0;
        g.noalias() = sd.transpose() * wd;
        g.noalias() += sn.transpose() * wn;
        g /= effective_n(exclude);
        return assemble(ud, un, exclude);
    }

    optim::OptProblem opt_problem(Eigen::Index exclude = -1) const {
        optim::OptProblem p;
        p.dim = model_.dim();
        p.objective = [this, exclude](const Vector& xi) { return objective(xi, exclude); };
        p.value_and_gradient = [this, exclude](const Vector& xi, Vector& g) {
            return objective_and_gradient(xi, g, exclude);
        };
        return p;
    }

    /// Family default theta with every c shifted by the importance-sampling
    /// estimate -log mean_y[p(y) / n(y)], so the classifier starts balanced
    /// on the noise sample.
    Vector default_start() const {
        Vector xi = model_.default_start();
        Vector ln;
        model_.evaluate(prep_n_, xi, ln, nullptr);
        ln -= log_n_n_;
        const double top = ln.maxCoeff();
        if (!std::isfinite(top)) return xi;
        const double log_mean = top + std::log((ln.array() - top).exp().mean());
        xi.tail(model_.components()).array() -= log_mean;
        return xi;
    }

    NceFit fit(const std::optional<Vector>& start = std::nullopt, const optim::OptOptions& opts = {},
               Eigen::Index exclude = -1) const {
        const Vector x0 = start ? *start : default_start();
        if (x0.size() != model_.dim()) throw DomainError("NCE: start point has the wrong dimension");
        if (!model_.feasible(x0)) throw DomainError("NCE: start point is infeasible");
        NceFit f;
        f.opt = optim::minimize_cg(opt_problem(exclude), x0, opts);
        if (f.opt.termination_reason == optim::Termination::LineSearchFailure)
            throw LineSearchFailure("NCE fit of " + model_.family().name() + ": line search failed with gradient norm " +
                                    std::to_string(f.opt.grad_norm));
        f.xi_hat = model_.canonical(f.opt.x_star);
        f.params = model_.split(f.xi_hat);
        f.objective_value = f.opt.f_star;
        f.N = N() - (exclude >= 0 ? 1 : 0);
        f.M = M() - (exclude >= 0 ? 1 : 0);
        return f;
    }

    /// Centered gradient covariance, (1/(N+M)) sum over both strata.
    Matrix I_hat(const Vector& xi) const {
        Vector ud, un;
        Matrix sd, sn;
        logits(xi, ud, un, &sd, &sn);
        for (Eigen::Index t = 0; t < ud.size(); ++t) sd.row(t) *= -sigmoid(-ud[t]);
        for (Eigen::Index t = 0; t < un.size(); ++t) sn.row(t) *= sigmoid(un[t]);
        const Matrix cd = sd.rowwise() - sd.colwise().mean();
        const Matrix cn = sn.rowwise() - sn.colwise().mean();
        Matrix i = cd.transpose() * cd + cn.transpose() * cn;
        i /= static_cast<double>(N() + M());
        return linalg::symmetrize(i);
    }

    /// (1/(N+M)) [sum Hess rho_d + sum Hess rho_n].
    Matrix J_hat(const Vector& xi) const {
        Vector ud, un;
        Matrix sd, sn;
        logits(xi, ud, un, &sd, &sn);
        // Outer-product part: sigma (1 - sigma) s s' on both strata.
        Vector wd(ud.size()), wn(un.size());
        for (Eigen::Index t = 0; t < ud.size(); ++t) wd[t] = sig_prod(ud[t]);
        for (Eigen::Index t = 0; t < un.size(); ++t) wn[t] = sig_prod(un[t]);
        Matrix j = sd.transpose() * wd.asDiagonal() * sd + sn.transpose() * wn.asDiagonal() * sn;
        // Curvature of log p, absent for single-component linear families.
        const bool curved = model_.is_mixture() || !model_.family().capabilities().linear_in_theta;
        if (curved) {
            for (Eigen::Index t = 0; t < ud.size(); ++t)
                j -= sigmoid(-ud[t]) * model_.hessian(data_.row(t).transpose(), xi);
            for (Eigen::Index t = 0; t < un.size(); ++t)
                j += sigmoid(un[t]) * model_.hessian(noise_samples_.row(t).transpose(), xi);
        }
        j /= static_cast<double>(N() + M());
        return linalg::symmetrize(j);
    }

    /// b(z) = (N+M)^2/(NM) sigma(1 - sigma) at every data and noise point.
    void b_hat(const Vector& xi, Vector& bd, Vector& bn) const {
        Vector ud, un;
        logits(xi, ud, un, nullptr, nullptr);
        const double scale = square(static_cast<double>(N() + M())) / (static_cast<double>(N()) * M());
        bd.resize(ud.size());
        bn.resize(un.size());
        for (Eigen::Index t = 0; t < ud.size(); ++t) bd[t] = scale * sig_prod(ud[t]);
        for (Eigen::Index t = 0; t < un.size(); ++t) bn[t] = scale * sig_prod(un[t]);
    }

    /// tr(I J^{-1}).
    double penalty1(const Vector& xi) const { return linalg::trace_product_inv(I_hat(xi), J_hat(xi)); }

    /// m - (1/(N+M)) sum b(z), with m = K (dim theta_1 + 1).
    double penalty2(const Vector& xi) const {
        Vector bd, bn;
        b_hat(xi, bd, bn);
        return model_.dim() - (bd.sum() + bn.sum()) / static_cast<double>(N() + M());
    }

    double ncic1(const NceFit& f) const { return N() * f.objective_value + penalty1(f.xi_hat); }
    double ncic2(const NceFit& f) const { return N() * f.objective_value + penalty2(f.xi_hat); }

    /// Leave-one-out NCE: fold t drops data point t and noise point t; each
    /// refit starts at the full-data estimate.
    double loocv(const NceFit& full, const optim::OptOptions& opts = {}) const {
        if (M() != N()) throw DomainError("NCE-CV requires as many noise samples as data points");
        if (N() < 2) throw EmptyFold("NCE-CV: a fold with N = 1 leaves no data");
        double total = 0.0;
        Vector ud, un;
        for (Eigen::Index t = 0; t < N(); ++t) {
            const NceFit ft = fit(full.xi_hat, opts, t);
            logits(ft.xi_hat, ud, un, nullptr, nullptr);
            total += softplus(-ud[t]) + softplus(un[t]);
        }
        return total;
    }

private:
    static double square(double v) { return v * v; }
    static double sig_prod(double u) { return sigmoid(u) * sigmoid(-u); }

    double effective_n(Eigen::Index exclude) const { return static_cast<double>(N() - (exclude >= 0 ? 1 : 0)); }

    double log_odds_offset(Eigen::Index exclude) const {
        const double drop = exclude >= 0 ? 1.0 : 0.0;
        return std::log(static_cast<double>(N()) - drop) - std::log(static_cast<double>(M()) - drop);
    }

    // Neumaier-compensated sum: with M in the tens of thousands, plain
    // accumulation leaves noise in f comparable to the decrease a line search
    // must resolve near the optimum.
    double assemble(const Vector& ud, const Vector& un, Eigen::Index exclude) const {
        double s = 0.0, comp = 0.0;
        auto add = [&](double v) {
            const double t = s + v;
            comp += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
            s = t;
        };
        for (Eigen::Index t = 0; t < ud.size(); ++t)
            if (t != exclude) add(softplus(-ud[t]));
        for (Eigen::Index t = 0; t < un.size(); ++t)
            if (t != exclude) add(softplus(un[t]));
        return (s + comp) / effective_n(exclude);
    }

    const ExtendedModel& model_;
    const Matrix& data_;
    const Matrix& noise_samples_;
    const NoiseSpec& noise_;
    ExtendedModel::Prepared prep_d_, prep_n_;
    Vector log_n_d_, log_n_n_;
};

// Free-function forms.

inline double nce_objective(const Matrix& data, const Matrix& noise_samples, const Vector& xi,
                            const ExtendedModel& model, const NoiseSpec& noise) {
    return NceProblem(model, data, noise_samples, noise).objective(xi);
}

inline Vector nce_gradient(const Matrix& data, const Matrix& noise_samples, const Vector& xi,
                           const ExtendedModel& model, const NoiseSpec& noise) {
    Vector g;
    const double f = NceProblem(model, data, noise_samples, noise).objective_and_gradient(xi, g);
    if (!std::isfinite(f)) throw DomainError("nce_gradient: xi is infeasible");
    return g;
}

inline NceFit fit_nce(const ExtendedModel& model, const Matrix& data, const Matrix& noise_samples,
                      const NoiseSpec& noise, const std::optional<Vector>& start = std::nullopt,
                      const optim::OptOptions& opts = {}) {
    return NceProblem(model, data, noise_samples, noise).fit(start, opts);
}

/// Draws M noise samples from `noise` on the given RNG stream, then fits.
inline NceFit fit_nce(const ExtendedModel& model, const Matrix& data, const NoiseSpec& noise, Eigen::Index M,
                      std::uint64_t seed, const std::optional<Vector>& start = std::nullopt,
                      const optim::OptOptions& opts = {}) {
    simlab::Rng rng(seed, simlab::stream_id(0, simlab::kRoleNoise));
    const Matrix y = noise.sample(M, rng);
    return fit_nce(model, data, y, noise, start, opts);
}

}  // namespace nncrit::nce
