#pragma once

// Likelihood baselines: zero-pattern GGM maximum likelihood, 1-D Gaussian
// mixture EM, and AIC.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "nncrit/error.hpp"
#include "nncrit/linalg.hpp"
#include "nncrit/models/graph.hpp"
#include "nncrit/optim.hpp"
#include "nncrit/random.hpp"

namespace nncrit::baselines {

enum class MleMethod { ClosedForm, Cg, Em };

inline std::string to_string(MleMethod m) {
    switch (m) {
        case MleMethod::ClosedForm: return "closed-form";
        case MleMethod::Cg: return "cg";
        case MleMethod::Em: return "em";
    }
    return "unknown";
}

struct MleFit {
    Vector params;
    double loglik = 0.0;
    int k = 0;
    MleMethod method = MleMethod::ClosedForm;
    std::vector<double> loglik_trace;  // EM only
};

inline double aic(const MleFit& fit) { return -2.0 * fit.loglik + 2.0 * fit.k; }

/// Second-moment matrix X'X / N (the models have mean zero).
inline Matrix second_moment(const Matrix& data) {
    if (data.rows() < 1) throw DomainError("second moment of empty data");
    return linalg::symmetrize(data.transpose() * data / static_cast<double>(data.rows()));
}

/// Zero-mean Gaussian log-likelihood at precision K.
inline double ggm_loglik(const Matrix& k, const Matrix& s, Eigen::Index n) {
    const double d = static_cast<double>(k.rows());
    return 0.5 * static_cast<double>(n) *
           (linalg::logdet_spd(k) - (k * s).trace() - d * std::log(2.0 * std::numbers::pi));
}

/// Maximizes (N/2)[logdet K - tr(KS)] over precision matrices with the
/// graph's zero pattern. params are the pattern entries of K.
inline MleFit fit_ggm_mle(const models::GraphSpec& graph, const Matrix& data, const optim::OptOptions& opts = {}) {
    const int d = graph.nodes();
    if (data.cols() != d) throw DomainError("GGM MLE: data width differs from the graph size");
    const Matrix s = second_moment(data);
    if (!linalg::is_pd(s)) throw NotPositiveDefinite("GGM MLE: sample second-moment matrix is not positive definite");

    MleFit fit;
    fit.k = graph.free_parameters();
    if (graph.edge_count() == d * (d - 1) / 2) {
        fit.method = MleMethod::ClosedForm;
        fit.params = graph.pattern_entries(linalg::solve_spd(s, Matrix::Identity(d, d)));
    } else if (graph.edge_count() == 0) {
        fit.method = MleMethod::ClosedForm;
        fit.params = s.diagonal().cwiseInverse();
    } else {
        fit.method = MleMethod::Cg;
        optim::OptProblem p;
        p.dim = graph.free_parameters();
        p.value_and_gradient = [&](const Vector& th, Vector& g) {
            const Matrix k = graph.precision(th);
            if (!linalg::is_pd(k)) return std::numeric_limits<double>::infinity();
            const Matrix kinv = linalg::solve_spd(k, Matrix::Identity(d, d));
            g.resize(p.dim);
            for (int i = 0; i < d; ++i) g[i] = s(i, i) - kinv(i, i);
            for (int e = 0; e < graph.edge_count(); ++e) {
                const auto [a, b] = graph.edges()[e];
                g[d + e] = 2.0 * (s(a, b) - kinv(a, b));
            }
            return (k * s).trace() - linalg::logdet_spd(k);
        };
        Vector x0 = Vector::Zero(p.dim);
        x0.head(d) = s.diagonal().cwiseInverse();
        const auto res = optim::minimize_cg(p, x0, opts);
        if (res.termination_reason == optim::Termination::LineSearchFailure)
            throw LineSearchFailure("GGM MLE: line search failed");
        fit.params = res.x_star;
    }
    fit.loglik = ggm_loglik(graph.precision(fit.params), s, data.rows());
    return fit;
}

/// Largest violation of the pattern-restricted moment conditions
/// (K^{-1})_ij = S_ij on the diagonal and the edges.
inline double ggm_stationarity_residual(const models::GraphSpec& graph, const Vector& params, const Matrix& data) {
    const int d = graph.nodes();
    const Matrix s = second_moment(data);
    const Matrix kinv = linalg::solve_spd(graph.precision(params), Matrix::Identity(d, d));
    double r = 0.0;
    for (int i = 0; i < d; ++i) r = std::max(r, std::abs(kinv(i, i) - s(i, i)));
    for (const auto& [a, b] : graph.edges()) r = std::max(r, std::abs(kinv(a, b) - s(a, b)));
    return r;
}

struct GmmOptions {
    int restarts = 10;
    int max_iter = 500;
    double tol = 1e-8;
    double min_variance = 1e-6;
};

/// Mixture parameters are packed as (weights, means, variances), components
/// sorted by mean.
struct GmmParams {
    Vector weight, mean, var;

    Vector pack() const {
        Vector p(3 * weight.size());
        p << weight, mean, var;
        return p;
    }
};

inline double gmm_loglik(const GmmParams& g, const Vector& x) {
    const Eigen::Index k = g.weight.size();
    double ll = 0.0;
    std::vector<double> a(k);
    for (Eigen::Index t = 0; t < x.size(); ++t) {
        for (Eigen::Index j = 0; j < k; ++j)
            a[j] = std::log(g.weight[j]) - 0.5 * std::log(2.0 * std::numbers::pi * g.var[j]) -
                   0.5 * (x[t] - g.mean[j]) * (x[t] - g.mean[j]) / g.var[j];
        const double mx = *std::max_element(a.begin(), a.end());
        double s = 0.0;
        for (double v : a) s += std::exp(v - mx);
        ll += mx + std::log(s);
    }
    return ll;
}

namespace detail {

// One EM run from `g`; throws DegenerateComponent on variance collapse.
inline std::vector<double> run_em(GmmParams& g, const Vector& x, const GmmOptions& o) {
    const Eigen::Index n = x.size(), k = g.weight.size();
    Matrix r(n, k);
    std::vector<double> trace{gmm_loglik(g, x)};
    for (int it = 0; it < o.max_iter; ++it) {
        for (Eigen::Index t = 0; t < n; ++t) {
            for (Eigen::Index j = 0; j < k; ++j)
                r(t, j) = std::log(g.weight[j]) - 0.5 * std::log(g.var[j]) -
                          0.5 * (x[t] - g.mean[j]) * (x[t] - g.mean[j]) / g.var[j];
            const double mx = r.row(t).maxCoeff();
            r.row(t) = (r.row(t).array() - mx).exp();
            r.row(t) /= r.row(t).sum();
        }
        for (Eigen::Index j = 0; j < k; ++j) {
            const double nj = r.col(j).sum();
            if (!(nj > 0.0)) throw DegenerateComponent("EM: a component lost all responsibility");
            g.weight[j] = nj / static_cast<double>(n);
            g.mean[j] = r.col(j).dot(x) / nj;
            g.var[j] = r.col(j).dot((x.array() - g.mean[j]).square().matrix()) / nj;
            if (!(g.var[j] >= o.min_variance))
                throw DegenerateComponent("EM: component variance fell below " + std::to_string(o.min_variance));
        }
        trace.push_back(gmm_loglik(g, x));
        if (trace.back() - trace[trace.size() - 2] < o.tol) break;
    }
    return trace;
}

}  // namespace detail

/// EM for a K-component Gaussian mixture on the line, best of `restarts`
/// seeded starts. Starts take K distinct data points as means, the sample
/// variance for every component and equal weights.
inline MleFit fit_gmm_em_1d(int K, const Vector& x, std::uint64_t seed, const GmmOptions& o = {}) {
    const Eigen::Index n = x.size();
    if (K < 1) throw DomainError("EM: need K >= 1");
    if (n < K) throw DomainError("EM: fewer samples than components");
    const double mean = x.mean();
    const double var = (x.array() - mean).square().mean();

    MleFit best;
    best.method = MleMethod::Em;
    best.k = 3 * K - 1;
    bool have = false;
    GmmParams best_params;
    std::string last_error;
    simlab::Rng rng(seed, simlab::stream_id(0, simlab::kRoleFit));
    for (int rs = 0; rs < o.restarts; ++rs) {
        GmmParams g{Vector::Constant(K, 1.0 / K), Vector(K), Vector::Constant(K, var)};
        std::vector<Eigen::Index> picked;
        for (int j = 0; j < K; ++j) {
            Eigen::Index idx;
            int guard = 0;
            do {
                idx = static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(n));
            } while (++guard < 100 && std::find(picked.begin(), picked.end(), idx) != picked.end());
            picked.push_back(idx);
            g.mean[j] = x[idx];
        }
        if (!(var >= o.min_variance)) {
            last_error = "sample variance below the component floor";
            continue;
        }
        std::vector<double> trace;
        try {
            trace = detail::run_em(g, x, o);
        } catch (const DegenerateComponent& e) {
            last_error = e.what();
            continue;
        }
        if (!have || trace.back() > best.loglik) {
            have = true;
            best.loglik = trace.back();
            best.loglik_trace = std::move(trace);
            best_params = g;
        }
    }
    if (!have) throw DegenerateComponent("EM: every restart degenerated (" + last_error + ")");

    std::vector<int> order(K);
    for (int j = 0; j < K; ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return best_params.mean[a] < best_params.mean[b]; });
    GmmParams sorted{Vector(K), Vector(K), Vector(K)};
    for (int j = 0; j < K; ++j) {
        sorted.weight[j] = best_params.weight[order[j]];
        sorted.mean[j] = best_params.mean[order[j]];
        sorted.var[j] = best_params.var[order[j]];
    }
    best.params = sorted.pack();
    return best;
}

}  // namespace nncrit::baselines
