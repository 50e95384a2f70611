#pragma once

// Replicated experiments: bias of the criteria, edge selection, mixture
// order selection and torus dependence.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "nncrit/baselines.hpp"
#include "nncrit/models/registry.hpp"
#include "nncrit/nce.hpp"
#include "nncrit/simlab/harness.hpp"
#include "nncrit/simlab/quadrature.hpp"
#include "nncrit/simlab/samplers.hpp"
#include "nncrit/sm.hpp"

namespace nncrit::simlab {

enum class Experiment { BiasNce, BiasSm, EdgesGgm, EdgesTggm, MixtureK, BvmDependence, LogGgmVsTggm };

inline std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::BiasNce: return "bias-nce";
        case Experiment::BiasSm: return "bias-sm";
        case Experiment::EdgesGgm: return "edges-ggm";
        case Experiment::EdgesTggm: return "edges-tggm";
        case Experiment::MixtureK: return "mixture-k";
        case Experiment::BvmDependence: return "bvm-dependence";
        case Experiment::LogGgmVsTggm: return "loggm-vs-tggm";
    }
    return "?";
}

inline Experiment parse_experiment(const std::string& s) {
    for (auto e : {Experiment::BiasNce, Experiment::BiasSm, Experiment::EdgesGgm, Experiment::EdgesTggm,
                   Experiment::MixtureK, Experiment::BvmDependence, Experiment::LogGgmVsTggm})
        if (to_string(e) == s) return e;
    throw ParseError("unknown experiment '" + s + "'");
}

struct ExperimentConfig {
    Experiment experiment = Experiment::BiasNce;
    Eigen::Index N = 1000;
    Eigen::Index M = 1000;
    std::size_t replicates = 2000;
    std::uint64_t master_seed = 1;
    unsigned workers = 0;  // 0 = all cores
    std::vector<double> eps{0.0, 0.05, 0.1, 0.2};
    double sigma12 = 0.5;
    std::vector<int> k_grid{1, 2, 3, 4};
    bool cv = false;  // also score candidates by leave-one-out CV
    BvmParams bvm{0.813, 0.440, 1.120, 4.644, -0.965};

    void validate() const {
        if (replicates < 1) throw DomainError("config: replicates must be >= 1");
        if (N < 2) throw DomainError("config: N must be >= 2");
        if (M < 1) throw DomainError("config: M must be >= 1");
        for (double e : eps)
            if (!(e >= 0.0 && e <= 1.0)) throw DomainError("config: eps values must lie in [0,1]");
        if (!(std::abs(sigma12) < 1.0)) throw DomainError("config: |sigma12| must be < 1");
        if (!(1.0 - sigma12 * sigma12 - 0.55 * 0.55 > 0.0))
            throw DomainError("config: sigma12 makes the precision matrix indefinite");
        if (k_grid.empty()) throw DomainError("config: empty K grid");
        for (int k : k_grid)
            if (k < 1 || k > 10) throw DomainError("config: K values must lie in 1..10");
        if (cv && M != N) throw DomainError("config: leave-one-out CV pairs data and noise, so it needs M = N");
    }
};

/// Desk-scale defaults for each experiment.
inline ExperimentConfig default_config(Experiment e) {
    ExperimentConfig c;
    c.experiment = e;
    switch (e) {
        case Experiment::BiasNce:
        case Experiment::BiasSm: c.N = c.M = 1000; c.replicates = 2000; break;
        case Experiment::EdgesGgm:
        case Experiment::EdgesTggm: c.N = c.M = 1000; c.replicates = 200; break;
        case Experiment::MixtureK: c.N = 1000; c.M = 10000; c.replicates = 50; break;
        case Experiment::BvmDependence: c.N = 365; c.M = 1000; c.replicates = 50; break;
        case Experiment::LogGgmVsTggm: c.N = c.M = 1000; c.replicates = 50; break;
    }
    return c;
}

/// Independent 64-bit seed for sub-task `index` of a run.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// ---------------------------------------------------------------- bias

struct BiasPoint {
    double eps = 0.0;
    MeanSd B;        // control-variate estimate, see run_bias_experiment
    MeanSd B_plain;  // N [d_hat(fit) - d(q, p_fit)]
    MeanSd b_hat1;  // -tr(I J^-1)
    MeanSd b_hat2;  // NCE only: -penalty2
    std::size_t failures = 0;
};

struct BiasCurve {
    std::string estimator;  // "nce" or "sm"
    Eigen::Index N = 0, M = 0;
    std::size_t replicates = 0;
    std::vector<BiasPoint> points;
    std::vector<std::string> warnings;
    bool incomplete = false;
};

namespace detail {

struct BiasRep {
    double B = 0.0, B_plain = 0.0, b1 = 0.0, b2 = 0.0;
};

inline void collect_warning(std::vector<std::string>& w, const std::string& msg) {
    if (w.size() < 100) w.push_back(msg);
}

}  // namespace detail

/// Data from (1-eps) N(0,1) + eps N(0,10) fitted by the non-normalized
/// Gaussian. NCE uses N(0,1) noise with fresh draws per replicate.
///
/// Each replicate's N [d_hat(fit) - d(q, p_fit)] is corrected by subtracting
/// N [d_hat(star) - d(q, p_star)] at the population minimizer. d_hat is
/// unbiased at a fixed parameter, so the correction has mean zero and only
/// removes the O(sqrt N) sampling noise of d_hat.
inline BiasCurve run_bias_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const bool use_nce = cfg.experiment == Experiment::BiasNce;
    if (!use_nce && cfg.experiment != Experiment::BiasSm) throw DomainError("run_bias_experiment: not a bias config");
    BiasCurve curve;
    curve.estimator = use_nce ? "nce" : "sm";
    curve.N = cfg.N;
    curve.M = use_nce ? cfg.M : 0;
    curve.replicates = cfg.replicates;

    const models::ExtendedModel model(std::make_shared<models::NNGaussian1D>());
    const auto noise = nce::NoiseSpec::gaussian(Vector::Zero(1), Matrix::Identity(1, 1));
    const double n = static_cast<double>(cfg.N);

    for (std::size_t e = 0; e < cfg.eps.size(); ++e) {
        const double eps = cfg.eps[e];
        const auto q = [eps](double x) { return contaminated_gaussian_density(x, eps); };
        const double var_q = 1.0 - eps + 10.0 * eps;
        Vector star;
        double pop_star = 0.0;
        if (use_nce) {
            Vector start(3);
            start << -0.5 / var_q, 0.0, -0.5 * std::log(2.0 * std::numbers::pi * var_q);
            star = nce_population_minimizer(q, model, noise, n, static_cast<double>(cfg.M), start);
            pop_star = d_nce_population(q, model, star, noise, n, static_cast<double>(cfg.M));
        } else {
            star = sm_population_minimizer(q, model.family());
            pop_star = d_sm_population(q, star, model.family());
        }
        const auto outcomes = run_replicates(cfg.replicates, cfg.workers, [&](std::size_t r) {
            const std::uint64_t rep = (static_cast<std::uint64_t>(e) << 40) | r;
            Rng drng(cfg.master_seed, stream_id(rep, kRoleData));
            const Matrix x = sample_contaminated_gaussian(cfg.N, eps, drng);
            detail::BiasRep out;
            if (use_nce) {
                Rng nrng(cfg.master_seed, stream_id(rep, kRoleNoise));
                const Matrix y = noise.sample(cfg.M, nrng);
                const nce::NceProblem prob(model, x, y, noise);
                const auto fit = prob.fit();
                const double pop = d_nce_population(q, model, fit.xi_hat, noise, n, static_cast<double>(cfg.M));
                out.B_plain = n * (fit.objective_value - pop);
                out.B = out.B_plain - n * (prob.objective(star) - pop_star);
                out.b1 = -prob.penalty1(fit.xi_hat);
                out.b2 = -prob.penalty2(fit.xi_hat);
            } else {
                const sm::SmProblem prob(model.family(), x);
                const auto fit = prob.fit();
                const double pop = d_sm_population(q, fit.theta_hat, model.family());
                out.B_plain = n * (fit.objective_value - pop);
                out.B = out.B_plain - n * (prob.objective(star) - pop_star);
                out.b1 = -prob.penalty(fit.theta_hat);
            }
            return out;
        });
        BiasPoint pt;
        pt.eps = eps;
        std::vector<double> B, B_plain, b1, b2;
        for (std::size_t r = 0; r < outcomes.size(); ++r) {
            if (!outcomes[r].value) {
                ++pt.failures;
                curve.incomplete = true;
                detail::collect_warning(curve.warnings, "eps=" + std::to_string(eps) + " replicate " +
                                                            std::to_string(r) + ": " + outcomes[r].error);
                continue;
            }
            B.push_back(outcomes[r].value->B);
            B_plain.push_back(outcomes[r].value->B_plain);
            b1.push_back(outcomes[r].value->b1);
            if (use_nce) b2.push_back(outcomes[r].value->b2);
        }
        pt.B = mean_sd(B);
        pt.B_plain = mean_sd(B_plain);
        pt.b_hat1 = mean_sd(b1);
        pt.b_hat2 = mean_sd(b2);
        curve.points.push_back(pt);
    }
    return curve;
}

// ---------------------------------------------------------------- selection

/// Selection frequencies over replicates. cells are edges "(i,j)" for graph
/// selection and candidate labels otherwise.
struct SelectionTable {
    std::string experiment;
    std::vector<std::string> candidates;
    std::vector<std::string> criteria;
    std::vector<std::string> cells;
    std::vector<std::vector<double>> frequency;   // [criterion][cell]
    std::vector<std::vector<Interval>> ci;        // [criterion][cell]
    std::vector<std::size_t> counted;             // replicates with a selection, per criterion
    std::vector<std::vector<int>> selected;       // [criterion][replicate]; -1 when none
    std::vector<std::vector<std::vector<double>>> values;  // [criterion][replicate][candidate]; NaN on failure
    std::vector<double> seconds;                  // summed wall-clock per criterion
    std::size_t replicates = 0;
    std::size_t failed_replicates = 0;
    std::vector<std::string> warnings;
    bool incomplete = false;

    int criterion_index(const std::string& name) const {
        for (std::size_t i = 0; i < criteria.size(); ++i)
            if (criteria[i] == name) return static_cast<int>(i);
        return -1;
    }
    double freq(const std::string& criterion, const std::string& cell) const {
        const int c = criterion_index(criterion);
        if (c < 0) throw DomainError("SelectionTable: no criterion '" + criterion + "'");
        for (std::size_t j = 0; j < cells.size(); ++j)
            if (cells[j] == cell) return frequency[c][j];
        throw DomainError("SelectionTable: no cell '" + cell + "'");
    }
    /// Fraction of replicates, among those where both selected something,
    /// in which criteria a and b chose the same candidate.
    double agreement(const std::string& a, const std::string& b) const {
        const int ia = criterion_index(a), ib = criterion_index(b);
        if (ia < 0 || ib < 0) throw DomainError("SelectionTable: unknown criterion");
        std::size_t both = 0, same = 0;
        for (std::size_t r = 0; r < replicates; ++r) {
            const int sa = selected[ia][r], sb = selected[ib][r];
            if (sa < 0 || sb < 0) continue;
            ++both;
            same += sa == sb;
        }
        return both ? static_cast<double>(same) / both : 0.0;
    }
};

namespace detail {

struct SelectionRep {
    std::vector<std::vector<double>> values;  // [criterion][candidate]
    std::vector<double> seconds;              // [criterion]
    std::vector<std::string> warnings;
};

class Stopwatch {
public:
    Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_;
};

/// First index of the minimum among finite values; ties go to the earlier
/// candidate. -1 when nothing is finite.
inline int argmin_finite(const std::vector<double>& v) {
    int best = -1;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (std::isfinite(v[i]) && (best < 0 || v[i] < v[best])) best = static_cast<int>(i);
    return best;
}

/// cell_hit(candidate, cell) says whether choosing the candidate counts for
/// the cell.
template <class CellHit>
SelectionTable tabulate(std::string experiment, std::vector<std::string> candidates, std::vector<std::string> criteria,
                        std::vector<std::string> cells, const std::vector<ReplicateOutcome<SelectionRep>>& outcomes,
                        CellHit cell_hit) {
    SelectionTable t;
    t.experiment = std::move(experiment);
    t.candidates = std::move(candidates);
    t.criteria = std::move(criteria);
    t.cells = std::move(cells);
    const std::size_t C = t.criteria.size(), R = outcomes.size();
    t.replicates = R;
    t.selected.assign(C, std::vector<int>(R, -1));
    t.values.assign(C, std::vector<std::vector<double>>(R));
    t.seconds.assign(C, 0.0);
    t.counted.assign(C, 0);
    t.frequency.assign(C, std::vector<double>(t.cells.size(), 0.0));
    t.ci.assign(C, std::vector<Interval>(t.cells.size()));
    for (std::size_t r = 0; r < R; ++r) {
        const auto& o = outcomes[r];
        if (!o.value) {
            ++t.failed_replicates;
            t.incomplete = true;
            collect_warning(t.warnings, "replicate " + std::to_string(r) + " failed: " + o.error);
            continue;
        }
        for (const auto& w : o.value->warnings) collect_warning(t.warnings, "replicate " + std::to_string(r) + ": " + w);
        for (std::size_t c = 0; c < C; ++c) {
            t.values[c][r] = o.value->values[c];
            t.seconds[c] += o.value->seconds[c];
            t.selected[c][r] = argmin_finite(o.value->values[c]);
        }
    }
    for (std::size_t c = 0; c < C; ++c) {
        std::vector<std::size_t> hits(t.cells.size(), 0);
        for (std::size_t r = 0; r < R; ++r) {
            const int s = t.selected[c][r];
            if (s < 0) continue;
            ++t.counted[c];
            for (std::size_t j = 0; j < t.cells.size(); ++j) hits[j] += cell_hit(s, j);
        }
        for (std::size_t j = 0; j < t.cells.size(); ++j) {
            if (t.counted[c] == 0) continue;
            t.frequency[c][j] = static_cast<double>(hits[j]) / static_cast<double>(t.counted[c]);
            t.ci[c][j] = wald_ci(t.frequency[c][j], t.counted[c]);
        }
    }
    return t;
}

inline const double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace detail

/// Scores every graph on d = 3 nodes for data from the path-graph precision
/// with the given sigma12. GGM: NCIC1, NCIC2, SMIC and AIC (plus NCE-CV and
/// SM-CV when cfg.cv). Truncated GGM: the same without AIC. Data and noise
/// are shared by all candidates of a replicate.
inline SelectionTable run_edge_selection(const ExperimentConfig& cfg) {
    cfg.validate();
    const bool truncated = cfg.experiment == Experiment::EdgesTggm;
    if (!truncated && cfg.experiment != Experiment::EdgesGgm) throw DomainError("run_edge_selection: not an edge config");
    const int d = 3;
    const auto graphs = models::GraphSpec::enumerate_all(d);
    const Matrix sigma = linalg::solve_spd(path_precision(cfg.sigma12), Matrix::Identity(d, d));

    std::vector<std::string> criteria{"ncic1", "ncic2", "smic"};
    if (!truncated) criteria.push_back("aic");
    if (cfg.cv) {
        criteria.push_back("nce-cv");
        criteria.push_back("sm-cv");
    }
    auto idx = [&](const std::string& n) {
        return static_cast<std::size_t>(std::find(criteria.begin(), criteria.end(), n) - criteria.begin());
    };
    const std::size_t i_n1 = idx("ncic1"), i_n2 = idx("ncic2"), i_sm = idx("smic"), i_aic = idx("aic"),
                      i_ncv = idx("nce-cv"), i_scv = idx("sm-cv");

    std::vector<models::FamilyPtr> families;
    std::vector<models::ExtendedModel> models_;
    for (const auto& g : graphs) {
        families.push_back(truncated ? models::FamilyPtr(std::make_shared<models::TruncatedGGM>(g))
                                     : models::FamilyPtr(std::make_shared<models::GGM>(g)));
        models_.emplace_back(families.back());
    }

    const auto outcomes = run_replicates(cfg.replicates, cfg.workers, [&](std::size_t r) {
        Rng drng(cfg.master_seed, stream_id(r, kRoleData));
        const Matrix x = truncated ? sample_truncated_mvn(sigma, cfg.N, drng) : sample_mvn(sigma, cfg.N, drng);
        const auto noise = nce::NoiseSpec::moment_matched(
            truncated ? nce::NoiseKind::ExponentialProduct : nce::NoiseKind::Gaussian, x);
        Rng nrng(cfg.master_seed, stream_id(r, kRoleNoise));
        const Matrix y = noise.sample(cfg.M, nrng);

        detail::SelectionRep rep;
        rep.values.assign(criteria.size(), std::vector<double>(graphs.size(), detail::kNaN));
        rep.seconds.assign(criteria.size(), 0.0);
        for (std::size_t g = 0; g < graphs.size(); ++g) {
            const std::string label = graphs[g].to_string();
            try {
                const nce::NceProblem prob(models_[g], x, y, noise);
                detail::Stopwatch fit_clock;
                const auto fit = prob.fit();
                const double t_fit = fit_clock.seconds();
                const double base = static_cast<double>(prob.N()) * fit.objective_value;
                try {
                    detail::Stopwatch c;
                    rep.values[i_n1][g] = base + prob.penalty1(fit.xi_hat);
                    rep.seconds[i_n1] += t_fit + c.seconds();
                } catch (const Error& e) {
                    rep.warnings.push_back("ncic1 " + label + ": " + e.what());
                }
                detail::Stopwatch c2;
                rep.values[i_n2][g] = base + prob.penalty2(fit.xi_hat);
                rep.seconds[i_n2] += t_fit + c2.seconds();
                if (cfg.cv) {
                    detail::Stopwatch c;
                    rep.values[i_ncv][g] = prob.loocv(fit);
                    rep.seconds[i_ncv] += t_fit + c.seconds();
                }
            } catch (const Error& e) {
                rep.warnings.push_back("nce " + label + ": " + e.what());
            }
            try {
                const sm::SmProblem prob(*families[g], x);
                detail::Stopwatch fit_clock;
                const auto fit = prob.fit();
                const double t_fit = fit_clock.seconds();
                detail::Stopwatch c;
                rep.values[i_sm][g] = prob.smic(fit);
                rep.seconds[i_sm] += t_fit + c.seconds();
                if (cfg.cv) {
                    detail::Stopwatch cv_clock;
                    rep.values[i_scv][g] = prob.loocv(fit);
                    rep.seconds[i_scv] += t_fit + cv_clock.seconds();
                }
            } catch (const Error& e) {
                rep.warnings.push_back("sm " + label + ": " + e.what());
            }
            if (!truncated) {
                try {
                    detail::Stopwatch c;
                    rep.values[i_aic][g] = baselines::aic(baselines::fit_ggm_mle(graphs[g], x));
                    rep.seconds[i_aic] += c.seconds();
                } catch (const Error& e) {
                    rep.warnings.push_back("mle " + label + ": " + e.what());
                }
            }
        }
        return rep;
    });

    std::vector<std::string> candidates, cells;
    for (const auto& g : graphs) candidates.push_back(g.to_string());
    const auto pairs = models::GraphSpec::complete(d).edges();
    for (const auto& [i, j] : pairs) cells.push_back("(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
    return detail::tabulate(to_string(cfg.experiment), candidates, criteria, cells, outcomes,
                            [&](int s, std::size_t j) { return graphs[s].has_edge(pairs[j].first, pairs[j].second); });
}

/// Start for a K-component non-normalized Gaussian mixture: means at the
/// (k + 1/2)/K data quantiles, common variance var/K, equal weights, and c
/// set to the log normalizer of each weighted component.
inline Vector quantile_start(const models::ExtendedModel& model, const Matrix& x) {
    const int K = model.components();
    std::vector<double> v(x.data(), x.data() + x.rows());
    std::sort(v.begin(), v.end());
    const double mean = x.col(0).mean();
    const double var = (x.col(0).array() - mean).square().mean() / K;
    models::ExtendedParams p;
    p.c.resize(K);
    for (int k = 0; k < K; ++k) {
        const double pos = (k + 0.5) / K * static_cast<double>(v.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(lo);
        const double mu = lo + 1 < v.size() ? v[lo] * (1.0 - frac) + v[lo + 1] * frac : v[lo];
        Vector th(2);
        th << -0.5 / var, mu / var;
        p.theta.push_back(th);
        p.c[k] = -std::log(static_cast<double>(K)) - 0.5 * std::log(2.0 * std::numbers::pi * var) -
                 0.5 * mu * mu / var;
    }
    return model.join(p);
}

/// 0.5 N(0,1) + 0.5 N(3,1) data; candidates K in cfg.k_grid scored by NCIC2
/// (non-normalized mixture, Gaussian moment-matched noise) and by AIC of the
/// EM fit.
inline SelectionTable run_mixture_selection(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<models::ExtendedModel> models_;
    for (int K : cfg.k_grid) models_.push_back(models::make_extended({"nn-gmm", {}, K}));
    const std::vector<std::string> criteria{"ncic2", "aic"};

    const auto outcomes = run_replicates(cfg.replicates, cfg.workers, [&](std::size_t r) {
        Rng drng(cfg.master_seed, stream_id(r, kRoleData));
        Matrix x(cfg.N, 1);
        for (Eigen::Index t = 0; t < cfg.N; ++t) x(t, 0) = drng.uniform() < 0.5 ? drng.normal() : drng.normal(3.0, 1.0);
        const auto noise = nce::NoiseSpec::moment_matched(nce::NoiseKind::Gaussian, x);
        Rng nrng(cfg.master_seed, stream_id(r, kRoleNoise));
        const Matrix y = noise.sample(cfg.M, nrng);

        detail::SelectionRep rep;
        rep.values.assign(2, std::vector<double>(models_.size(), detail::kNaN));
        rep.seconds.assign(2, 0.0);
        for (std::size_t k = 0; k < models_.size(); ++k) {
            const std::string label = "K=" + std::to_string(cfg.k_grid[k]);
            try {
                detail::Stopwatch c;
                const nce::NceProblem prob(models_[k], x, y, noise);
                rep.values[0][k] = prob.ncic2(prob.fit(quantile_start(models_[k], x)));
                rep.seconds[0] += c.seconds();
            } catch (const Error& e) {
                rep.warnings.push_back("nce " + label + ": " + e.what());
            }
            try {
                detail::Stopwatch c;
                const auto em = baselines::fit_gmm_em_1d(cfg.k_grid[k], x.col(0), derive_seed(cfg.master_seed, r));
                rep.values[1][k] = baselines::aic(em);
                rep.seconds[1] += c.seconds();
            } catch (const Error& e) {
                rep.warnings.push_back("em " + label + ": " + e.what());
            }
        }
        return rep;
    });

    std::vector<std::string> labels;
    for (int K : cfg.k_grid) labels.push_back("K=" + std::to_string(K));
    return detail::tabulate(to_string(cfg.experiment), labels, criteria, labels, outcomes,
                            [](int s, std::size_t j) { return static_cast<std::size_t>(s) == j; });
}

/// Circular mean of column j of x, in [0, 2 pi).
inline double circular_mean(const Matrix& x, int j) {
    const double s = x.col(j).array().sin().sum(), c = x.col(j).array().cos().sum();
    return models::BivariateVonMises::wrap(std::atan2(s, c));
}

/// Torus data from the sine model at cfg.bvm; NCIC2 of the model with free
/// interaction against the independent model, uniform-torus noise.
inline SelectionTable run_bvm_dependence(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto dep = std::make_shared<models::BivariateVonMises>(true);
    const auto ind = std::make_shared<models::BivariateVonMises>(false);
    const models::ExtendedModel m_dep(dep), m_ind(ind);
    const auto noise = nce::NoiseSpec::uniform_torus(2);

    const auto outcomes = run_replicates(cfg.replicates, cfg.workers, [&](std::size_t r) {
        Rng drng(cfg.master_seed, stream_id(r, kRoleData));
        const Matrix x = sample_bivariate_von_mises(cfg.bvm, cfg.N, drng);
        Rng nrng(cfg.master_seed, stream_id(r, kRoleNoise));
        const Matrix y = noise.sample(cfg.M, nrng);
        const double m1 = circular_mean(x, 0), m2 = circular_mean(x, 1);

        detail::SelectionRep rep;
        rep.values.assign(1, std::vector<double>(2, detail::kNaN));
        rep.seconds.assign(1, 0.0);
        const models::ExtendedModel* ms[2] = {&m_dep, &m_ind};
        const models::BivariateVonMises* fs[2] = {dep.get(), ind.get()};
        for (int k = 0; k < 2; ++k) {
            try {
                detail::Stopwatch c;
                const nce::NceProblem prob(*ms[k], x, y, noise);
                Vector start = Vector::Zero(ms[k]->dim());
                start.head(fs[k]->theta_dim()) = fs[k]->from_natural(0.5, 0.5, m1, m2, 0.0);
                rep.values[0][k] = prob.ncic2(prob.fit(start));
                rep.seconds[0] += c.seconds();
            } catch (const Error& e) {
                rep.warnings.push_back(std::string(k == 0 ? "bvm" : "bvm-indep") + ": " + e.what());
            }
        }
        return rep;
    });
    const std::vector<std::string> labels{"lambda-free", "lambda=0"};
    return detail::tabulate(to_string(cfg.experiment), labels, {"ncic2"}, labels, outcomes,
                            [](int s, std::size_t j) { return static_cast<std::size_t>(s) == j; });
}

/// Truncated-GGM data (complete graph candidates): truncated GGM against
/// log-GGM by NCIC1 and NCIC2, exponential-product noise.
inline SelectionTable run_loggm_vs_tggm(const ExperimentConfig& cfg) {
    cfg.validate();
    const int d = 3;
    const auto g = models::GraphSpec::complete(d);
    const models::ExtendedModel m_t(std::make_shared<models::TruncatedGGM>(g));
    const models::ExtendedModel m_l(std::make_shared<models::LogGGM>(g));
    const Matrix sigma = linalg::solve_spd(path_precision(cfg.sigma12), Matrix::Identity(d, d));

    const auto outcomes = run_replicates(cfg.replicates, cfg.workers, [&](std::size_t r) {
        Rng drng(cfg.master_seed, stream_id(r, kRoleData));
        const Matrix x = sample_truncated_mvn(sigma, cfg.N, drng);
        const auto noise = nce::NoiseSpec::moment_matched(nce::NoiseKind::ExponentialProduct, x);
        Rng nrng(cfg.master_seed, stream_id(r, kRoleNoise));
        const Matrix y = noise.sample(cfg.M, nrng);
        detail::SelectionRep rep;
        rep.values.assign(2, std::vector<double>(2, detail::kNaN));
        rep.seconds.assign(2, 0.0);
        const models::ExtendedModel* ms[2] = {&m_t, &m_l};
        for (int k = 0; k < 2; ++k) {
            try {
                detail::Stopwatch c;
                const nce::NceProblem prob(*ms[k], x, y, noise);
                const auto fit = prob.fit();
                rep.values[1][k] = prob.ncic2(fit);
                rep.values[0][k] = prob.ncic1(fit);
                rep.seconds[0] += c.seconds();
            } catch (const Error& e) {
                rep.warnings.push_back(ms[k]->family().name() + ": " + e.what());
            }
        }
        return rep;
    });
    const std::vector<std::string> labels{"tggm", "log-ggm"};
    return detail::tabulate(to_string(cfg.experiment), labels, {"ncic1", "ncic2"}, labels, outcomes,
                            [](int s, std::size_t j) { return static_cast<std::size_t>(s) == j; });
}

}  // namespace nncrit::simlab
