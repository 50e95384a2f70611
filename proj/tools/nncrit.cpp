// nncrit: fit non-normalized models, compare candidates by information
// criteria, and run the replicated simulation experiments.
//
// Exit codes: 0 success, 1 internal error, 2 bad input (flags, config, data),
// 3 capability mismatch, 4 estimation failure, 5 replicate failures (partial
// results are still written and marked incomplete).

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nncrit/io.hpp"
#include "nncrit/simlab.hpp"

namespace {

using namespace nncrit;
using io::json;

struct Options {
    std::string command;
    std::string model;
    std::vector<std::string> graphs;
    std::string K = "1";
    std::string estimator;
    std::string criterion;
    std::string data;
    std::string noise;
    long long M = 0;
    long long N = 0;
    std::uint64_t seed = 1;
    std::size_t reps = 0;
    unsigned workers = 0;
    std::string out;
    std::string format = "json";
    std::string config;
    bool verbose = false;
    double sigma12 = 0.5;
    std::string eps = "0,0.05,0.1,0.2";
    bool cv = false;

    bool seed_given = false;
};

class Exit : public std::runtime_error {
public:
    Exit(int code, const std::string& msg) : std::runtime_error(msg), code(code) {}
    int code;
};

int exit_code(const std::exception& e) {
    if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const DomainError*>(&e)) return 2;
    if (dynamic_cast<const CapabilityError*>(&e) || dynamic_cast<const NoiseDensityZero*>(&e)) return 3;
    if (dynamic_cast<const Error*>(&e)) return 4;
    return 1;
}

// ---------------------------------------------------------------- input

std::map<std::string, std::string> parse_spec_args(const std::vector<std::string>& parts, std::size_t from) {
    std::map<std::string, std::string> kv;
    for (std::size_t i = from; i < parts.size(); ++i) {
        const auto eq = parts[i].find('=');
        if (eq == std::string::npos) throw ParseError("synthetic spec: expected key=value, got '" + parts[i] + "'");
        kv[parts[i].substr(0, eq)] = parts[i].substr(eq + 1);
    }
    return kv;
}

/// synthetic:<kind>[,key=value...] with kinds gaussian (eps), ggm and tggm
/// (sigma12), gmm, bvm (kappa1, kappa2, mu1, mu2, lambda); all take N.
Matrix synthetic_data(const std::string& spec, const Options& o) {
    if (!o.seed_given) throw ParseError("synthetic data needs an explicit --seed");
    const auto parts = io::split(spec, ',');
    const std::string kind = parts.empty() ? "" : parts[0];
    auto kv = parse_spec_args(parts, 1);
    auto take = [&](const std::string& key, double dflt) {
        auto it = kv.find(key);
        if (it == kv.end()) return dflt;
        const double v = io::parse_double(it->second, "synthetic spec key " + key);
        kv.erase(it);
        return v;
    };
    const double n_real = take("N", o.N > 0 ? static_cast<double>(o.N) : 1000.0);
    if (!(n_real >= 1.0) || n_real != std::floor(n_real)) throw ParseError("synthetic spec: N must be a positive integer");
    const auto n = static_cast<Eigen::Index>(n_real);
    simlab::Rng rng(o.seed, simlab::stream_id(0, simlab::kRoleData));
    Matrix x;
    if (kind == "gaussian") {
        x = simlab::sample_contaminated_gaussian(n, take("eps", 0.0), rng);
    } else if (kind == "ggm" || kind == "tggm") {
        const double s12 = take("sigma12", o.sigma12);
        const Matrix sigma = linalg::solve_spd(simlab::path_precision(s12), Matrix::Identity(3, 3));
        x = kind == "ggm" ? simlab::sample_mvn(sigma, n, rng) : simlab::sample_truncated_mvn(sigma, n, rng);
    } else if (kind == "gmm") {
        x.resize(n, 1);
        for (Eigen::Index t = 0; t < n; ++t) x(t, 0) = rng.uniform() < 0.5 ? rng.normal() : rng.normal(3.0, 1.0);
    } else if (kind == "bvm") {
        simlab::BvmParams p{0.813, 0.440, 1.120, 4.644, -0.965};
        p.kappa1 = take("kappa1", p.kappa1);
        p.kappa2 = take("kappa2", p.kappa2);
        p.mu1 = take("mu1", p.mu1);
        p.mu2 = take("mu2", p.mu2);
        p.lambda = take("lambda", p.lambda);
        x = simlab::sample_bivariate_von_mises(p, n, rng);
    } else {
        throw ParseError("synthetic spec: unknown kind '" + kind + "' (known: gaussian, ggm, tggm, gmm, bvm)");
    }
    if (!kv.empty()) throw ParseError("synthetic spec: unused key '" + kv.begin()->first + "' for kind " + kind);
    return x;
}

Matrix load_data(const Options& o) {
    if (o.data.empty()) throw ParseError("--data is required");
    const std::string prefix = "synthetic:";
    if (o.data.rfind(prefix, 0) == 0) return synthetic_data(o.data.substr(prefix.size()), o);
    return io::read_csv_file(o.data);
}

// ---------------------------------------------------------------- candidates

struct Candidate {
    std::string label;
    models::ModelRequest request;
};

std::vector<models::GraphSpec> graphs_for(const Options& o, int d) {
    if (o.graphs.empty()) return {models::GraphSpec::complete(d)};
    std::vector<models::GraphSpec> out;
    for (const auto& g : o.graphs) {
        if (g == "all") {
            for (const auto& e : models::GraphSpec::enumerate_all(d)) out.push_back(e);
        } else {
            out.push_back(models::GraphSpec::parse(d, g));
        }
    }
    return out;
}

/// Every (model id, graph, K) combination named on the command line, in
/// declaration order.
std::vector<Candidate> candidates_for(const Options& o, int d) {
    if (o.model.empty()) throw ParseError("--model is required");
    std::vector<Candidate> out;
    for (const auto& id : io::split(o.model, ',')) {
        if (models::uses_graph(id)) {
            for (const auto& g : graphs_for(o, d)) out.push_back({id + " " + g.to_string(), {id, g, 1}});
        } else if (id == "nn-gmm") {
            for (int k : io::parse_int_list(o.K, "--K")) {
                if (k < 1) throw ParseError("--K values must be >= 1");
                out.push_back({id + " K=" + std::to_string(k), {id, {}, k}});
            }
        } else {
            out.push_back({id, {id, {}, 1}});
        }
    }
    return out;
}

std::string estimator_for(const std::string& criterion) {
    if (criterion == "ncic1" || criterion == "ncic2" || criterion == "nce-cv") return "nce";
    if (criterion == "smic" || criterion == "sm-cv") return "sm";
    if (criterion == "aic") return "mle";
    throw ParseError("unknown criterion '" + criterion + "' (expected ncic1, ncic2, smic, nce-cv, sm-cv or aic)");
}

// ---------------------------------------------------------------- estimation

struct NceContext {
    nce::NoiseSpec noise;
    Matrix y;
};

NceContext make_noise(const Options& o, const Matrix& x) {
    if (o.noise.empty())
        throw CapabilityError(
            "noise: the nce estimator needs a noise distribution; pass --noise gaussian, exp-product or uniform-torus");
    const auto kind = nce::parse_noise_kind(o.noise);
    NceContext c{kind == nce::NoiseKind::UniformTorus ? nce::NoiseSpec::uniform_torus(static_cast<int>(x.cols()))
                                                      : nce::NoiseSpec::moment_matched(kind, x),
                 {}};
    const Eigen::Index m = o.M > 0 ? static_cast<Eigen::Index>(o.M) : x.rows();
    simlab::Rng rng(o.seed, simlab::stream_id(0, simlab::kRoleNoise));
    c.y = c.noise.sample(m, rng);
    return c;
}

std::optional<Vector> nce_start(const models::ExtendedModel& model, const Matrix& x) {
    if (model.is_mixture()) return simlab::quantile_start(model, x);
    if (const auto* f = dynamic_cast<const models::BivariateVonMises*>(&model.family())) {
        Vector s = Vector::Zero(model.dim());
        s.head(f->theta_dim()) = f->from_natural(0.5, 0.5, simlab::circular_mean(x, 0), simlab::circular_mean(x, 1));
        return s;
    }
    return std::nullopt;
}

json opt_json(const optim::OptResult& r) {
    return {{"converged", r.converged},
            {"iterations", r.iterations},
            {"grad_norm", io::number(r.grad_norm)},
            {"termination", optim::to_string(r.termination_reason)}};
}

struct Scored {
    json report;
    double value = std::numeric_limits<double>::quiet_NaN();
    bool converged = true;
};

Scored score_nce(const models::ExtendedModel& model, const Matrix& x, const NceContext& nc,
                 const std::string& criterion) {
    const nce::NceProblem prob(model, x, nc.y, nc.noise);
    const auto fit = prob.fit(nce_start(model, x));
    json theta = json::array();
    for (const auto& t : fit.params.theta) theta.push_back(io::to_json(t));
    Scored s;
    s.converged = fit.opt.converged;
    s.report = {{"estimator", "nce"},
                {"noise", nc.noise.describe()},
                {"M", prob.M()},
                {"theta", theta},
                {"c", io::to_json(fit.params.c)},
                {"objective", io::number(fit.objective_value)},
                {"stationarity_residual", io::number(fit.opt.grad_norm)},
                {"optimizer", opt_json(fit.opt)}};
    if (criterion == "ncic1") s.value = prob.ncic1(fit);
    if (criterion == "ncic2") s.value = prob.ncic2(fit);
    if (criterion == "nce-cv") s.value = prob.loocv(fit);
    return s;
}

Scored score_sm(const models::ExtendedModel& model, const Matrix& x, const std::string& criterion) {
    if (model.is_mixture()) throw CapabilityError("score matching: mixtures are fitted by nce only");
    const sm::SmProblem prob(model.family(), x);
    const auto fit = prob.fit();
    Scored s;
    s.converged = !fit.opt || fit.opt->converged;
    s.report = {{"estimator", "sm"},
                {"method", sm::to_string(fit.method)},
                {"domain", sm::to_string(fit.domain)},
                {"theta", json::array({io::to_json(fit.theta_hat)})},
                {"objective", io::number(fit.objective_value)},
                {"stationarity_residual", io::number(prob.gradient(fit.theta_hat).lpNorm<Eigen::Infinity>())}};
    if (fit.opt) s.report["optimizer"] = opt_json(*fit.opt);
    if (criterion == "smic") s.value = prob.smic(fit);
    if (criterion == "sm-cv") s.value = prob.loocv(fit);
    return s;
}

Scored score_aic(const models::ModelRequest& req, const Matrix& x, std::uint64_t seed) {
    baselines::MleFit fit;
    if (req.id == "ggm") {
        fit = baselines::fit_ggm_mle(req.graph, x);
    } else if (req.id == "nn-gmm" || req.id == "nn-gaussian-1d") {
        fit = baselines::fit_gmm_em_1d(req.components, x.col(0), simlab::derive_seed(seed, 0));
    } else {
        throw CapabilityError("aic: maximum likelihood needs a tractable normalizer; supported for ggm, nn-gaussian-1d "
                              "and nn-gmm, not " + req.id);
    }
    Scored s;
    s.report = {{"estimator", "mle"},
                {"method", baselines::to_string(fit.method)},
                {"params", io::to_json(fit.params)},
                {"loglik", io::number(fit.loglik)},
                {"k", fit.k}};
    s.value = baselines::aic(fit);
    return s;
}

Scored score(const std::string& estimator, const models::ModelRequest& req, const Matrix& x,
             const std::optional<NceContext>& nc, const std::string& criterion, std::uint64_t seed) {
    if (estimator == "mle") return score_aic(req, x, seed);
    const auto model = models::make_extended(req);
    if (x.cols() != model.family().data_dim())
        throw DomainError(model.family().name() + ": data has " + std::to_string(x.cols()) + " columns, expected " +
                          std::to_string(model.family().data_dim()));
    if (estimator == "nce") return score_nce(model, x, *nc, criterion);
    return score_sm(model, x, criterion);
}

// ---------------------------------------------------------------- output

void emit(const Options& o, const std::string& text, const std::string& ext) {
    if (o.out.empty()) {
        std::cout << text;
        return;
    }
    const std::string path = ext.empty() ? o.out : o.out + ext;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot write '" + path + "'");
    f << text;
}

json header(const Options& o) {
    return {{"schema_version", io::kSchemaVersion}, {"command", o.command}, {"seed", o.seed}};
}

std::string fit_csv(const json& fit) {
    std::ostringstream s;
    s << "parameter,value\n";
    const auto& th = fit["theta"];
    for (std::size_t k = 0; k < th.size(); ++k)
        for (std::size_t i = 0; i < th[k].size(); ++i)
            s << "theta" << (th.size() > 1 ? std::to_string(k + 1) + "_" : "") << i + 1 << ','
              << (th[k][i].is_null() ? "nan" : io::format_double(th[k][i].get<double>())) << '\n';
    if (fit.contains("c"))
        for (std::size_t k = 0; k < fit["c"].size(); ++k)
            s << 'c' << k + 1 << ',' << io::format_double(fit["c"][k].get<double>()) << '\n';
    s << "objective," << io::format_double(fit["objective"].is_null() ? NAN : fit["objective"].get<double>()) << '\n';
    if (fit.contains("criterion_value") && !fit["criterion_value"].is_null())
        s << fit["criterion"].get<std::string>() << ',' << io::format_double(fit["criterion_value"].get<double>())
          << '\n';
    return s.str();
}

// ---------------------------------------------------------------- commands

int cmd_fit(const Options& o) {
    const Matrix x = load_data(o);
    const auto cands = candidates_for(o, static_cast<int>(x.cols()));
    if (cands.size() != 1) throw ParseError("fit takes a single model; use select to compare candidates");
    std::string estimator = o.estimator;
    if (estimator.empty()) throw ParseError("--estimator is required (nce or sm)");
    if (estimator != "nce" && estimator != "sm") throw ParseError("--estimator must be nce or sm");
    if (!o.criterion.empty() && estimator_for(o.criterion) != estimator)
        throw CapabilityError("criterion " + o.criterion + " does not apply to the " + estimator + " estimator");
    std::optional<NceContext> nc;
    if (estimator == "nce") nc = make_noise(o, x);
    const auto s = score(estimator, cands[0].request, x, nc, o.criterion, o.seed);

    json r = header(o);
    r["model"] = cands[0].label;
    r["N"] = x.rows();
    r["fit"] = s.report;
    if (!o.criterion.empty()) {
        r["fit"]["criterion"] = o.criterion;
        r["fit"]["criterion_value"] = io::number(s.value);
    }
    emit(o, o.format == "csv" ? fit_csv(r["fit"]) : r.dump(2) + "\n", "");
    if (o.verbose) std::cerr << "fit: " << cands[0].label << " objective " << s.report["objective"] << '\n';
    if (!s.converged) {
        std::cerr << "nncrit: optimizer: " << cands[0].label << " did not converge\n";
        return 4;
    }
    return 0;
}

int cmd_select(const Options& o) {
    if (o.criterion.empty()) throw ParseError("--criterion is required for select");
    const std::string estimator = estimator_for(o.criterion);
    if (!o.estimator.empty() && o.estimator != estimator)
        throw CapabilityError("criterion " + o.criterion + " needs the " + estimator + " estimator, not " +
                              o.estimator);
    const Matrix x = load_data(o);
    const auto cands = candidates_for(o, static_cast<int>(x.cols()));
    if (cands.size() < 2) throw ParseError("select needs at least two candidates (several --graph, --K or models)");
    std::optional<NceContext> nc;
    if (estimator == "nce") nc = make_noise(o, x);

    std::vector<double> values;
    json rows = json::array();
    std::string first_error;
    int first_code = 0;
    for (const auto& c : cands) {
        json row{{"label", c.label}};
        try {
            // A capability mismatch is a usage error, not a per-candidate failure.
            if (estimator == "sm" && c.request.components > 1)
                throw CapabilityError("score matching: mixtures are fitted by nce only");
            const auto s = score(estimator, c.request, x, nc, o.criterion, o.seed);
            values.push_back(s.value);
            row["value"] = io::number(s.value);
            row["fit"] = s.report;
        } catch (const CapabilityError&) {
            throw;
        } catch (const std::exception& e) {
            values.push_back(std::numeric_limits<double>::quiet_NaN());
            row["value"] = nullptr;
            row["error"] = e.what();
            if (first_error.empty()) {
                first_error = c.label + ": " + e.what();
                first_code = exit_code(e);
            }
            std::cerr << "nncrit: candidate " << c.label << " failed: " << e.what() << '\n';
        }
        rows.push_back(row);
    }
    const int best = simlab::detail::argmin_finite(values);
    if (best < 0) throw Exit(first_code ? first_code : 4, "every candidate failed; first: " + first_error);

    json r = header(o);
    r["criterion"] = o.criterion;
    r["estimator"] = estimator;
    r["N"] = x.rows();
    if (nc) {
        r["noise"] = nc->noise.describe();
        r["M"] = nc->y.rows();
    }
    r["candidates"] = rows;
    r["selected"] = cands[best].label;
    r["selected_index"] = best;
    if (o.format == "csv") {
        std::ostringstream s;
        s << "candidate,value,selected\n";
        for (std::size_t i = 0; i < cands.size(); ++i)
            s << '"' << cands[i].label << "\"," << io::format_double(values[i]) << ',' << (static_cast<int>(i) == best)
              << '\n';
        emit(o, s.str(), "");
    } else {
        emit(o, r.dump(2) + "\n", "");
    }
    if (o.verbose) std::cerr << "select: " << cands[best].label << '\n';
    return 0;
}

simlab::ExperimentConfig experiment_config(const Options& o, simlab::Experiment e) {
    if (!o.seed_given) throw ParseError(o.command + " needs an explicit --seed");
    auto cfg = simlab::default_config(e);
    if (o.N > 0) cfg.N = static_cast<Eigen::Index>(o.N);
    if (o.M > 0) cfg.M = static_cast<Eigen::Index>(o.M);
    if (e == simlab::Experiment::BiasNce || e == simlab::Experiment::BiasSm || o.cv) {
        // These designs pair each data point with one noise point.
        if (o.M <= 0) cfg.M = cfg.N;
    }
    if (o.reps > 0) cfg.replicates = o.reps;
    cfg.master_seed = o.seed;
    cfg.workers = o.workers;
    cfg.eps = io::parse_double_list(o.eps, "--eps");
    cfg.sigma12 = o.sigma12;
    if (e == simlab::Experiment::MixtureK) cfg.k_grid = io::parse_int_list(o.K == "1" ? "1,2,3,4" : o.K, "--K");
    cfg.cv = o.cv;
    cfg.validate();
    return cfg;
}

json config_echo(const simlab::ExperimentConfig& c) {
    json j{{"experiment", simlab::to_string(c.experiment)},
           {"N", c.N},
           {"M", c.M},
           {"replicates", c.replicates},
           {"master_seed", c.master_seed}};
    switch (c.experiment) {
        case simlab::Experiment::BiasNce:
        case simlab::Experiment::BiasSm: j["eps"] = c.eps; break;
        case simlab::Experiment::EdgesGgm:
        case simlab::Experiment::EdgesTggm:
            j["sigma12"] = c.sigma12;
            j["cv"] = c.cv;
            break;
        case simlab::Experiment::MixtureK: j["k_grid"] = c.k_grid; break;
        case simlab::Experiment::BvmDependence:
            j["bvm"] = {c.bvm.kappa1, c.bvm.kappa2, c.bvm.mu1, c.bvm.mu2, c.bvm.lambda};
            break;
        default: break;
    }
    return j;
}

/// Writes <out>.json and <out>.csv, or the --format one to stdout.
int finish_experiment(const Options& o, const simlab::ExperimentConfig& cfg, json result, const std::string& csv,
                      double seconds, bool incomplete, const std::vector<std::string>& warnings) {
    json r = header(o);
    r["config"] = config_echo(cfg);
    r["runtime_seconds"] = seconds;
    r["incomplete"] = incomplete;
    r["result"] = std::move(result);
    const std::string js = r.dump(2) + "\n";
    if (o.out.empty()) {
        std::cout << (o.format == "csv" ? csv : js);
    } else {
        emit(o, js, ".json");
        emit(o, csv, ".csv");
    }
    if (o.verbose)
        for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    else if (!warnings.empty())
        std::cerr << "nncrit: " << warnings.size() << " warning(s); rerun with --verbose to list them\n";
    if (incomplete) {
        std::cerr << "nncrit: some replicates failed; results are partial and marked incomplete\n";
        return 5;
    }
    return 0;
}

double since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_bias(const Options& o) {
    const std::string est = o.estimator.empty() ? "nce" : o.estimator;
    if (est != "nce" && est != "sm") throw ParseError("--estimator must be nce or sm");
    const auto cfg = experiment_config(o, est == "nce" ? simlab::Experiment::BiasNce : simlab::Experiment::BiasSm);
    const auto t0 = std::chrono::steady_clock::now();
    const auto curve = simlab::run_bias_experiment(cfg);
    return finish_experiment(o, cfg, io::to_json(curve), io::bias_csv(curve), since(t0), curve.incomplete,
                             curve.warnings);
}

int run_table(const Options& o, const simlab::ExperimentConfig& cfg,
              simlab::SelectionTable (*runner)(const simlab::ExperimentConfig&)) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto t = runner(cfg);
    return finish_experiment(o, cfg, io::to_json(t), io::selection_csv(t), since(t0), t.incomplete, t.warnings);
}

int cmd_edges(const Options& o) {
    const std::string m = o.model.empty() ? "ggm" : o.model;
    if (m != "ggm" && m != "tggm") throw ParseError("edges: --model must be ggm or tggm");
    return run_table(o, experiment_config(o, m == "ggm" ? simlab::Experiment::EdgesGgm : simlab::Experiment::EdgesTggm),
                     simlab::run_edge_selection);
}

int cmd_mixture(const Options& o) {
    return run_table(o, experiment_config(o, simlab::Experiment::MixtureK), simlab::run_mixture_selection);
}

int cmd_bvm(const Options& o) {
    return run_table(o, experiment_config(o, simlab::Experiment::BvmDependence), simlab::run_bvm_dependence);
}

// ---------------------------------------------------------------- parsing

const std::map<std::string, std::string>& config_aliases() {
    static const std::map<std::string, std::string> a{{"nce.M", "M"}, {"nce.noise", "noise"}, {"nce.seed", "seed"}};
    return a;
}

void build(CLI::App& app, Options& o) {
    app.require_subcommand(1);
    app.add_option("--model", o.model, "model id; select accepts a comma list");
    app.add_option("--graph", o.graphs, "edge list like \"1-2,2-3\", \"none\" or \"all\"; repeat for candidates");
    app.add_option("--K", o.K, "mixture component count(s), comma separated");
    app.add_option("--estimator", o.estimator, "nce or sm");
    app.add_option("--criterion", o.criterion, "ncic1, ncic2, smic, nce-cv, sm-cv or aic");
    app.add_option("--data", o.data, "CSV file with header x1..xd, or synthetic:<kind>[,key=value...]");
    app.add_option("--noise", o.noise, "gaussian, exp-product or uniform-torus");
    app.add_option("--M", o.M, "noise sample count (default N)");
    app.add_option("--N", o.N, "sample size for synthetic data and experiments");
    auto* seed = app.add_option("--seed", o.seed, "master seed");
    app.add_option("--reps", o.reps, "replicates");
    app.add_option("--workers", o.workers, "worker threads (default all cores)");
    app.add_option("--out", o.out, "output path (experiments: prefix for .json and .csv)");
    app.add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--config", o.config, "key=value file; command-line flags take precedence");
    app.add_flag("--verbose", o.verbose, "diagnostics on stderr");
    app.add_option("--sigma12", o.sigma12, "edge (1,2) precision entry for edges and synthetic ggm/tggm");
    app.add_option("--eps", o.eps, "contamination grid for bias");
    app.add_flag("--cv", o.cv, "edges: also score by leave-one-out CV (needs M = N)");
    const std::pair<const char*, const char*> subs[] = {
        {"fit", "fit one model and report its criterion value"},
        {"select", "score candidate models on shared data and pick the minimum"},
        {"bias", "true vs estimated bias of the NCE or SM criterion over a contamination grid"},
        {"edges", "edge selection frequencies for 3-node graphical models"},
        {"mixture", "mixture order selection frequencies"},
        {"bvm", "independence selection for bivariate von Mises data"}};
    for (const auto& [name, help] : subs) {
        auto* sub = app.add_subcommand(name, help);
        sub->fallthrough();
        sub->callback([&o, name] { o.command = name; });
    }
    seed->each([&o](const std::string&) { o.seed_given = true; });
}

/// Parses argv, then appends config-file entries for flags that were not on
/// the command line and parses again.
Options parse(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    Options o;
    {
        CLI::App app{"nncrit"};
        build(app, o);
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
        if (o.config.empty()) return o;
        const auto kv = io::read_config_file(o.config);
        std::vector<std::string> extra;
        for (const auto& [key0, value] : kv) {
            const auto alias = config_aliases().find(key0);
            const std::string key = alias == config_aliases().end() ? key0 : alias->second;
            const auto* opt = app.get_option_no_throw("--" + key);
            if (!opt || key == "config") throw ParseError(o.config + ": unknown key '" + key0 + "'");
            if (opt->count() == 0) extra.push_back("--" + key + "=" + value);
        }
        args.insert(args.end(), extra.begin(), extra.end());
    }
    o = Options{};
    CLI::App app{"nncrit"};
    build(app, o);
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    try {
        o = parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        CLI::App app{"nncrit: model selection for non-normalized models"};
        Options tmp;
        build(app, tmp);
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "nncrit: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "nncrit: " << e.what() << '\n';
        return 2;
    }
    try {
        if (o.command == "fit") return cmd_fit(o);
        if (o.command == "select") return cmd_select(o);
        if (o.command == "bias") return cmd_bias(o);
        if (o.command == "edges") return cmd_edges(o);
        if (o.command == "mixture") return cmd_mixture(o);
        if (o.command == "bvm") return cmd_bvm(o);
        std::cerr << "nncrit: no command\n";
        return 2;
    } catch (const Exit& e) {
        std::cerr << "nncrit: " << e.what() << '\n';
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "nncrit: " << e.what() << '\n';
        return exit_code(e);
    }
}
