// Acceptance runs: one numbered criterion per invocation
//   nncrit_acceptance --criterion N      (N = 1..10)
//   nncrit_acceptance                    (all, in order)
// Prints one PASS/FAIL line per criterion; exit status 1 if any failed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "nncrit/io.hpp"
#include "nncrit/simlab.hpp"
#include "support.hpp"

using namespace nncrit;
using namespace nncrit::simlab;

namespace {

// Fixed once for every criterion; not tuned.
constexpr std::uint64_t kSeed = 12345;

std::string fmt(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.4g", v);
    return b;
}

class Report {
public:
    void check(bool ok, const std::string& what) {
        ok_ = ok_ && ok;
        parts_.push_back((ok ? "" : "[x] ") + what);
    }
    void note(const std::string& what) { parts_.push_back(what); }
    bool ok() const { return ok_; }
    std::string line(int c) const {
        std::string s = "criterion " + std::to_string(c) + ": " + (ok_ ? "PASS" : "FAIL");
        for (std::size_t i = 0; i < parts_.size(); ++i) s += (i ? "; " : " | ") + parts_[i];
        return s;
    }

private:
    bool ok_ = true;
    std::vector<std::string> parts_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentConfig config(Experiment e) {
    auto c = default_config(e);
    c.master_seed = kSeed;
    return c;
}

void require_complete(Report& r, bool incomplete, std::size_t failed) {
    r.check(!incomplete, "failed replicates " + std::to_string(failed));
}

// ---------------------------------------------------------------- bias

BiasCurve nce_bias(const std::vector<double>& eps, unsigned workers) {
    auto c = config(Experiment::BiasNce);
    c.eps = eps;
    c.workers = workers;
    return run_bias_experiment(c);
}

Report criterion1() {
    Report r;
    const auto t0 = std::chrono::steady_clock::now();
    const auto curve = nce_bias({0.0}, 1);
    const double secs = seconds_since(t0);
    const auto& p = curve.points[0];
    const double B = p.B.mean;
    r.check(B >= -2.3 && B <= -1.7, "B " + fmt(B) + " (SE " + fmt(p.B.sd / std::sqrt(p.B.n)) + ") in [-2.3,-1.7]");
    r.check(std::abs(p.b_hat1.mean - B) <= 0.3, "E[B1] " + fmt(p.b_hat1.mean) + " within 0.3 of B");
    r.check(std::abs(p.b_hat2.mean - B) <= 0.3, "E[B2] " + fmt(p.b_hat2.mean) + " within 0.3 of B");
    r.check(p.b_hat2.sd < 1e-6, "SD(B2) " + fmt(p.b_hat2.sd) + " < 1e-6");
    r.check(p.b_hat1.sd >= 0.03 && p.b_hat1.sd <= 0.3, "SD(B1) " + fmt(p.b_hat1.sd) + " in [0.03,0.3]");
    r.check(secs <= 15 * 60, "runtime " + fmt(secs) + " s single-threaded <= 900 s");
    r.note("R=" + std::to_string(p.B.n));
    require_complete(r, curve.incomplete, p.failures);
    return r;
}

Report criterion2() {
    Report r;
    const auto curve = nce_bias({0.0, 0.05, 0.1, 0.2}, 0);
    double prev = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    std::string trend;
    for (const auto& p : curve.points) {
        r.check(std::abs(p.b_hat1.mean - p.B.mean) <= 0.5, "eps " + fmt(p.eps) + ": B " + fmt(p.B.mean) + " (SE " +
                                                               fmt(p.B.sd / std::sqrt(p.B.n)) + "), E[B1] " +
                                                               fmt(p.b_hat1.mean));
        decreasing = decreasing && std::abs(p.B.mean) < prev;
        prev = std::abs(p.B.mean);
        trend += (trend.empty() ? "" : " ") + fmt(std::abs(p.B.mean));
    }
    r.check(decreasing, "|B| strictly decreasing: " + trend);
    require_complete(r, curve.incomplete, 0);
    return r;
}

Report criterion3() {
    Report r;
    auto c = config(Experiment::BiasSm);
    c.eps = {0.0, 0.1};
    const auto sm = run_bias_experiment(c);
    for (const auto& p : sm.points) {
        const double tol = std::max(0.5, 0.1 * std::abs(p.B.mean));
        r.check(std::abs(p.b_hat1.mean - p.B.mean) <= tol, "eps " + fmt(p.eps) + ": B " + fmt(p.B.mean) + " (SE " +
                                                               fmt(p.B.sd / std::sqrt(p.B.n)) + "), E[B] " +
                                                               fmt(p.b_hat1.mean) + ", tol " + fmt(tol));
    }
    const auto nce = nce_bias({0.0}, 0);
    r.check(std::abs(sm.points[0].B.mean) > std::abs(nce.points[0].B.mean),
            "|B_SM| " + fmt(std::abs(sm.points[0].B.mean)) + " > |B_NCE| " + fmt(std::abs(nce.points[0].B.mean)));
    require_complete(r, sm.incomplete || nce.incomplete, 0);
    return r;
}

// ---------------------------------------------------------------- edges

SelectionTable edges(Experiment e, double sigma12) {
    auto c = config(e);
    c.sigma12 = sigma12;
    return run_edge_selection(c);
}

std::string freqs(const SelectionTable& t, const std::string& crit) {
    std::string s = crit;
    for (const auto& cell : t.cells) s += " " + cell + "=" + fmt(t.freq(crit, cell));
    return s;
}

Report criterion4() {
    Report r;
    const auto t0 = std::chrono::steady_clock::now();
    const auto t = edges(Experiment::EdgesGgm, 0.5);
    const double secs = seconds_since(t0);
    for (const std::string crit : {"smic", "aic"}) {
        const bool ok = t.freq(crit, "(1,2)") >= 0.95 && t.freq(crit, "(2,3)") >= 0.95 && t.freq(crit, "(1,3)") <= 0.35;
        r.check(ok, freqs(t, crit));
    }
    for (const std::string crit : {"ncic1", "ncic2"}) {
        const bool ok = t.freq(crit, "(1,2)") >= 0.9 && t.freq(crit, "(2,3)") >= 0.9;
        r.check(ok, freqs(t, crit));
    }
    r.check(t.agreement("smic", "aic") >= 0.9, "SMIC-AIC agreement " + fmt(t.agreement("smic", "aic")));
    r.check(secs <= 30 * 60, "runtime " + fmt(secs) + " s <= 1800 s");
    require_complete(r, t.incomplete, t.failed_replicates);
    return r;
}

Report criterion5() {
    Report r;
    std::vector<SelectionTable> ts;
    for (double s : {0.2, 0.3, 0.5}) ts.push_back(edges(Experiment::EdgesGgm, s));
    for (const auto& crit : ts[0].criteria) {
        std::vector<double> f;
        for (const auto& t : ts) f.push_back(t.freq(crit, "(1,2)"));
        r.check(f[0] <= f[1] && f[1] <= f[2], crit + " " + fmt(f[0]) + " " + fmt(f[1]) + " " + fmt(f[2]));
    }
    for (const auto& t : ts) require_complete(r, t.incomplete, t.failed_replicates);
    return r;
}

Report criterion6() {
    Report r;
    const auto t = edges(Experiment::EdgesTggm, 0.5);
    for (const std::string crit : {"ncic1", "ncic2", "smic"}) {
        const bool ok = t.freq(crit, "(1,2)") >= 0.85 && t.freq(crit, "(2,3)") >= 0.85 && t.freq(crit, "(1,3)") <= 0.4;
        r.check(ok, freqs(t, crit));
    }
    require_complete(r, t.incomplete, t.failed_replicates);
    return r;
}

Report criterion7() {
    Report r;
    auto c = config(Experiment::EdgesGgm);
    c.N = c.M = 200;
    c.replicates = 100;
    c.cv = true;
    const auto t = run_edge_selection(c);
    const double a_nce = t.agreement("ncic2", "nce-cv"), a_sm = t.agreement("smic", "sm-cv");
    r.check(a_nce >= 0.8, "NCIC2/NCE-CV agreement " + fmt(a_nce));
    r.check(a_sm >= 0.8, "SMIC/SM-CV agreement " + fmt(a_sm));
    auto sec = [&](const std::string& n) { return t.seconds[t.criterion_index(n)]; };
    r.check(sec("ncic2") <= 0.1 * sec("nce-cv"),
            "time NCIC2 " + fmt(sec("ncic2")) + " s vs NCE-CV " + fmt(sec("nce-cv")) + " s (ratio " +
                fmt(sec("ncic2") / sec("nce-cv")) + ")");
    r.check(sec("smic") <= 0.1 * sec("sm-cv"),
            "time SMIC " + fmt(sec("smic")) + " s vs SM-CV " + fmt(sec("sm-cv")) + " s (ratio " +
                fmt(sec("smic") / sec("sm-cv")) + ")");
    require_complete(r, t.incomplete, t.failed_replicates);
    return r;
}

// ---------------------------------------------------------------- mixture, torus

Report criterion8() {
    Report r;
    const auto t = run_mixture_selection(config(Experiment::MixtureK));
    for (const std::string crit : {"ncic2", "aic"})
        r.check(t.freq(crit, "K=2") >= 0.8, freqs(t, crit));
    require_complete(r, t.incomplete, t.failed_replicates);
    return r;
}

Report criterion9() {
    Report r;
    const auto t = run_bvm_dependence(config(Experiment::BvmDependence));
    r.check(t.freq("ncic2", "lambda-free") >= 0.9, freqs(t, "ncic2"));
    require_complete(r, t.incomplete, t.failed_replicates);
    return r;
}

// ---------------------------------------------------------------- oracles

/// Five-point central differences.
Vector fd5(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-3) {
    Vector g(x.size()), p = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        auto at = [&](double s) {
            p[i] = x[i] + s * h;
            const double v = f(p);
            p[i] = x[i];
            return v;
        };
        g[i] = (-at(2) + 8 * at(1) - 8 * at(-1) + at(-2)) / (12 * h);
    }
    return g;
}

Vector draw_x(const models::ModelFamily& f, Rng& rng) {
    Vector x(f.data_dim());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        switch (f.domain()) {
            case models::Domain::Reals: x[i] = rng.normal(0.0, 1.5); break;
            case models::Domain::NonNegative: x[i] = 0.05 + rng.exponential(1.0); break;
            case models::Domain::Torus: x[i] = 2.0 * std::numbers::pi * rng.uniform(); break;
        }
    }
    return x;
}

Vector draw_theta(const models::ModelFamily& f, Rng& rng) {
    Vector th;
    do {
        th = f.initial_theta();
        for (Eigen::Index i = 0; i < th.size(); ++i) th[i] += 0.4 * rng.normal();
    } while (!f.feasible(th));
    return th;
}

std::vector<models::FamilyPtr> families() {
    using namespace models;
    const auto path = GraphSpec::parse(3, "1-2,2-3");
    return {std::make_shared<NNGaussian1D>(), std::make_shared<GGM>(path),
            std::make_shared<GGM>(GraphSpec::complete(3)), std::make_shared<TruncatedGGM>(path),
            std::make_shared<LogGGM>(path), std::make_shared<BivariateVonMises>(true),
            std::make_shared<BivariateVonMises>(false)};
}

Report criterion10() {
    Report r;
    const auto t0 = std::chrono::steady_clock::now();
    using testsupport::rel_err;
    const Matrix sigma = linalg::solve_spd(path_precision(0.5), Matrix::Identity(3, 3));
    Rng rng(kSeed, stream_id(0, kRoleData));
    const Matrix x = sample_mvn(sigma, 400, rng);
    const Matrix xp = sample_truncated_mvn(sigma, 400, rng);

    {  // closed form against CG
        using namespace models;
        const auto path = GraphSpec::parse(3, "1-2,2-3");
        std::vector<std::pair<FamilyPtr, const Matrix*>> cases{
            {std::make_shared<GGM>(path), &x},
            {std::make_shared<GGM>(GraphSpec::complete(3)), &x},
            {std::make_shared<TruncatedGGM>(path), &xp},
            {std::make_shared<NNGaussian1D>(), &x}};
        double worst = 0.0;
        for (const auto& [f, data] : cases) {
            const Matrix d = f->data_dim() == 1 ? Matrix(data->leftCols(1)) : *data;
            const sm::SmProblem p(*f, d);
            worst = std::max(worst, (p.fit_closed_form().theta_hat - p.fit_generic().theta_hat).cwiseAbs().maxCoeff());
        }
        r.check(worst <= 1e-6, "SM closed form vs CG " + fmt(worst));
    }
    {  // full graph: inverse second moment
        const auto g = models::GraphSpec::complete(3);
        const auto f = sm::fit_sm_closed_form(models::GGM(g), x);
        const Matrix kinv = testsupport::gauss_jordan_inverse(x.transpose() * x / static_cast<double>(x.rows()));
        const double err = (g.precision(f.theta_hat) - kinv).cwiseAbs().maxCoeff();
        r.check(err <= 1e-8, "full-graph SM vs inverse second moment " + fmt(err));
    }
    {  // 1-D Gaussian: moment map
        const Matrix x1 = x.col(0);
        const double m1 = x1.mean(), s2 = (x1.array() - m1).square().mean();
        const auto f = sm::fit_sm_closed_form(models::NNGaussian1D(), x1);
        Vector mle(2);
        mle << -1.0 / (2.0 * s2), m1 / s2;
        const double err = rel_err(f.theta_hat, mle);
        r.check(err <= 1e-12, "1-D SM vs Gaussian MLE map " + fmt(err));
    }
    {  // gradients
        double worst = 0.0;
        for (const auto& f : families()) {
            for (int rep = 0; rep < 20; ++rep) {
                const Vector z = draw_x(*f, rng), th = draw_theta(*f, rng);
                worst = std::max(worst, rel_err(f->grad_theta(z, th),
                                                fd5([&](const Vector& t) { return f->log_unnorm(z, t); }, th)));
                if (f->capabilities().x_differentiable)
                    worst = std::max(worst, rel_err(f->dx(z, th),
                                                    fd5([&](const Vector& v) { return f->log_unnorm(v, th); }, z)));
            }
        }
        const Matrix x1 = x.leftCols(1);
        const auto noise = nce::NoiseSpec::moment_matched(nce::NoiseKind::Gaussian, x1);
        const Matrix y1 = noise.sample(400, rng);
        for (int K : {1, 2}) {
            const models::ExtendedModel m(std::make_shared<models::NNGaussian1D>(), K);
            const nce::NceProblem prob(m, x1, y1, noise);
            const auto op = prob.opt_problem();
            for (int rep = 0; rep < 10; ++rep) {
                Vector xi(m.dim());
                for (int k = 0; k < K; ++k) {
                    xi.segment(2 * k, 2) = models::NNGaussian1D::from_moments(rng.normal(), 0.5 + rng.uniform());
                    xi[2 * K + k] = rng.normal();
                }
                Vector g;
                op.value_and_gradient(xi, g);
                worst = std::max(worst, rel_err(g, fd5(op.objective, xi)));
            }
        }
        {
            const models::GGM ggm(models::GraphSpec::parse(3, "1-2,2-3"));
            const sm::SmProblem prob(ggm, x);
            const Vector th = ggm.initial_theta();
            worst = std::max(worst, rel_err(prob.gradient(th),
                                            fd5([&](const Vector& t) { return prob.objective(t); }, th)));
        }
        r.check(worst <= 1e-5, "gradient checks worst relative error " + fmt(worst));
    }
    {  // b_hat bound on 10^4 points
        const models::ExtendedModel m(std::make_shared<models::NNGaussian1D>());
        const auto noise = nce::NoiseSpec::gaussian(Vector::Zero(1), Matrix::Constant(1, 1, 4.0));
        Matrix xd(6000, 1), yn(4000, 1);
        for (Eigen::Index t = 0; t < xd.rows(); ++t) xd(t, 0) = rng.normal(0.0, 3.0);
        for (Eigen::Index t = 0; t < yn.rows(); ++t) yn(t, 0) = rng.normal(0.0, 3.0);
        const nce::NceProblem prob(m, xd, yn, noise);
        const double bound = std::pow(6000.0 + 4000.0, 2) / (4.0 * 6000.0 * 4000.0);
        bool ok = true;
        for (int rep = 0; rep < 5; ++rep) {
            Vector xi(3);
            xi.head(2) = models::NNGaussian1D::from_moments(rng.normal(), 0.3 + rng.uniform());
            xi[2] = rng.normal();
            Vector bd, bn;
            prob.b_hat(xi, bd, bn);
            ok = ok && bd.minCoeff() > 0.0 && bn.minCoeff() > 0.0 &&
                 std::max(bd.maxCoeff(), bn.maxCoeff()) <= bound * (1.0 + 1e-15);
        }
        r.check(ok, "0 < b_hat <= (N+M)^2/(4NM) on 10^4 points");
    }
    {  // NCIC2 penalty at M = 200 N
        Matrix xd(200, 1);
        for (Eigen::Index t = 0; t < xd.rows(); ++t) xd(t, 0) = rng.normal(0.4, 1.3);
        const auto noise = nce::NoiseSpec::moment_matched(nce::NoiseKind::Gaussian, xd);
        const Matrix yn = noise.sample(200 * 200, rng);
        const models::ExtendedModel m(std::make_shared<models::NNGaussian1D>());
        const nce::NceProblem prob(m, xd, yn, noise);
        const double pen = prob.penalty2(prob.fit().xi_hat);
        r.check(std::abs(pen - 2.0) <= 0.05, "penalty at M=200N " + fmt(pen) + " vs m-1 = 2");
    }
    {  // worker-count determinism
        auto ce = config(Experiment::EdgesGgm);
        ce.N = ce.M = 150;
        ce.replicates = 6;
        auto cb = config(Experiment::BiasNce);
        cb.N = cb.M = 150;
        cb.replicates = 8;
        cb.eps = {0.0, 0.1};
        std::string e1, e4, b1, b4;
        ce.workers = cb.workers = 1;
        e1 = io::selection_csv(run_edge_selection(ce)) + io::to_json(run_edge_selection(ce), false).dump();
        b1 = io::bias_csv(run_bias_experiment(cb));
        ce.workers = cb.workers = 4;
        e4 = io::selection_csv(run_edge_selection(ce)) + io::to_json(run_edge_selection(ce), false).dump();
        b4 = io::bias_csv(run_bias_experiment(cb));
        r.check(e1 == e4 && b1 == b4, "byte-identical output for 1 and 4 workers");
    }
    const double secs = seconds_since(t0);
    r.check(secs < 60.0, "runtime " + fmt(secs) + " s < 60 s");
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Report()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                        criterion6, criterion7, criterion8, criterion9, criterion10};
    std::vector<int> which;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            const int c = std::atoi(argv[++i]);
            if (c < 1 || c > 10) {
                std::cerr << "criterion must be 1..10\n";
                return 2;
            }
            which.push_back(c);
        } else {
            std::cerr << "usage: nncrit_acceptance [--criterion N]...\n";
            return 2;
        }
    }
    if (which.empty())
        for (int c = 1; c <= 10; ++c) which.push_back(c);
    bool all = true;
    for (int c : which) {
        bool ok = false;
        std::string line;
        try {
            const Report r = criteria[c - 1]();
            ok = r.ok();
            line = r.line(c);
        } catch (const std::exception& e) {
            line = "criterion " + std::to_string(c) + ": FAIL | error: " + e.what();
        }
        std::cout << line << std::endl;
        all = all && ok;
    }
    return all ? 0 : 1;
}
