#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nncrit/models/registry.hpp"
#include "nncrit/sm.hpp"
#include "support.hpp"

using namespace nncrit;
using namespace nncrit::models;
using testsupport::fd_gradient;
using testsupport::fd_jacobian;
using testsupport::rel_err;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

// Random point in the family's support and a random feasible theta.
struct Draw {
    Vector x, theta;
};

Draw draw(const ModelFamily& f, simlab::Rng& rng) {
    Draw d;
    const int dim = f.data_dim();
    d.x.resize(dim);
    for (int i = 0; i < dim; ++i) {
        switch (f.domain()) {
            case Domain::Reals: d.x[i] = rng.normal(0.0, 1.5); break;
            case Domain::NonNegative: d.x[i] = 0.05 + rng.exponential(1.0); break;
            case Domain::Torus: d.x[i] = 2.0 * std::numbers::pi * rng.uniform(); break;
        }
    }
    do {
        d.theta = f.initial_theta();
        for (Eigen::Index i = 0; i < d.theta.size(); ++i) d.theta[i] += 0.4 * rng.normal();
    } while (!f.feasible(d.theta));
    return d;
}

std::vector<FamilyPtr> all_families() {
    const auto path = GraphSpec::parse(3, "1-2,2-3");
    return {std::make_shared<NNGaussian1D>(),       std::make_shared<GGM>(path),
            std::make_shared<GGM>(GraphSpec::complete(3)), std::make_shared<TruncatedGGM>(path),
            std::make_shared<TruncatedGGM>(GraphSpec::complete(2)), std::make_shared<LogGGM>(path),
            std::make_shared<LogGGM>(GraphSpec::complete(2)), std::make_shared<BivariateVonMises>(true),
            std::make_shared<BivariateVonMises>(false)};
}

}  // namespace

TEST(NNGaussian1D, Examples) {
    NNGaussian1D f;
    EXPECT_DOUBLE_EQ(f.log_unnorm(vec({1.0}), vec({-0.5, 0.0})), -0.5);
    const Vector g = f.grad_theta(vec({2.0}), vec({0.3, -7.0}));
    EXPECT_EQ(g, vec({4.0, 2.0}));
    EXPECT_EQ(f.grad_theta(vec({2.0}), vec({-1.0, 1.0})), g);
    EXPECT_DOUBLE_EQ(f.dx(vec({3.0}), vec({-0.5, 0.0}))[0], -3.0);
    EXPECT_DOUBLE_EQ(f.dxx(vec({3.0}), vec({-0.5, 0.0}))[0], -1.0);
}

TEST(NNGaussian1D, ExpFamilyTerms) {
    NNGaussian1D f;
    auto t = f.exp_family_terms(vec({2.0}));
    Matrix gamma(2, 2);
    gamma << 32, 8, 8, 2;
    EXPECT_EQ(t.gamma, gamma);
    EXPECT_EQ(t.g, vec({4.0, 0.0}));
    EXPECT_EQ(t.c0, 0.0);
    t = f.exp_family_terms(vec({0.0}));
    gamma << 0, 0, 0, 2;
    EXPECT_EQ(t.gamma, gamma);
    EXPECT_EQ(t.g, vec({4.0, 0.0}));
}

TEST(GGM, LogUnnormAtIdentity) {
    GGM f(GraphSpec::parse(3, "1-2,2-3"));
    EXPECT_DOUBLE_EQ(f.log_unnorm(vec({1, 1, 1}), f.initial_theta()), -1.5);
}

TEST(GGM, GradientEntries) {
    GGM f(GraphSpec::complete(3));
    const Vector x = vec({1.0, 2.0, 0.0});
    const Vector g = f.grad_theta(x, f.initial_theta());
    EXPECT_DOUBLE_EQ(g[0], -0.5);
    // edge (1,2) is the first off-diagonal parameter
    EXPECT_DOUBLE_EQ(g[3], -2.0);
    const auto lp = [&](const Vector& th) { return f.log_unnorm(x, th); };
    EXPECT_LE(rel_err(fd_gradient(lp, f.initial_theta()), g), 1e-8);
}

TEST(GGM, XDerivativesAreLinearInK) {
    const auto graph = GraphSpec::parse(3, "1-2,2-3");
    GGM f(graph);
    const Vector th = vec({2.0, 1.5, 1.2, 0.3, -0.4});
    const Vector x = vec({0.5, -1.0, 2.0});
    const Matrix k = graph.precision(th);
    EXPECT_LE((f.dx(x, th) + k * x).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(f.dxx(x, th), -k.diagonal());
    EXPECT_EQ(k(0, 2), 0.0);
    EXPECT_EQ(k(2, 0), 0.0);
}

TEST(GraphSpec, ParseAndEnumerate) {
    const auto g = GraphSpec::parse(3, "2-3,1-2,1-2");
    EXPECT_EQ(g.edge_count(), 2);
    EXPECT_EQ(g.to_string(), "1-2,2-3");
    EXPECT_EQ(g.free_parameters(), 5);
    EXPECT_TRUE(g.has_edge(2, 1));
    EXPECT_FALSE(g.has_edge(0, 2));
    EXPECT_EQ(GraphSpec::enumerate_all(3).size(), 8u);
    EXPECT_EQ(GraphSpec::parse(3, "none").edge_count(), 0);
    EXPECT_THROW(GraphSpec::parse(3, "1-4"), DomainError);
    EXPECT_THROW(GraphSpec::parse(3, "1:2"), ParseError);
    EXPECT_THROW(GraphSpec::parse(3, "1-1"), DomainError);
}

TEST(BivariateVonMises, ValueAtModes) {
    BivariateVonMises f(true);
    const Vector th = f.from_natural(0.813, 0.440, 1.120, 4.644, -0.965);
    EXPECT_NEAR(f.log_unnorm(vec({1.120, 4.644}), th), 1.253, 1e-12);
    const Vector nat = f.to_natural(th);
    EXPECT_NEAR(nat[0], 0.813, 1e-12);
    EXPECT_NEAR(nat[1], 0.440, 1e-12);
    EXPECT_NEAR(nat[4], -0.965, 1e-15);
    EXPECT_THROW(f.dx(vec({0.1, 0.2}), th), CapabilityError);
    EXPECT_THROW(f.exp_family_terms(vec({0.1, 0.2})), CapabilityError);
}

TEST(BivariateVonMises, MeansWrapOnOutput) {
    BivariateVonMises f(true);
    const Vector nat = f.to_natural(vec({0.0, 0.0, -1.0, 7.0, 0.0}));
    EXPECT_NEAR(nat[2], 2.0 * std::numbers::pi - 1.0, 1e-14);
    EXPECT_NEAR(nat[3], 7.0 - 2.0 * std::numbers::pi, 1e-14);
}

TEST(LogGGM, OneDimensionalDerivative) {
    LogGGM f(GraphSpec::empty(1));
    Matrix k(1, 1);
    k << 1.0;
    const Vector th = f.theta_from(vec({0.0}), k);
    EXPECT_DOUBLE_EQ(f.dx(vec({1.0}), th)[0], -1.0);
    const auto lp = [&](const Vector& x) { return f.log_unnorm(x, th); };
    for (double x : {0.3, 1.0, 2.5}) {
        const double expected = -std::log(x) / x - 1.0 / x;
        EXPECT_NEAR(f.dx(vec({x}), th)[0], expected, 1e-14);
        EXPECT_NEAR(fd_gradient(lp, vec({x}))[0], expected, 1e-7);
    }
    EXPECT_THROW(f.log_unnorm(vec({0.0}), th), DomainError);
}

TEST(LogGGM, MatchesGaussianOnLogScale) {
    const auto graph = GraphSpec::complete(2);
    LogGGM f(graph);
    Matrix k(2, 2);
    k << 2.0, -0.5, -0.5, 1.0;
    const Vector mu = vec({0.3, -0.2});
    const Vector th = f.theta_from(mu, k);
    EXPECT_LE((f.log_mean(th) - mu).cwiseAbs().maxCoeff(), 1e-14);
    // log p~ differs from -1/2 (l-mu)'K(l-mu) - sum l by a constant in x.
    const auto direct = [&](const Vector& x) {
        const Vector l = x.array().log().matrix();
        return -0.5 * (l - mu).dot(k * (l - mu)) - l.sum();
    };
    const Vector x1 = vec({0.7, 1.9}), x2 = vec({2.2, 0.4});
    EXPECT_NEAR(f.log_unnorm(x1, th) - direct(x1), f.log_unnorm(x2, th) - direct(x2), 1e-12);
}

TEST(Families, DomainErrors) {
    TruncatedGGM t(GraphSpec::complete(2));
    EXPECT_THROW(t.log_unnorm(vec({-1.0, 1.0}), t.initial_theta()), DomainError);
    EXPECT_THROW(t.exp_family_terms(vec({-1.0, 1.0})), DomainError);
    NNGaussian1D g;
    EXPECT_THROW(g.log_unnorm(vec({std::nan("")}), vec({-0.5, 0.0})), DomainError);
    EXPECT_THROW(g.log_unnorm(vec({1.0}), vec({-0.5})), DomainError);
}

TEST(Families, ThetaGradientMatchesFiniteDifferences) {
    simlab::Rng rng(11, 0);
    for (const auto& f : all_families()) {
        for (int rep = 0; rep < 100; ++rep) {
            const auto d = draw(*f, rng);
            const auto lp = [&](const Vector& th) { return f->log_unnorm(d.x, th); };
            EXPECT_LE(rel_err(f->grad_theta(d.x, d.theta), fd_gradient(lp, d.theta)), 1e-5) << f->name();
            const auto gr = [&](const Vector& th) { return f->grad_theta(d.x, th); };
            EXPECT_LE(rel_err(f->hess_theta(d.x, d.theta), fd_jacobian(gr, d.theta)), 1e-5) << f->name();
        }
    }
}

TEST(Families, XDerivativesMatchFiniteDifferences) {
    simlab::Rng rng(12, 0);
    for (const auto& f : all_families()) {
        if (!f->capabilities().x_differentiable) continue;
        for (int rep = 0; rep < 100; ++rep) {
            const auto d = draw(*f, rng);
            const auto lp = [&](const Vector& x) { return f->log_unnorm(x, d.theta); };
            EXPECT_LE(rel_err(f->dx(d.x, d.theta), fd_gradient(lp, d.x)), 1e-4) << f->name();
            const auto dxf = [&](const Vector& x) { return f->dx(x, d.theta); };
            const Matrix hx = fd_jacobian(dxf, d.x);
            EXPECT_LE(rel_err(f->dxx(d.x, d.theta), Vector(hx.diagonal())), 1e-4) << f->name();
            // theta-Jacobians of dx and dxx
            const auto dxt = [&](const Vector& th) { return f->dx(d.x, th); };
            const auto dxxt = [&](const Vector& th) { return f->dxx(d.x, th); };
            EXPECT_LE(rel_err(f->dx_jacobian_theta(d.x, d.theta), fd_jacobian(dxt, d.theta)), 1e-5) << f->name();
            EXPECT_LE(rel_err(f->dxx_jacobian_theta(d.x, d.theta), fd_jacobian(dxxt, d.theta)), 1e-5) << f->name();
        }
    }
}

TEST(Families, ExpFamilyIdentityAgainstDirectRho) {
    simlab::Rng rng(13, 0);
    for (const auto& f : all_families()) {
        if (!f->capabilities().exponential_family) continue;
        const auto dom = sm::default_domain(*f);
        for (int rep = 0; rep < 100; ++rep) {
            const auto d = draw(*f, rng);
            const auto q = f->exp_family_terms(d.x);
            EXPECT_TRUE(linalg::is_symmetric(q.gamma));
            EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(q.gamma).eigenvalues().minCoeff(), -1e-10);
            const double quad = 0.5 * d.theta.dot(q.gamma * d.theta) + q.g.dot(d.theta) + q.c0;
            const double direct = sm::rho(d.x, d.theta, *f, dom);
            EXPECT_NEAR(quad, direct, 1e-10 * std::max(1.0, std::abs(direct))) << f->name();
        }
    }
}

// rho_SM+ assembled from K alone, independent of the family's derivative code.
TEST(TruncatedGGM, QuadraticFormAgainstIndependentAssembly) {
    const auto graph = GraphSpec::complete(2);
    TruncatedGGM f(graph);
    simlab::Rng rng(14, 0);
    for (int rep = 0; rep < 100; ++rep) {
        const auto d = draw(f, rng);
        const Matrix k = graph.precision(d.theta);
        const Vector kx = k * d.x;
        double direct = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double xi = d.x[i];
            direct += 2.0 * xi * (-kx[i]) + xi * xi * (-k(i, i)) + xi * xi * kx[i] * kx[i];
        }
        const auto q = f.exp_family_terms(d.x);
        EXPECT_NEAR(0.5 * d.theta.dot(q.gamma * d.theta) + q.g.dot(d.theta) + q.c0, direct, 1e-10);
    }
}

TEST(Mixture, LogDensityExamples) {
    NNGaussian1D f;
    const Vector x = vec({0.7});
    const Vector th = vec({-0.5, 0.2});
    Vector c1(1);
    c1 << 0.3;
    EXPECT_NEAR(mixture_log_density(f, {th}, c1, x), f.log_unnorm(x, th) + 0.3, 1e-15);
    EXPECT_NEAR(mixture_log_density(f, {th, th}, Vector::Zero(2), x), std::log(2.0) + f.log_unnorm(x, th), 1e-14);

    const double c = std::log(0.5) - 0.5 * std::log(2.0 * std::numbers::pi);
    const std::vector<Vector> blocks{vec({-0.5, 0.0}), vec({-0.5, 3.0})};
    const Vector cs = vec({c, c - 4.5});
    for (double z : {0.0, 1.5, 3.0}) {
        const double direct = std::log(0.5 * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi) +
                                       0.5 * std::exp(-0.5 * (z - 3.0) * (z - 3.0)) / std::sqrt(2.0 * std::numbers::pi));
        EXPECT_NEAR(mixture_log_density(f, blocks, cs, vec({z})), direct, 1e-13);
    }
}

TEST(Mixture, EqualComponentsHalveGradients) {
    auto fam = std::make_shared<NNGaussian1D>();
    ExtendedModel m(fam, 2);
    const Vector th = vec({-0.4, 0.1});
    ExtendedParams p{{th, th}, Vector::Zero(2)};
    const Vector xi = m.join(p);
    const Vector x = vec({1.3});
    const Vector s = m.score(x, xi);
    const Vector g = fam->grad_theta(x, th);
    EXPECT_LE((s.segment(0, 2) - 0.5 * g).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE((s.segment(2, 2) - 0.5 * g).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(s[4], 0.5, 1e-15);
    EXPECT_NEAR(s[5], 0.5, 1e-15);
}

TEST(ExtendedModel, ScoreAndHessianMatchFiniteDifferences) {
    simlab::Rng rng(15, 0);
    std::vector<ExtendedModel> models{
        ExtendedModel(std::make_shared<NNGaussian1D>(), 1), ExtendedModel(std::make_shared<NNGaussian1D>(), 3),
        ExtendedModel(std::make_shared<BivariateVonMises>(true), 1),
        ExtendedModel(std::make_shared<GGM>(GraphSpec::parse(3, "1-2")), 1)};
    for (const auto& m : models) {
        for (int rep = 0; rep < 30; ++rep) {
            const auto d = draw(m.family(), rng);
            Vector xi = m.default_start();
            for (int k = 0; k < m.components(); ++k) {
                const auto dk = draw(m.family(), rng);
                xi.segment(k * m.block_dim(), m.block_dim()) = dk.theta;
                xi[m.components() * m.block_dim() + k] = rng.normal();
            }
            const auto lp = [&](const Vector& v) { return m.log_density(d.x, v); };
            EXPECT_LE(rel_err(m.score(d.x, xi), fd_gradient(lp, xi)), 1e-6) << m.family().name();
            const auto sc = [&](const Vector& v) { return m.score(d.x, v); };
            EXPECT_LE(rel_err(m.hessian(d.x, xi), fd_jacobian(sc, xi)), 1e-6) << m.family().name();
        }
    }
}

TEST(ExtendedModel, BatchEvaluationMatchesPointwise) {
    simlab::Rng rng(16, 0);
    std::vector<ExtendedModel> models{
        ExtendedModel(std::make_shared<NNGaussian1D>(), 1), ExtendedModel(std::make_shared<NNGaussian1D>(), 2),
        ExtendedModel(std::make_shared<LogGGM>(GraphSpec::complete(2)), 1),
        ExtendedModel(std::make_shared<BivariateVonMises>(false), 1)};
    for (const auto& m : models) {
        Matrix z(25, m.family().data_dim());
        for (Eigen::Index t = 0; t < z.rows(); ++t) z.row(t) = draw(m.family(), rng).x.transpose();
        Vector xi = m.default_start();
        for (int k = 0; k < m.components(); ++k) {
            xi.segment(k * m.block_dim(), m.block_dim()) = draw(m.family(), rng).theta;
            xi[m.components() * m.block_dim() + k] = rng.normal();
        }
        const auto prep = m.prepare(z);
        Vector lp;
        Matrix sc;
        m.evaluate(prep, xi, lp, &sc);
        for (Eigen::Index t = 0; t < z.rows(); ++t) {
            const Vector x = z.row(t).transpose();
            EXPECT_NEAR(lp[t], m.log_density(x, xi), 1e-12 * std::max(1.0, std::abs(lp[t])));
            EXPECT_LE((sc.row(t).transpose() - m.score(x, xi)).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

TEST(ExtendedModel, CanonicalOrderByComponentMean) {
    ExtendedModel m(std::make_shared<NNGaussian1D>(), 2);
    ExtendedParams p{{NNGaussian1D::from_moments(3.0, 1.0), NNGaussian1D::from_moments(0.0, 2.0)}, vec({0.1, 0.2})};
    const auto q = m.split(m.canonical(m.join(p)));
    EXPECT_NEAR(NNGaussian1D::component_mean(q.theta[0][0], q.theta[0][1]), 0.0, 1e-15);
    EXPECT_NEAR(q.c[0], 0.2, 0.0);
    EXPECT_NEAR(NNGaussian1D::component_mean(q.theta[1][0], q.theta[1][1]), 3.0, 1e-15);
}

TEST(Registry, Identifiers) {
    for (const auto& id : model_identifiers()) {
        ModelRequest r{id, GraphSpec::complete(3), 1};
        EXPECT_NO_THROW(make_family(r)) << id;
    }
    EXPECT_THROW(make_family({"ica", {}, 1}), ParseError);
    EXPECT_THROW(make_extended({"ggm", GraphSpec::complete(2), 2}), CapabilityError);
    EXPECT_EQ(make_extended({"nn-gmm", {}, 3}).dim(), 9);
}
