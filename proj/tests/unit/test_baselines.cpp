#include <gtest/gtest.h>

#include <cmath>

#include "nncrit/baselines.hpp"
#include "support.hpp"

using namespace nncrit;
using namespace nncrit::baselines;
using models::GraphSpec;

namespace {

Matrix drton_precision(double s12) {
    Matrix k(3, 3);
    k << 1, s12, 0, s12, 1, 0.55, 0, 0.55, 1;
    return k;
}

Matrix mvn(const Matrix& sigma, Eigen::Index n, std::uint64_t seed) {
    simlab::Rng rng(seed, 1);
    const Matrix l = sigma.llt().matrixL();
    Matrix x(n, sigma.rows());
    Vector e(sigma.rows());
    for (Eigen::Index t = 0; t < n; ++t) {
        for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = rng.normal();
        x.row(t) = (l * e).transpose();
    }
    return x;
}

}  // namespace

TEST(GgmMle, FullGraphIsInverse) {
    const Matrix x = mvn(testsupport::gauss_jordan_inverse(drton_precision(0.5)), 300, 61);
    const auto g = GraphSpec::complete(3);
    const auto f = fit_ggm_mle(g, x);
    EXPECT_EQ(f.method, MleMethod::ClosedForm);
    EXPECT_EQ(f.k, 6);
    const Matrix s = x.transpose() * x / 300.0;
    EXPECT_LE((g.precision(f.params) - testsupport::gauss_jordan_inverse(s)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(GgmMle, EmptyGraphIsDiagonal) {
    const Matrix x = mvn(testsupport::gauss_jordan_inverse(drton_precision(0.5)), 300, 62);
    const auto f = fit_ggm_mle(GraphSpec::empty(3), x);
    const Matrix s = x.transpose() * x / 300.0;
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(f.params[i], 1.0 / s(i, i), 1e-14);
    EXPECT_EQ(f.k, 3);
}

TEST(GgmMle, PathGraphStationarity) {
    const Matrix x = mvn(testsupport::gauss_jordan_inverse(drton_precision(0.3)), 500, 63);
    for (const auto* spec : {"1-2,2-3", "1-2", "1-3", "2-3,1-3"}) {
        const auto g = GraphSpec::parse(3, spec);
        const auto f = fit_ggm_mle(g, x);
        EXPECT_EQ(f.method, MleMethod::Cg);
        EXPECT_LE(ggm_stationarity_residual(g, f.params, x), 1e-6) << spec;
        EXPECT_TRUE(linalg::is_pd(g.precision(f.params)));
        EXPECT_EQ(f.k, 3 + g.edge_count());
    }
}

TEST(GgmMle, RejectsSingularMoments) {
    Matrix x(2, 3);
    x << 1, 2, 3, 2, 4, 6;
    EXPECT_THROW(fit_ggm_mle(GraphSpec::complete(3), x), NotPositiveDefinite);
}

TEST(Aic, Arithmetic) {
    MleFit f;
    f.loglik = -100.0;
    f.k = 4;
    EXPECT_DOUBLE_EQ(aic(f), 208.0);
}

TEST(Aic, TicWithEqualMatricesIsAic) {
    simlab::Rng rng(64, 0);
    const Matrix a = testsupport::random_spd(5, rng);
    MleFit f;
    f.loglik = -42.5;
    f.k = 5;
    EXPECT_NEAR(-2.0 * f.loglik + 2.0 * linalg::trace_product_inv(a, a), aic(f), 1e-10);
}

TEST(Aic, FullGraphRarelyBeatsPath) {
    const Matrix sigma = testsupport::gauss_jordan_inverse(drton_precision(0.5));
    int path_wins = 0;
    const int reps = 50;
    for (int r = 0; r < reps; ++r) {
        const Matrix x = mvn(sigma, 1000, 1000 + r);
        const double full = aic(fit_ggm_mle(GraphSpec::complete(3), x));
        const double path = aic(fit_ggm_mle(GraphSpec::parse(3, "1-2,2-3"), x));
        path_wins += path <= full;
    }
    EXPECT_GE(path_wins, 40);
}

TEST(GmmEm, SingleComponentIsClosedForm) {
    simlab::Rng rng(65, 0);
    Vector x(300);
    for (Eigen::Index t = 0; t < 300; ++t) x[t] = rng.normal(2.0, 1.5);
    const auto f = fit_gmm_em_1d(1, x, 7);
    const double mean = x.mean(), var = (x.array() - mean).square().mean();
    EXPECT_NEAR(f.params[0], 1.0, 1e-15);
    EXPECT_NEAR(f.params[1], mean, 1e-12);
    EXPECT_NEAR(f.params[2], var, 1e-12);
    EXPECT_EQ(f.k, 2);
}

TEST(GmmEm, TwoClustersOfNearAtoms) {
    // Exact atoms would drive both variances to zero; tiny jitter keeps the
    // two-cluster fixed point away from the variance floor.
    Vector x(4);
    x << -0.01, 0.01, 2.99, 3.01;
    const auto f = fit_gmm_em_1d(2, x, 3);
    EXPECT_NEAR(f.params[0], 0.5, 1e-9);
    EXPECT_NEAR(f.params[1], 0.5, 1e-9);
    EXPECT_NEAR(f.params[2], 0.0, 1e-9);
    EXPECT_NEAR(f.params[3], 3.0, 1e-9);
    EXPECT_EQ(f.k, 5);
    // With one copy of each atom every start pins a component to a point.
    Vector atoms(2);
    atoms << 0, 3;
    EXPECT_THROW(fit_gmm_em_1d(2, atoms, 3), DegenerateComponent);
}

TEST(GmmEm, LogLikelihoodNeverDecreases) {
    simlab::Rng rng(66, 0);
    Vector x(1000);
    for (Eigen::Index t = 0; t < 1000; ++t) x[t] = rng.uniform() < 0.5 ? rng.normal() : rng.normal(3.0, 1.0);
    for (int K : {2, 3, 4}) {
        const auto f = fit_gmm_em_1d(K, x, 11);
        for (std::size_t i = 1; i < f.loglik_trace.size(); ++i)
            EXPECT_GE(f.loglik_trace[i], f.loglik_trace[i - 1]) << "K=" << K << " step " << i;
        EXPECT_EQ(f.k, 3 * K - 1);
    }
    EXPECT_THROW(fit_gmm_em_1d(5, x.head(3), 1), DomainError);
}
