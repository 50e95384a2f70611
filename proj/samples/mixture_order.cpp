// Chooses the number of components of a non-normalized Gaussian mixture
// by NCIC2, next to AIC of the EM fit.

#include <cstdio>

#include "nncrit/simlab.hpp"

using namespace nncrit;

int main() {
    simlab::Rng rng(3, simlab::stream_id(0, simlab::kRoleData));
    Matrix x(1000, 1);
    for (Eigen::Index t = 0; t < x.rows(); ++t) x(t, 0) = rng.uniform() < 0.5 ? rng.normal() : rng.normal(3.0, 1.0);

    const auto noise = nce::NoiseSpec::moment_matched(nce::NoiseKind::Gaussian, x);
    simlab::Rng noise_rng(3, simlab::stream_id(0, simlab::kRoleNoise));
    const Matrix y = noise.sample(10000, noise_rng);

    std::printf("%3s %12s %12s\n", "K", "NCIC2", "AIC");
    for (int K = 1; K <= 3; ++K) {
        const auto model = models::make_extended({"nn-gmm", {}, K});
        const nce::NceProblem problem(model, x, y, noise);
        const auto fit = problem.fit(simlab::quantile_start(model, x));
        const double aic = baselines::aic(baselines::fit_gmm_em_1d(K, x.col(0), 3));
        std::printf("%3d %12.3f %12.3f\n", K, problem.ncic2(fit), aic);
    }
}
