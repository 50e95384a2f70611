// Scores all eight graphs on three nodes by NCIC2 and SMIC for one
// synthetic dataset drawn from a path-graph Gaussian.

#include <cstdio>

#include "nncrit/simlab.hpp"

using namespace nncrit;

int main() {
    const int d = 3;
    const Matrix sigma = linalg::solve_spd(simlab::path_precision(0.5), Matrix::Identity(d, d));
    simlab::Rng data_rng(7, simlab::stream_id(0, simlab::kRoleData));
    const Matrix x = simlab::sample_mvn(sigma, 1000, data_rng);

    // One noise sample shared by every candidate.
    const auto noise = nce::NoiseSpec::moment_matched(nce::NoiseKind::Gaussian, x);
    simlab::Rng noise_rng(7, simlab::stream_id(0, simlab::kRoleNoise));
    const Matrix y = noise.sample(1000, noise_rng);

    std::printf("%-14s %12s %12s\n", "graph", "NCIC2", "SMIC");
    for (const auto& g : models::GraphSpec::enumerate_all(d)) {
        const models::ExtendedModel model(std::make_shared<models::GGM>(g));
        const nce::NceProblem nce_problem(model, x, y, noise);
        const double ncic2 = nce_problem.ncic2(nce_problem.fit());

        const sm::SmProblem sm_problem(model.family(), x);
        const double smic = sm_problem.smic(sm_problem.fit());
        std::printf("%-14s %12.3f %12.3f\n", g.to_string().c_str(), ncic2, smic);
    }
}
