#include "spotvol/factor.hpp"
#include "spotvol/rng.hpp"
#include "spotvol/simulate.hpp"
#include "spotvol/spotcov.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace spotvol;

namespace {

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

SimConfig factor_config(std::size_t p, std::uint64_t seed, double beta_scale = 1.0)
{
    SimConfig c;
    c.p = p;
    c.noise = false;
    c.seed = seed;
    FactorSpec f;
    f.beta_scale = beta_scale;
    c.factor = f;
    return c;
}

FactorPipelineConfig pipeline(double h_star)
{
    FactorPipelineConfig pc;
    pc.kernel = KernelSpec{KernelFamily::epanechnikov, h_star * SimConfig{}.step};
    pc.shrinkage.rule = ShrinkRule::scad();
    return pc;
}

}  // namespace

TEST(SpotCovCross, SelfCrossIsSpotCov)
{
    const ReturnPanel r = diff_returns(simulate_brownian(Matrix::Identity(3, 3), 400, kOneTradingDay, 4));
    const KernelSpec k{KernelFamily::epanechnikov, 0.1 * kOneTradingDay};
    EXPECT_LE((spot_cov_cross(r, r, 0.4 * kOneTradingDay, k) - spot_cov(r, 0.4 * kOneTradingDay, k)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SpotCovCross, ZeroSecondPanel)
{
    const ReturnPanel a = diff_returns(simulate_brownian(Matrix::Identity(3, 3), 400, kOneTradingDay, 4));
    ReturnPanel b = diff_returns(simulate_brownian(Matrix::Identity(2, 2), 400, kOneTradingDay, 5));
    b.increments.setZero();
    const Matrix c = spot_cov_cross(a, b, 0.5 * kOneTradingDay, KernelSpec{KernelFamily::epanechnikov, 0.1 * kOneTradingDay});
    EXPECT_EQ(c.rows(), 3);
    EXPECT_EQ(c.cols(), 2);
    EXPECT_TRUE(c.isZero(0.0));
}

TEST(SpotCovCross, IndependentPanels)
{
    std::vector<double> maxes;
    for (int s = 0; s < 21; ++s) {
        const ReturnPanel a = diff_returns(simulate_brownian(Matrix::Identity(2, 2), 20000, kOneTradingDay, derive_seed(1, s)));
        const ReturnPanel b = diff_returns(simulate_brownian(Matrix::Identity(2, 2), 20000, kOneTradingDay, derive_seed(2, s)));
        maxes.push_back(spot_cov_cross(a, b, 0.5 * kOneTradingDay, KernelSpec{KernelFamily::epanechnikov, 0.2 * kOneTradingDay})
                            .cwiseAbs()
                            .maxCoeff());
    }
    EXPECT_LE(median(maxes), 0.05);
}

TEST(Beta, Examples)
{
    EXPECT_DOUBLE_EQ(estimate_beta(Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 4.0))(0, 0), 0.5);
    Matrix syf(3, 2);
    syf << 1, 2, 3, 4, 5, 6;
    EXPECT_TRUE(estimate_beta(syf, Matrix::Identity(2, 2)).isApprox(syf, 1e-15));
}

TEST(Beta, IllConditionedFactorCovarianceThrows)
{
    Matrix sf(2, 2);
    sf << 1, 1, 1, 1;
    EXPECT_THROW(factor_cov_inverse(sf), NumericalFailure);
    double cond = 0.0;
    factor_cov_inverse((Matrix(2, 2) << 4, 0, 0, 1).finished(), 1e12, &cond);
    EXPECT_NEAR(cond, 4.0, 1e-12);
}

TEST(IdioCov, Examples)
{
    Matrix sy(2, 2);
    sy << 2, 1, 1, 2;
    EXPECT_TRUE(idio_cov(sy, Matrix::Ones(2, 1), Matrix::Identity(1, 1)).isApprox(Matrix::Identity(2, 2), 1e-15));
    EXPECT_EQ(idio_cov(sy, Matrix::Zero(2, 1), Matrix::Identity(1, 1)), sy);
}

TEST(FactorTotal, Examples)
{
    const Matrix xs = (Matrix(3, 3) << 2, 0.1, 0, 0.1, 1, 0, 0, 0, 1).finished();
    EXPECT_EQ(factor_total_cov(Matrix::Zero(3, 2), Matrix::Identity(2, 2), xs), xs);
    const Matrix out = factor_total_cov(Matrix::Ones(3, 1), Matrix::Identity(1, 1), Matrix::Identity(3, 3));
    EXPECT_TRUE(out.isApprox(Matrix::Ones(3, 3) + Matrix::Identity(3, 3), 1e-15));
}

// Idiosyncratic variance dwarfs the factor variances in this DGP, so single-path
// loadings carry a standard error near 0.2 at h* = 240; the errors are checked
// for centring across seeds instead of pathwise.
TEST(FactorPipeline, ConstantBetaErrorsAreCentred)
{
    const auto times = equidistant_times(21, kOneTradingDay);
    const std::size_t mid = 10;
    Matrix bias = Matrix::Zero(10, 3);
    std::vector<double> pathwise;
    const int seeds = 40;
    for (int s = 0; s < seeds; ++s) {
        const SimOutput sim = simulate(factor_config(10, derive_seed(17, s)), SimRequest{times, {}});
        const FactorEstimate est = factor_pipeline(sim.clean, *sim.factors, times, pipeline(240));
        bias += est.betas[mid] - sim.truth_beta[mid];
        pathwise.push_back((est.betas[mid] - sim.truth_beta[mid]).rowwise().norm().maxCoeff());
        if (s == 0) {
            EXPECT_EQ(est.rhos.size(), times.size());
            EXPECT_EQ(est.orthogonality.size(), times.size());
        }
    }
    bias /= seeds;
    EXPECT_LE(bias.cwiseAbs().maxCoeff(), 0.15);
    EXPECT_LE(median(pathwise), 1.0);
}

TEST(FactorPipeline, NullLoadingsLeaveIdiosyncraticPart)
{
    const auto times = equidistant_times(11, kOneTradingDay);
    const SimOutput sim = simulate(factor_config(20, 3, 0.0), SimRequest{times, {}});
    const FactorEstimate est = factor_pipeline(sim.clean, *sim.factors, times, pipeline(240));
    std::vector<double> diffs;
    for (std::size_t j = 0; j < times.size(); ++j) {
        diffs.push_back((est.total_cov.matrices[j] - est.idio_shrunk.matrices[j]).cwiseAbs().maxCoeff());
    }
    EXPECT_LE(median(diffs), 0.1);
}

TEST(FactorPipeline, NoisyPathCollapsesWithoutNoise)
{
    const auto times = equidistant_times(6, kOneTradingDay);
    const SimOutput sim = simulate(factor_config(8, 5), SimRequest{times, {}});
    const std::size_t n = SimConfig{}.observation_count();
    const FactorPipelineConfig clean = pipeline(120);
    FactorPipelineConfig noisy = clean;
    noisy.preavg = PreAvgConfig::from_ratios(SimConfig{}.step, kOneTradingDay, 1.0, 120, n);
    const FactorEstimate a = factor_pipeline(sim.clean, *sim.factors, times, clean);
    const FactorEstimate b = factor_pipeline(sim.clean, *sim.factors, times, noisy);
    for (std::size_t j = 0; j < times.size(); ++j) {
        EXPECT_LE((a.total_cov.matrices[j] - b.total_cov.matrices[j]).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_LE((a.betas[j] - b.betas[j]).cwiseAbs().maxCoeff(), 1e-8);
    }
}
