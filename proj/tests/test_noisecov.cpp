#include "spotvol/noisecov.hpp"
#include "spotvol/rng.hpp"
#include "spotvol/simulate.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace spotvol;

TEST(NoiseCov, DiffusionOnlyIsOrderStep)
{
    Matrix sigma(2, 2);
    sigma << 1.0, 0.5, 0.5, 1.0;
    const std::size_t n = 5000;
    const double step = kOneTradingDay / n;
    int ok = 0;
    for (int seed = 0; seed < 40; ++seed) {
        const ReturnPanel r = diff_returns(simulate_brownian(sigma, n, kOneTradingDay, derive_seed(21, seed)));
        const Matrix om = noise_cov(r, 0.5 * kOneTradingDay, KernelSpec{KernelFamily::epanechnikov, 0.1 * kOneTradingDay});
        if (om.cwiseAbs().maxCoeff() <= 5 * step * 1.0) ++ok;
    }
    EXPECT_GE(ok, 38);
}

TEST(NoiseCov, PureNoiseVariance)
{
    const std::size_t n = 100000;
    Matrix v(1, n + 1);
    RandomStream rng(5, StreamKind::test, 0);
    for (Eigen::Index k = 0; k <= static_cast<Eigen::Index>(n); ++k) v(0, k) = 0.3 * rng.normal();
    const AssetPanel z = AssetPanel::synchronous({"A"}, TimeGrid::uniform(n), v);
    const ReturnPanel r = diff_returns(z);
    const double om = noise_cov(r, 0.5 * kOneTradingDay, KernelSpec{KernelFamily::epanechnikov, 0.2 * kOneTradingDay})(0, 0);
    EXPECT_NEAR(om, 0.09, 0.01);
}

TEST(NoiseCov, ZeroInputGivesZero)
{
    const AssetPanel z = AssetPanel::synchronous({"A", "B"}, TimeGrid::uniform(50), Matrix::Zero(2, 51));
    EXPECT_TRUE(noise_cov(diff_returns(z), 0.5 * kOneTradingDay, KernelSpec{KernelFamily::epanechnikov, 0.3 * kOneTradingDay}).isZero(0.0));
}

TEST(NoiseCovAsync, SynchronousInputMatches)
{
    const AssetPanel panel = simulate_brownian(Matrix::Identity(3, 3), 300, kOneTradingDay, 12);
    std::vector<AssetSeries> series;
    for (std::size_t i = 0; i < 3; ++i) series.push_back({panel.times(i), panel.series_values(i)});
    const AssetPanel async = AssetPanel::asynchronous(panel.ids(), series, kOneTradingDay);
    const KernelSpec k{KernelFamily::epanechnikov, 0.2 * kOneTradingDay};
    for (double t : {0.0, 0.5 * kOneTradingDay, kOneTradingDay}) {
        const Matrix sync = noise_cov(diff_returns(panel), t, k);
        for (auto scheme : {PairIncrements::intersected, PairIncrements::own_grid}) {
            const AsyncNoiseEstimate est = noise_cov_async(PairwiseIncrements(async, scheme), t, k);
            EXPECT_LE((est.omega - sync).cwiseAbs().maxCoeff(), 1e-10 * sync.cwiseAbs().maxCoeff());
            EXPECT_EQ(est.missing_pairs(), 0u);
        }
    }
}

TEST(NoiseCovAsync, DisjointTicksAreFlagged)
{
    std::vector<double> ta, tb, va, vb;
    RandomStream rng(3, StreamKind::test, 0);
    for (int k = 0; k < 100; ++k) {
        ta.push_back((2 * k) * 0.005);
        tb.push_back((2 * k + 1) * 0.005);
        va.push_back(rng.normal());
        vb.push_back(rng.normal());
    }
    const AssetPanel panel = AssetPanel::asynchronous({"A", "B"}, {AssetSeries{ta, va}, AssetSeries{tb, vb}}, 1.0);
    const AsyncNoiseEstimate est = noise_cov_async(panel, 0.5, KernelSpec{KernelFamily::epanechnikov, 0.2});
    EXPECT_FALSE(est.observed(1, 0));
    EXPECT_FALSE(est.observed(0, 1));
    EXPECT_EQ(est.omega(0, 1), 0.0);
    EXPECT_TRUE(est.observed(0, 0));
    EXPECT_GT(est.omega(0, 0), 0.0);
    EXPECT_GT(est.omega(1, 1), 0.0);
    EXPECT_EQ(est.missing_pairs(), 1u);
}
