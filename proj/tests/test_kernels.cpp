#include "spotvol/kernels.hpp"

#include <gtest/gtest.h>

using namespace spotvol;

TEST(Kernel, Values)
{
    EXPECT_DOUBLE_EQ(kernel_eval(KernelFamily::epanechnikov, 0.0), 0.75);
    EXPECT_DOUBLE_EQ(kernel_eval(KernelFamily::uniform, 0.5), 0.5);
    for (auto f : {KernelFamily::epanechnikov, KernelFamily::uniform, KernelFamily::triangular, KernelFamily::quartic}) {
        EXPECT_EQ(kernel_eval(f, 1.5), 0.0);
        EXPECT_EQ(kernel_eval(f, -1.5), 0.0);
        EXPECT_NEAR(kernel_cdf(f, 1.0), 1.0, 1e-14);
        EXPECT_NEAR(kernel_cdf(f, 0.0), 0.5, 1e-14);
    }
}

TEST(Kernel, ParseNames)
{
    EXPECT_EQ(parse_kernel_family("quartic"), KernelFamily::quartic);
    EXPECT_EQ(to_string(KernelFamily::triangular), "triangular");
    EXPECT_THROW(parse_kernel_family("gaussian"), InvalidArgument);
    EXPECT_THROW((KernelSpec{KernelFamily::uniform, 0.0}.validate()), InvalidArgument);
}

TEST(Weights, HandEvaluatedExample)
{
    const KernelSpec k{KernelFamily::epanechnikov, 0.5};
    const WeightWindow w = normalized_weights(k, std::vector<double>{0.25, 0.5, 0.75}, 0.25, 0.5);
    ASSERT_EQ(w.size(), 3u);
    EXPECT_NEAR(w.weights[0], 1.2, 1e-14);
    EXPECT_NEAR(w.weights[1], 1.6, 1e-14);
    EXPECT_NEAR(w.weights[2], 1.2, 1e-14);
}

TEST(Weights, NormalizationIdentity)
{
    const TimeGrid grid = TimeGrid::uniform(1560);
    for (double frac : {0.0, 0.013, 0.37, 0.5, 0.998, 1.0}) {
        const WeightWindow w = normalized_weights(KernelSpec{KernelFamily::quartic, 90 * grid.step()}, grid, frac * grid.horizon);
        double s = 0.0;
        for (double x : w.weights) s += x;
        EXPECT_NEAR(grid.step() * s, 1.0, 1e-12) << frac;
    }
}

TEST(Weights, DenseMatchesWindow)
{
    const TimeGrid grid = TimeGrid::uniform(100);
    const KernelSpec k{KernelFamily::epanechnikov, 10 * grid.step()};
    const WeightWindow w = normalized_weights(k, grid, 0.3 * grid.horizon);
    const Vector d = normalized_weights_dense(k, grid, 0.3 * grid.horizon);
    EXPECT_EQ(d.size(), static_cast<Eigen::Index>(grid.size()));
    for (std::size_t j = 0; j < w.size(); ++j) EXPECT_EQ(d(static_cast<Eigen::Index>(w.first + j)), w.weights[j]);
    EXPECT_NEAR(d.sum() - Eigen::Map<const Vector>(w.weights.data(), static_cast<Eigen::Index>(w.size())).sum(), 0.0, 1e-12);
}

TEST(Weights, NoPointInsideBandwidthIsAnError)
{
    EXPECT_THROW(normalized_weights(KernelSpec{KernelFamily::epanechnikov, 0.1}, std::vector<double>{0.25, 0.5}, 0.25, 2.0),
                 InvalidArgument);
}

TEST(Support, IndexRange)
{
    const std::vector<double> pts{0.0, 0.1, 0.2, 0.3, 0.4};
    const auto [lo, hi] = kernel_support(pts, 0.2, 0.1 + 1e-12);
    EXPECT_EQ(lo, 1u);
    EXPECT_EQ(hi, 4u);
}

TEST(FilterWeights, RiemannSumIsNormalized)
{
    const TimeGrid grid = TimeGrid::uniform(400);
    const KernelSpec l{KernelFamily::epanechnikov, 8 * grid.step()};
    for (double tau : {0.0, 0.3 * grid.horizon, grid.horizon}) {
        const WeightWindow w = filter_weights(l, grid.points, {}, grid.step(), tau, grid.horizon, FilterNormalization::riemann_sum);
        double s = 0.0;
        for (double x : w.weights) s += x;
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(FilterWeights, ClosedFormCloseToRiemannInInterior)
{
    const TimeGrid grid = TimeGrid::uniform(1000);
    const KernelSpec l{KernelFamily::epanechnikov, 20 * grid.step()};
    const WeightWindow w = filter_weights(l, grid.points, {}, grid.step(), 0.5 * grid.horizon, grid.horizon,
                                          FilterNormalization::closed_form_integral);
    double s = 0.0;
    for (double x : w.weights) s += x;
    // (T/n) sum_k L_b(t_k - tau) within 2 step / b of one.
    EXPECT_NEAR(s, 1.0, 2.0 / 20.0);
}
