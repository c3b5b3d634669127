#include "property_checks.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace spotvol::checks;

TEST(Properties, WeightNormalization)
{
    const auto r = weight_normalization(100);
    EXPECT_TRUE(r.ok) << r.detail;
}

TEST(Properties, SpotCovPsd)
{
    const auto r = spot_cov_psd(100);
    EXPECT_TRUE(r.ok) << r.detail;
}

TEST(Properties, PreviousTickIdempotence)
{
    const auto r = previous_tick_idempotence();
    EXPECT_TRUE(r.ok) << r.detail;
}

TEST(Properties, ConvergenceDirection)
{
    const auto r = convergence_direction(20);
    EXPECT_TRUE(r.check.ok) << r.check.detail;
}
