#include "spotvol/rng.hpp"
#include "spotvol/metrics.hpp"
#include "spotvol/simulate.hpp"
#include "spotvol/spotcov.hpp"

#include <gtest/gtest.h>

using namespace spotvol;

namespace {

SimConfig small(std::size_t p = 12, std::uint64_t seed = 4)
{
    SimConfig c;
    c.p = p;
    c.step = c.horizon / 300;
    c.seed = seed;
    return c;
}

}  // namespace

TEST(Rng, PhiloxKnownAnswer)
{
    // Random123 known-answer vector for Philox4x32-10 with zero counter and key.
    const auto out = Philox4x32::generate({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(out[0], 0x6627e8d5u);
    EXPECT_EQ(out[1], 0xe169c58du);
    EXPECT_EQ(out[2], 0xbc57ac4cu);
    EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Rng, StreamsAreIndependentOfOrder)
{
    RandomStream a(5, StreamKind::noise, 3);
    RandomStream b(5, StreamKind::noise, 3);
    RandomStream other(5, StreamKind::noise, 4);
    for (int k = 0; k < 10; ++k) other.normal();
    for (int k = 0; k < 10; ++k) EXPECT_EQ(a.normal(), b.normal());
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
}

TEST(Simulate, DeterministicUnderSeed)
{
    const auto times = equidistant_times(5, kOneTradingDay);
    const SimOutput a = simulate(small(), SimRequest{times, {}});
    const SimOutput b = simulate(small(), SimRequest{times, {}});
    EXPECT_EQ(a.clean.values(), b.clean.values());
    EXPECT_EQ(a.noisy->values(), b.noisy->values());
    for (std::size_t j = 0; j < times.size(); ++j) EXPECT_EQ(a.truth_sigma.matrices[j], b.truth_sigma.matrices[j]);
    const SimOutput c = simulate(small(12, 5), SimRequest{times, {}});
    EXPECT_NE(a.clean.values(), c.clean.values());
}

TEST(Simulate, BandingPattern)
{
    const SimOutput s = simulate(small(), SimRequest{equidistant_times(7, kOneTradingDay), {}});
    for (const Matrix& m : s.truth_sigma.matrices) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                if (std::abs(i - j) > 2) EXPECT_EQ(m(i, j), 0.0);
                else EXPECT_NE(m(i, j), 0.0);
            }
        }
    }
}

TEST(Simulate, BlockAndDecayStructures)
{
    SimConfig c = small(30);
    c.structure = Structure::block_diagonal;
    const SimStructure st = make_structure(c);
    std::size_t total = 0;
    for (auto b : st.block_sizes) total += b;
    EXPECT_EQ(total, 30u);
    const Matrix r = structured_correlation(Structure::exp_decay, 4, {}, 0.5);
    EXPECT_DOUBLE_EQ(r(0, 3), 0.125);
    const Matrix blk = structured_correlation(Structure::block_diagonal, 5, {2, 3}, 0.5);
    EXPECT_EQ(blk(1, 2), 0.0);
    EXPECT_DOUBLE_EQ(blk(2, 4), 0.25);
}

TEST(Simulate, NoiseCycle)
{
    SimConfig c = small();
    const SimStructure st = make_structure(c);
    const SimOutput s = simulate(c, SimRequest{{0.0, 0.5 * kOneTradingDay}, {}});
    ASSERT_TRUE(s.truth_omega);
    for (Eigen::Index i = 0; i < 12; ++i) {
        const double ci = st.noise_scale[static_cast<std::size_t>(i)];
        EXPECT_NEAR(s.truth_omega->matrices[0](i, i), ci, 1e-15 * ci);
        EXPECT_NEAR(s.truth_omega->matrices[1](i, i), 0.1 * ci, 1e-14 * ci);
    }
    EXPECT_DOUBLE_EQ(noise_cycle(0.0, 1.0, 1.0, 0.1), 1.0);
    EXPECT_DOUBLE_EQ(noise_cycle(0.5, 1.0, 1.0, 0.1), 0.1);
}

TEST(Simulate, IntegratedTruthAveragesSpot)
{
    SimConfig c = small(4);
    c.noise = false;
    const SimOutput s = simulate(c, SimRequest{{}, equal_intervals(3, kOneTradingDay)});
    ASSERT_EQ(s.truth_integrated.size(), 3u);
    EXPECT_DOUBLE_EQ(s.truth_integrated.times[1], kOneTradingDay / 3);
    EXPECT_GT(s.truth_integrated.matrices[0](0, 0), 0.0);
}

TEST(SimulateFactor, NullLoadingsGiveIdiosyncraticPath)
{
    SimConfig c = small(6);
    c.noise = false;
    const SimOutput x = simulate_sparse(c, SimRequest{{0.5 * kOneTradingDay}, {}});
    FactorSpec f;
    f.beta_scale = 0.0;
    c.factor = f;
    const SimOutput y = simulate_factor(c, SimRequest{{0.5 * kOneTradingDay}, {}});
    EXPECT_LE((y.clean.values() - x.clean.values()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(y.truth_total->matrices[0], y.truth_sigma.matrices[0]);
}

TEST(SimulateFactor, Deterministic)
{
    SimConfig c = small(5);
    c.factor = FactorSpec{};
    c.factor->dynamics = BetaDynamics::stochastic;
    const SimOutput a = simulate(c, SimRequest{{0.3 * kOneTradingDay}, {}});
    const SimOutput b = simulate(c, SimRequest{{0.3 * kOneTradingDay}, {}});
    EXPECT_EQ(a.clean.values(), b.clean.values());
    EXPECT_EQ(a.factors->values(), b.factors->values());
    EXPECT_EQ(a.truth_beta[0], b.truth_beta[0]);
}

TEST(SimulateFactor, FactorVarianceLevel)
{
    double total = 0.0;
    int count = 0;
    for (int s = 0; s < 60; ++s) {
        SimConfig c = small(2, derive_seed(77, s));
        c.noise = false;
        c.factor = FactorSpec{};
        const SimOutput o = simulate(c, SimRequest{equidistant_times(11, kOneTradingDay), {}});
        for (const Matrix& m : o.truth_factor->matrices) {
            total += m(0, 0);
            ++count;
        }
    }
    EXPECT_NEAR(total / count, 0.09, 0.009);
}

TEST(Asynchronize, ThreeObservationsKeepOne)
{
    const AssetPanel panel = simulate_brownian(Matrix::Identity(2, 2), 2, kOneTradingDay, 1);
    const AssetPanel a = asynchronize(panel, 3);
    EXPECT_EQ(a.times(0).size(), 1u);
    EXPECT_EQ(a.times(1).size(), 1u);
}

TEST(Asynchronize, SurvivalIsOneThird)
{
    const AssetPanel panel = simulate_brownian(Matrix::Identity(4, 4), 1559, kOneTradingDay, 1);
    const AssetPanel a = asynchronize(panel, 3);
    const AssetPanel b = asynchronize(panel, 3);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(a.times(i).size(), 520u);
        EXPECT_EQ(a.times(i), b.times(i));
    }
    EXPECT_FALSE(a.is_synchronous());
}
