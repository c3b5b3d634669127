#include "spotvol/rng.hpp"
#include "spotvol/simulate.hpp"
#include "spotvol/spotcov.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace spotvol;

namespace {

ReturnPanel make_returns(const Matrix& inc)
{
    ReturnPanel r;
    for (Eigen::Index i = 0; i < inc.rows(); ++i) r.ids.push_back("a" + std::to_string(i));
    r.increments = inc;
    const TimeGrid full = TimeGrid::uniform(static_cast<std::size_t>(inc.cols()));
    r.grid = TimeGrid::from_points({full.points.begin() + 1, full.points.end()}, full.horizon);
    r.grid.spacing = full.step();
    return r;
}

}  // namespace

TEST(SpotCov, ZeroReturnsGiveZero)
{
    const ReturnPanel r = make_returns(Matrix::Zero(3, 100));
    EXPECT_TRUE(spot_cov(r, 0.5 * kOneTradingDay, KernelSpec{KernelFamily::epanechnikov, 0.1 * kOneTradingDay}).isZero(0.0));
}

TEST(SpotCov, ConstantSquaredIncrementsGiveOne)
{
    const std::size_t n = 200;
    const double step = kOneTradingDay / n;
    const ReturnPanel r = make_returns(Matrix::Constant(1, n, std::sqrt(step)));
    for (double t : {0.0, 0.4 * kOneTradingDay, kOneTradingDay}) {
        EXPECT_NEAR(spot_cov(r, t, KernelSpec{KernelFamily::epanechnikov, 20 * step})(0, 0), 1.0, 1e-12);
    }
}

TEST(SpotCov, DuplicatedAsset)
{
    const AssetPanel panel = simulate_brownian(Matrix::Identity(2, 2), 300, kOneTradingDay, 5);
    ReturnPanel r = diff_returns(panel);
    r.increments.row(1) = r.increments.row(0);
    const Matrix s = spot_cov(r, 0.5 * kOneTradingDay, KernelSpec{KernelFamily::epanechnikov, 0.2 * kOneTradingDay});
    EXPECT_DOUBLE_EQ(s(0, 0), s(0, 1));
    EXPECT_DOUBLE_EQ(s(1, 1), s(0, 1));
}

TEST(SpotCov, BrownianConstantCovariance)
{
    Matrix sigma(2, 2);
    sigma << 1.0, 0.5, 0.5, 1.0;
    const std::size_t n = 100000;
    const double h = std::pow(static_cast<double>(n), -0.2) * kOneTradingDay;
    std::vector<double> errors;
    for (int seed = 0; seed < 100; ++seed) {
        const ReturnPanel r = diff_returns(simulate_brownian(sigma, n, kOneTradingDay, derive_seed(99, seed)));
        double err = 0.0;
        for (double t : {0.2, 0.4, 0.6, 0.8}) {
            err = std::max(err, (spot_cov(r, t * kOneTradingDay, KernelSpec{KernelFamily::epanechnikov, h}) - sigma).cwiseAbs().maxCoeff());
        }
        errors.push_back(err);
    }
    std::nth_element(errors.begin(), errors.begin() + 50, errors.end());
    EXPECT_LE(errors[50], 0.05);
}

TEST(SpotCovSeries, Lengths)
{
    const ReturnPanel r = diff_returns(simulate_brownian(Matrix::Identity(3, 3), 500, kOneTradingDay, 1));
    const KernelSpec k{KernelFamily::epanechnikov, 0.1 * kOneTradingDay};
    const MatrixSeries one = spot_cov_series(r, {0.3 * kOneTradingDay}, k);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one.matrices[0], spot_cov(r, 0.3 * kOneTradingDay, k));
    const auto times = equidistant_times(21, kOneTradingDay);
    ASSERT_EQ(times.size(), 21u);
    EXPECT_EQ(times.front(), 0.0);
    EXPECT_EQ(times.back(), kOneTradingDay);
    EXPECT_EQ(spot_cov_series(r, times, k).size(), 21u);
    EXPECT_TRUE(spot_cov_series(r, {}, k).empty());
}

TEST(SpotCovSeries, FailureNamesTheTime)
{
    const ReturnPanel r = diff_returns(simulate_brownian(Matrix::Identity(2, 2), 50, kOneTradingDay, 1));
    try {
        spot_cov_series(r, {0.5 * kOneTradingDay, 10.0}, KernelSpec{KernelFamily::epanechnikov, 0.01 * kOneTradingDay});
        FAIL() << "expected an error";
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("10"), std::string::npos);
    }
}

TEST(CrossValidation, SingleCandidate)
{
    const ReturnPanel r = diff_returns(simulate_brownian(Matrix::Identity(2, 2), 200, kOneTradingDay, 3));
    EXPECT_EQ(cv_bandwidth(r, {0.1 * kOneTradingDay}), 0.1 * kOneTradingDay);
}

TEST(CrossValidation, TiesGoToSmallerBandwidth)
{
    // With the uniform kernel both bandwidths cover the same neighbours.
    const ReturnPanel r = diff_returns(simulate_brownian(Matrix::Identity(2, 2), 100, kOneTradingDay, 3));
    const double step = r.grid.step();
    std::vector<CvScore> scores;
    EXPECT_EQ(cv_bandwidth(r, {2.5 * step, 2.2 * step}, KernelFamily::uniform, &scores), 2.2 * step);
    ASSERT_EQ(scores.size(), 2u);
    EXPECT_EQ(scores[0].score, scores[1].score);
}

TEST(CrossValidation, MatchesBruteForce)
{
    Matrix sigma(2, 2);
    sigma << 1.0, 0.3, 0.3, 2.0;
    const ReturnPanel r = diff_returns(simulate_brownian(sigma, 300, kOneTradingDay, 8));
    const double step = r.grid.step();
    const std::vector<double> cands{5 * step, 15 * step, 40 * step, 100 * step};
    std::vector<CvScore> scores;
    const double best = cv_bandwidth(r, cands, KernelFamily::epanechnikov, &scores);

    double brute_best = 0.0, brute_score = 1e300;
    for (std::size_t c = 0; c < cands.size(); ++c) {
        double score = 0.0;
        const auto& pts = r.grid.points;
        for (std::size_t k = 0; k < pts.size(); ++k) {
            Matrix s = Matrix::Zero(2, 2);
            double wsum = 0.0;
            for (std::size_t l = 0; l < pts.size(); ++l) {
                if (l == k) continue;
                const double w = kernel_eval(KernelFamily::epanechnikov, (pts[l] - pts[k]) / cands[c]);
                s += w * r.increments.col(static_cast<Eigen::Index>(l)) * r.increments.col(static_cast<Eigen::Index>(l)).transpose();
                wsum += w;
            }
            s /= step * wsum;
            const auto x = r.increments.col(static_cast<Eigen::Index>(k));
            score += (x * x.transpose() / step - s).squaredNorm();
        }
        EXPECT_NEAR(scores[c].score, score, 1e-9 * score);
        if (score < brute_score) {
            brute_score = score;
            brute_best = cands[c];
        }
    }
    EXPECT_EQ(best, brute_best);
}
