#include "spotvol/panel.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace spotvol;

TEST(LoadPanel, SharedTimesGiveSynchronousPanel)
{
    std::istringstream in("time,asset_id,price\n0,A,1\n0,B,2\n60,A,1.1\n60,B,2.1\n120,A,1.2\n120,B,2.2\n");
    const AssetPanel panel = load_panel(in);
    EXPECT_TRUE(panel.is_synchronous());
    EXPECT_EQ(panel.asset_count(), 2u);
    EXPECT_EQ(panel.grid().size(), 3u);
    EXPECT_NEAR(panel.values()(1, 2), std::log(2.2), 1e-15);
}

TEST(LoadPanel, UnequalGridsGiveAsynchronousPanel)
{
    std::istringstream in("time,asset_id,price\n1,A,10\n3,A,11\n2,B,20\n");
    const AssetPanel panel = load_panel(in);
    EXPECT_FALSE(panel.is_synchronous());
    EXPECT_EQ(panel.times(0).size(), 2u);
    EXPECT_EQ(panel.times(1).size(), 1u);
    EXPECT_NEAR(panel.times(1)[0], 2.0 / kSecondsPerTradingDay * kOneTradingDay, 1e-18);
}

TEST(LoadPanel, ZeroPriceWithLogIsAnError)
{
    std::istringstream in("time,asset_id,price\n0,A,0\n1,A,1\n");
    EXPECT_THROW(load_panel(in), InvalidArgument);
}

TEST(LoadPanel, MalformedRowsAreErrors)
{
    std::istringstream missing("time,asset_id,price\n0,A\n");
    EXPECT_THROW(load_panel(missing), InvalidArgument);
    std::istringstream bad("time,asset_id,price\n0,A,abc\n");
    EXPECT_THROW(load_panel(bad), InvalidArgument);
}

TEST(LoadPanel, Iso8601Times)
{
    std::istringstream in("time,asset_id,price\n2024-01-02T09:30:00,A,1\n2024-01-02T09:30:15Z,A,2\n");
    LoadOptions opt;
    opt.time_format = TimeFormat::iso8601;
    opt.take_log = false;
    const AssetPanel panel = load_panel(in, opt);
    EXPECT_NEAR(panel.times(0)[1], 15.0 / kSecondsPerTradingDay * kOneTradingDay, 1e-18);
}

TEST(LoadPanel, WriteRoundTrip)
{
    const AssetPanel panel = AssetPanel::synchronous({"A", "B"}, TimeGrid::uniform(3), (Matrix(2, 4) << 0.1, 0.2, 0.3, 0.4, 1, 2, 3, 4).finished());
    std::stringstream ss;
    write_panel(ss, panel);
    LoadOptions opt;
    opt.take_log = false;
    opt.time_format = TimeFormat::years;
    opt.horizon = kOneTradingDay;
    const AssetPanel back = load_panel(ss, opt);
    ASSERT_TRUE(back.is_synchronous());
    EXPECT_EQ(back.values(), panel.values());
    EXPECT_EQ(back.grid().points, panel.grid().points);
}

TEST(PreviousTick, SynchronousInputIsUnchanged)
{
    const TimeGrid grid = TimeGrid::uniform(4);
    const Matrix v = (Matrix(2, 5) << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10).finished();
    const AssetPanel panel = AssetPanel::synchronous({"A", "B"}, grid, v);
    const AssetPanel out = previous_tick_sync(panel, grid);
    EXPECT_EQ(out.values(), v);
}

TEST(PreviousTick, LastTickRule)
{
    const AssetPanel panel = AssetPanel::asynchronous({"A"}, {AssetSeries{{0.1, 0.3}, {5.0, 6.0}}}, 0.5);
    const AssetPanel out = previous_tick_sync(panel, TimeGrid::from_points({0.2, 0.4}, 0.5));
    EXPECT_EQ(out.values()(0, 0), 5.0);
    EXPECT_EQ(out.values()(0, 1), 6.0);
}

TEST(PreviousTick, GridBeforeFirstTickIsAnError)
{
    const AssetPanel panel = AssetPanel::asynchronous({"A"}, {AssetSeries{{0.25, 0.3}, {5.0, 6.0}}}, 0.5);
    EXPECT_THROW(previous_tick_sync(panel, TimeGrid::from_points({0.2, 0.4}, 0.5)), InvalidArgument);
}

TEST(DiffReturns, ConstantPricesGiveZeroIncrements)
{
    const AssetPanel panel = AssetPanel::synchronous({"A"}, TimeGrid::uniform(3), Matrix::Constant(1, 4, 2.5));
    EXPECT_TRUE(diff_returns(panel).increments.isZero(0.0));
}

TEST(DiffReturns, Arithmetic)
{
    const AssetPanel panel = AssetPanel::synchronous({"A"}, TimeGrid::uniform(2), (Matrix(1, 3) << 0, 1, 3).finished());
    const ReturnPanel r = diff_returns(panel);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r.increments(0, 0), 1.0);
    EXPECT_EQ(r.increments(0, 1), 2.0);
}

TEST(DiffReturns, CumulateRoundTrip)
{
    const Matrix v = (Matrix(2, 4) << 1, 1.5, 0.5, 2, -1, 3, 2, 2).finished();
    const AssetPanel panel = AssetPanel::synchronous({"A", "B"}, TimeGrid::uniform(3), v);
    const Matrix back = cumulate_returns(diff_returns(panel), v.col(0));
    EXPECT_TRUE(back.isApprox(v, 1e-15));
}

TEST(DiffReturns, AsynchronousInputIsAnError)
{
    const AssetPanel panel = AssetPanel::asynchronous({"A", "B"}, {AssetSeries{{0.1}, {1}}, AssetSeries{{0.2}, {1}}}, 1.0);
    EXPECT_THROW(diff_returns(panel), InvalidArgument);
}
