#pragma once

#include "spotvol/common.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace spotvol {

/// Ordered observation times in [0, horizon], measured in years.
struct TimeGrid {
    std::vector<double> points;
    std::optional<double> spacing;  ///< Set when points[k] == k * spacing (+ offset).
    double horizon = kOneTradingDay;

    /// points = {0, dt, 2 dt, ..., n dt} with dt = horizon / n.
    static TimeGrid uniform(std::size_t n, double horizon = kOneTradingDay);
    /// Arbitrary strictly increasing points; throws InvalidArgument otherwise.
    static TimeGrid from_points(std::vector<double> points, double horizon);

    std::size_t size() const { return points.size(); }
    /// Nominal step used by the kernel normalisation: `spacing` when set,
    /// otherwise the mean gap between consecutive points.
    double step() const;
    void validate() const;
};

/// One asset's (time, value) observations.
struct AssetSeries {
    std::vector<double> times;
    std::vector<double> values;
};

enum class PanelLayout { synchronous, asynchronous };

/// Time-stamped log-prices for p assets. Immutable after construction.
class AssetPanel {
public:
    /// Empty panel with no assets.
    AssetPanel() = default;

    /// `values` is p x grid.size().
    static AssetPanel synchronous(std::vector<std::string> ids, TimeGrid grid, Matrix values);
    static AssetPanel asynchronous(std::vector<std::string> ids, std::vector<AssetSeries> series,
                                   double horizon);

    PanelLayout layout() const { return layout_; }
    bool is_synchronous() const { return layout_ == PanelLayout::synchronous; }
    std::size_t asset_count() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }
    double horizon() const { return horizon_; }

    /// Shared grid; throws InvalidArgument on asynchronous panels.
    const TimeGrid& grid() const;
    /// p x n value matrix; throws InvalidArgument on asynchronous panels.
    const Matrix& values() const;

    /// Observation times of asset i (valid for both layouts).
    const std::vector<double>& times(std::size_t i) const;
    /// Observation values of asset i (copied for synchronous panels).
    std::vector<double> series_values(std::size_t i) const;

private:
    PanelLayout layout_ = PanelLayout::synchronous;
    std::vector<std::string> ids_;
    double horizon_ = kOneTradingDay;
    TimeGrid grid_;
    Matrix values_;
    std::vector<AssetSeries> series_;
};

/// Increments of a synchronous panel: column k holds X(t_k) - X(t_{k-1}).
struct ReturnPanel {
    std::vector<std::string> ids;
    Matrix increments;  ///< p x n
    TimeGrid grid;      ///< right endpoints t_1..t_n; step() is the source grid step

    std::size_t asset_count() const { return static_cast<std::size_t>(increments.rows()); }
    std::size_t size() const { return static_cast<std::size_t>(increments.cols()); }
};

enum class TimeFormat {
    seconds,   ///< decimal seconds from the session open; one session = 1/252 year
    iso8601,   ///< YYYY-MM-DDTHH:MM:SS[.fff][Z]; offset from the earliest record
    years,     ///< decimal years, stored verbatim
};

struct LoadOptions {
    bool take_log = true;
    TimeFormat time_format = TimeFormat::seconds;
    /// Horizon T in years; defaults to the last observed time.
    std::optional<double> horizon;
};

/// Reads a long-format CSV with header `time,asset_id,price`.
AssetPanel load_panel(std::istream& in, const LoadOptions& options = {});
AssetPanel load_panel_file(const std::string& path, const LoadOptions& options = {});

/// Writes the panel in the same long format with times in decimal years and
/// values with 17 significant digits, so load_panel(..., years, no log) round-trips.
void write_panel(std::ostream& out, const AssetPanel& panel);

/// Last-observation-carried-forward onto `grid`. Throws InvalidArgument when an asset
/// has no observation at or before grid.points.front().
AssetPanel previous_tick_sync(const AssetPanel& panel, const TimeGrid& grid);

/// First differences of a synchronous panel.
ReturnPanel diff_returns(const AssetPanel& panel);

/// Inverse of diff_returns given the initial levels (p-vector).
Matrix cumulate_returns(const ReturnPanel& returns, const Vector& initial);

}  // namespace spotvol
