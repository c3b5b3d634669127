#include "spotvol/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace spotvol {

namespace {

bool uniform_spacing(const std::vector<double>& pts, double& spacing)
{
    if (pts.size() < 2) return false;
    const double dt = (pts.back() - pts.front()) / static_cast<double>(pts.size() - 1);
    if (!(dt > 0.0)) return false;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const double expected = pts.front() + static_cast<double>(k) * dt;
        if (std::abs(pts[k] - expected) > 1e-9 * dt) return false;
    }
    spacing = dt;
    return true;
}

void check_increasing(const std::vector<double>& t, const std::string& what)
{
    for (std::size_t k = 1; k < t.size(); ++k) {
        if (!(t[k] > t[k - 1])) {
            throw InvalidArgument(what + ": times must be strictly increasing");
        }
    }
}

// Howard Hinnant's days_from_civil.
long long days_from_civil(long long y, unsigned m, unsigned d)
{
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

double parse_iso8601_seconds(const std::string& s)
{
    int year = 0, month = 0, day = 0, hour = 0, minute = 0;
    double second = 0.0;
    char sep = 0;
    int consumed = 0;
    if (std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d:%lf%n", &year, &month, &day, &sep, &hour, &minute,
                    &second, &consumed) < 7 ||
        (sep != 'T' && sep != ' ')) {
        throw InvalidArgument("load_panel: cannot parse ISO-8601 time '" + s + "'");
    }
    const std::string rest = s.substr(static_cast<std::size_t>(consumed));
    if (!rest.empty() && rest != "Z") {
        throw InvalidArgument("load_panel: unsupported time zone suffix in '" + s + "'");
    }
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second >= 61.0) {
        throw InvalidArgument("load_panel: out-of-range field in '" + s + "'");
    }
    const long long days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
    return static_cast<double>(days) * 86400.0 + hour * 3600.0 + minute * 60.0 + second;
}

double parse_double(const std::string& field, const std::string& what, std::size_t line)
{
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw InvalidArgument("load_panel: line " + std::to_string(line) + ": invalid " + what + " '" +
                              field + "'");
    }
    return value;
}

struct Record {
    double time;
    double value;
};

}  // namespace

TimeGrid TimeGrid::uniform(std::size_t n, double horizon)
{
    if (n == 0) throw InvalidArgument("TimeGrid::uniform: n must be positive");
    if (!(horizon > 0.0)) throw InvalidArgument("TimeGrid::uniform: horizon must be positive");
    TimeGrid g;
    g.horizon = horizon;
    g.spacing = horizon / static_cast<double>(n);
    g.points.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) g.points[k] = static_cast<double>(k) * *g.spacing;
    g.points.back() = horizon;
    return g;
}

TimeGrid TimeGrid::from_points(std::vector<double> points, double horizon)
{
    TimeGrid g;
    g.points = std::move(points);
    g.horizon = horizon;
    double dt = 0.0;
    if (uniform_spacing(g.points, dt)) g.spacing = dt;
    g.validate();
    return g;
}

double TimeGrid::step() const
{
    if (spacing) return *spacing;
    if (points.size() >= 2) {
        return (points.back() - points.front()) / static_cast<double>(points.size() - 1);
    }
    return horizon;
}

void TimeGrid::validate() const
{
    check_increasing(points, "TimeGrid");
    if (!points.empty()) {
        const double slack = 1e-12 * std::max(1.0, horizon);
        if (points.front() < -slack || points.back() > horizon + slack) {
            throw InvalidArgument("TimeGrid: points must lie in [0, horizon]");
        }
    }
    if (spacing && !(*spacing > 0.0)) throw InvalidArgument("TimeGrid: spacing must be positive");
}

AssetPanel AssetPanel::synchronous(std::vector<std::string> ids, TimeGrid grid, Matrix values)
{
    grid.validate();
    if (static_cast<std::size_t>(values.rows()) != ids.size() ||
        static_cast<std::size_t>(values.cols()) != grid.size()) {
        throw InvalidArgument("AssetPanel: value matrix must be p x grid size");
    }
    if (!values.allFinite()) throw InvalidArgument("AssetPanel: non-finite value");
    AssetPanel panel;
    panel.layout_ = PanelLayout::synchronous;
    panel.ids_ = std::move(ids);
    panel.horizon_ = grid.horizon;
    panel.grid_ = std::move(grid);
    panel.values_ = std::move(values);
    return panel;
}

AssetPanel AssetPanel::asynchronous(std::vector<std::string> ids, std::vector<AssetSeries> series,
                                    double horizon)
{
    if (ids.size() != series.size()) throw InvalidArgument("AssetPanel: id/series count mismatch");
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        if (s.times.empty()) throw InvalidArgument("AssetPanel: asset '" + ids[i] + "' has no observations");
        if (s.times.size() != s.values.size()) throw InvalidArgument("AssetPanel: time/value length mismatch");
        check_increasing(s.times, "AssetPanel asset '" + ids[i] + "'");
        for (double v : s.values) {
            if (!std::isfinite(v)) throw InvalidArgument("AssetPanel: non-finite value");
        }
    }
    AssetPanel panel;
    panel.layout_ = PanelLayout::asynchronous;
    panel.ids_ = std::move(ids);
    panel.horizon_ = horizon;
    panel.series_ = std::move(series);
    return panel;
}

const TimeGrid& AssetPanel::grid() const
{
    if (!is_synchronous()) throw InvalidArgument("AssetPanel: grid() requires a synchronous panel");
    return grid_;
}

const Matrix& AssetPanel::values() const
{
    if (!is_synchronous()) throw InvalidArgument("AssetPanel: values() requires a synchronous panel");
    return values_;
}

const std::vector<double>& AssetPanel::times(std::size_t i) const
{
    return is_synchronous() ? grid_.points : series_.at(i).times;
}

std::vector<double> AssetPanel::series_values(std::size_t i) const
{
    if (!is_synchronous()) return series_.at(i).values;
    const auto row = values_.row(static_cast<Eigen::Index>(i));
    return {row.begin(), row.end()};
}

AssetPanel load_panel(std::istream& in, const LoadOptions& options)
{
    std::string line;
    if (!std::getline(in, line)) throw InvalidArgument("load_panel: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "time,asset_id,price") {
        throw InvalidArgument("load_panel: expected header 'time,asset_id,price'");
    }

    std::map<std::string, std::vector<Record>> by_asset;
    std::vector<std::string> order;
    std::vector<std::pair<std::string, std::pair<std::string, double>>> iso_rows;
    std::size_t line_no = 1;
    double iso_origin = 0.0;
    bool have_origin = false;

    struct Raw {
        double time;
        std::string asset;
        double price;
    };
    std::vector<Raw> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos) {
            throw InvalidArgument("load_panel: line " + std::to_string(line_no) + ": expected 3 fields");
        }
        const std::string time_field = line.substr(0, c1);
        std::string asset = line.substr(c1 + 1, c2 - c1 - 1);
        const std::string price_field = line.substr(c2 + 1);
        if (asset.empty()) {
            throw InvalidArgument("load_panel: line " + std::to_string(line_no) + ": empty asset_id");
        }
        double t = 0.0;
        switch (options.time_format) {
            case TimeFormat::seconds:
                t = parse_double(time_field, "time", line_no) / (kSecondsPerTradingDay * kTradingDaysPerYear);
                break;
            case TimeFormat::years:
                t = parse_double(time_field, "time", line_no);
                break;
            case TimeFormat::iso8601: {
                t = parse_iso8601_seconds(time_field);
                if (!have_origin || t < iso_origin) iso_origin = t;
                have_origin = true;
                break;
            }
        }
        double price = parse_double(price_field, "price", line_no);
        if (options.take_log) {
            if (!(price > 0.0)) {
                throw InvalidArgument("load_panel: line " + std::to_string(line_no) +
                                      ": non-positive price with take_log");
            }
            price = std::log(price);
        }
        if (!std::isfinite(price) || !std::isfinite(t)) {
            throw InvalidArgument("load_panel: line " + std::to_string(line_no) + ": non-finite value");
        }
        rows.push_back({t, std::move(asset), price});
    }
    if (rows.empty()) throw InvalidArgument("load_panel: no records");

    for (auto& r : rows) {
        if (options.time_format == TimeFormat::iso8601) {
            r.time = (r.time - iso_origin) / (kSecondsPerTradingDay * kTradingDaysPerYear);
        }
        auto [it, inserted] = by_asset.try_emplace(r.asset);
        if (inserted) order.push_back(r.asset);
        it->second.push_back({r.time, r.price});
    }

    double last_time = 0.0;
    std::vector<AssetSeries> series;
    series.reserve(order.size());
    for (const auto& id : order) {
        auto& recs = by_asset[id];
        std::stable_sort(recs.begin(), recs.end(), [](const Record& a, const Record& b) { return a.time < b.time; });
        AssetSeries s;
        for (std::size_t k = 0; k < recs.size(); ++k) {
            if (k > 0 && recs[k].time == recs[k - 1].time) {
                throw InvalidArgument("load_panel: duplicate observation for asset '" + id + "'");
            }
            s.times.push_back(recs[k].time);
            s.values.push_back(recs[k].value);
        }
        last_time = std::max(last_time, s.times.back());
        series.push_back(std::move(s));
    }

    double horizon = options.horizon.value_or(last_time > 0.0 ? last_time : kOneTradingDay);
    if (!(horizon > 0.0)) throw InvalidArgument("load_panel: horizon must be positive");

    const bool synchronous = std::all_of(series.begin(), series.end(),
                                         [&](const AssetSeries& s) { return s.times == series.front().times; });
    if (synchronous) {
        TimeGrid grid = TimeGrid::from_points(series.front().times, horizon);
        Matrix values(static_cast<Eigen::Index>(series.size()), static_cast<Eigen::Index>(grid.size()));
        for (std::size_t i = 0; i < series.size(); ++i) {
            for (std::size_t k = 0; k < grid.size(); ++k) {
                values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = series[i].values[k];
            }
        }
        return AssetPanel::synchronous(order, std::move(grid), std::move(values));
    }
    return AssetPanel::asynchronous(order, std::move(series), horizon);
}

AssetPanel load_panel_file(const std::string& path, const LoadOptions& options)
{
    std::ifstream in(path);
    if (!in) throw InvalidArgument("load_panel: cannot open '" + path + "'");
    return load_panel(in, options);
}

void write_panel(std::ostream& out, const AssetPanel& panel)
{
    out << "time,asset_id,price\n";
    char buf[64];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (std::size_t i = 0; i < panel.asset_count(); ++i) {
        const auto& t = panel.times(i);
        const auto v = panel.series_values(i);
        for (std::size_t k = 0; k < t.size(); ++k) {
            out << fmt(t[k]) << ',' << panel.ids()[i] << ',' << fmt(v[k]) << '\n';
        }
    }
}

AssetPanel previous_tick_sync(const AssetPanel& panel, const TimeGrid& grid)
{
    grid.validate();
    if (grid.points.empty()) throw InvalidArgument("previous_tick_sync: empty grid");
    const std::size_t p = panel.asset_count();
    Matrix values(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < p; ++i) {
        const auto& t = panel.times(i);
        const auto v = panel.series_values(i);
        if (t.front() > grid.points.front()) {
            throw InvalidArgument("previous_tick_sync: asset '" + panel.ids()[i] +
                                  "' has no observation at or before the first grid point");
        }
        std::size_t k = 0;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            while (k + 1 < t.size() && t[k + 1] <= grid.points[g]) ++k;
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g)) = v[k];
        }
    }
    return AssetPanel::synchronous(panel.ids(), grid, std::move(values));
}

ReturnPanel diff_returns(const AssetPanel& panel)
{
    if (!panel.is_synchronous()) throw InvalidArgument("diff_returns: asynchronous panel");
    const TimeGrid& grid = panel.grid();
    if (grid.size() < 2) throw InvalidArgument("diff_returns: need at least two observations");
    const Matrix& x = panel.values();
    const Eigen::Index n = x.cols() - 1;

    ReturnPanel r;
    r.ids = panel.ids();
    r.increments = x.rightCols(n) - x.leftCols(n);
    r.grid.horizon = grid.horizon;
    r.grid.points.assign(grid.points.begin() + 1, grid.points.end());
    r.grid.spacing = grid.step();
    if (!grid.spacing) {
        double dt = 0.0;
        if (uniform_spacing(r.grid.points, dt)) r.grid.spacing = dt;
        else r.grid.spacing.reset();
    }
    return r;
}

Matrix cumulate_returns(const ReturnPanel& returns, const Vector& initial)
{
    if (initial.size() != returns.increments.rows()) {
        throw InvalidArgument("cumulate_returns: initial level size mismatch");
    }
    Matrix out(returns.increments.rows(), returns.increments.cols() + 1);
    out.col(0) = initial;
    for (Eigen::Index k = 0; k < returns.increments.cols(); ++k) {
        out.col(k + 1) = out.col(k) + returns.increments.col(k);
    }
    return out;
}

}  // namespace spotvol
