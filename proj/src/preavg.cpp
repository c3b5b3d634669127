#include "spotvol/preavg.hpp"

#include "spotvol/spotcov.hpp"

#include <cmath>
#include <sstream>

namespace spotvol {

void PreAvgConfig::validate() const
{
    filter.validate();
    smooth.validate();
    if (pseudo_grid.size() < 3) throw InvalidArgument("PreAvgConfig: pseudo-grid needs N >= 2");
    pseudo_grid.validate();
}

PreAvgConfig PreAvgConfig::from_ratios(double step, double horizon, double b_star, double h_star,
                                       std::optional<std::size_t> pseudo_count)
{
    if (!(step > 0.0 && horizon > 0.0 && b_star > 0.0 && h_star > 0.0)) {
        throw InvalidArgument("PreAvgConfig::from_ratios: arguments must be positive");
    }
    const auto n = static_cast<std::size_t>(std::llround(horizon / step));
    std::size_t count = pseudo_count.value_or(static_cast<std::size_t>(std::floor(static_cast<double>(n) / b_star)));
    if (count < 2) throw InvalidArgument("PreAvgConfig::from_ratios: pseudo-grid needs N >= 2");
    PreAvgConfig cfg;
    cfg.filter = {KernelFamily::epanechnikov, b_star * step};
    cfg.smooth = {KernelFamily::epanechnikov, h_star * step};
    cfg.pseudo_grid = TimeGrid::uniform(count, horizon);
    return cfg;
}

std::size_t PreAvgConfig::theoretical_pseudo_count(double step, double gamma)
{
    if (!(step > 0.0 && gamma > 0.0)) throw InvalidArgument("theoretical_pseudo_count: positive inputs required");
    const double expo = (2.0 * gamma + 1.0) / (2.0 * (4.0 * gamma + 1.0));
    return std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(std::pow(step, -expo))));
}

namespace {

void warn_overlap(const PreAvgConfig& cfg)
{
    const double pseudo_step = cfg.pseudo_grid.step();
    if (pseudo_step < 0.5 * cfg.filter.bandwidth) {
        std::ostringstream msg;
        msg << "pre-averaging pseudo-grid step " << pseudo_step << " is below half the filter bandwidth "
            << cfg.filter.bandwidth << "; pseudo-returns overlap";
        warn(msg.str());
    }
}

}  // namespace

AssetPanel preaverage(const AssetPanel& panel, const PreAvgConfig& cfg)
{
    if (!panel.is_synchronous()) throw InvalidArgument("preaverage: synchronous panel required");
    cfg.validate();
    warn_overlap(cfg);
    const TimeGrid& grid = panel.grid();
    const Matrix& z = panel.values();
    const auto& taus = cfg.pseudo_grid.points;
    Matrix out(z.rows(), static_cast<Eigen::Index>(taus.size()));
    static const std::vector<double> no_gaps;
    for (std::size_t l = 0; l < taus.size(); ++l) {
        const WeightWindow w = filter_weights(cfg.filter, grid.points, no_gaps, grid.step(), taus[l],
                                              panel.horizon(), cfg.normalization);
        const Eigen::Map<const Vector> a(w.weights.data(), static_cast<Eigen::Index>(w.size()));
        out.col(static_cast<Eigen::Index>(l)) =
            z.middleCols(static_cast<Eigen::Index>(w.first), static_cast<Eigen::Index>(w.size())) * a;
    }
    return AssetPanel::synchronous(panel.ids(), cfg.pseudo_grid, std::move(out));
}

AssetPanel preaverage_async(const AssetPanel& panel, const PreAvgConfig& cfg)
{
    cfg.validate();
    warn_overlap(cfg);
    const auto& taus = cfg.pseudo_grid.points;
    const std::size_t p = panel.asset_count();
    Matrix out(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(taus.size()));
    for (std::size_t i = 0; i < p; ++i) {
        const auto& t = panel.times(i);
        const auto v = panel.series_values(i);
        std::vector<double> gaps(t.size());
        for (std::size_t k = 1; k < t.size(); ++k) gaps[k] = t[k] - t[k - 1];
        gaps[0] = t.size() > 1 ? gaps[1] : panel.horizon();
        for (std::size_t l = 0; l < taus.size(); ++l) {
            WeightWindow w;
            try {
                w = filter_weights(cfg.filter, t, gaps, 0.0, taus[l], panel.horizon(), cfg.normalization);
            } catch (const InvalidArgument&) {
                throw InvalidArgument("preaverage_async: asset '" + panel.ids()[i] +
                                      "' has no observation within the filter window at tau=" +
                                      std::to_string(taus[l]));
            }
            double acc = 0.0;
            for (std::size_t j = 0; j < w.size(); ++j) acc += w.weights[j] * v[w.first + j];
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = acc;
        }
    }
    return AssetPanel::synchronous(panel.ids(), cfg.pseudo_grid, std::move(out));
}

Matrix spot_cov_noisy(const AssetPanel& filtered, double t, const KernelSpec& smooth)
{
    return spot_cov(diff_returns(filtered), t, smooth);
}

MatrixSeries spot_cov_noisy_series(const AssetPanel& noisy, const PreAvgConfig& cfg,
                                   const std::vector<double>& eval_times)
{
    const AssetPanel filtered = noisy.is_synchronous() ? preaverage(noisy, cfg) : preaverage_async(noisy, cfg);
    return spot_cov_series(diff_returns(filtered), eval_times, cfg.smooth);
}

}  // namespace spotvol
