#pragma once

#include "spotvol/common.hpp"
#include "spotvol/kernels.hpp"
#include "spotvol/panel.hpp"

#include <optional>
#include <vector>

namespace spotvol {

struct PreAvgConfig {
    KernelSpec filter;      ///< L and b
    TimeGrid pseudo_grid;   ///< tau_l = l * T / N, l = 0..N
    KernelSpec smooth;      ///< K and h used on the pseudo-grid
    FilterNormalization normalization = FilterNormalization::riemann_sum;

    void validate() const;

    /// b = b_star * step, h = h_star * step, N = floor(n / b_star) with n = horizon / step
    /// unless `pseudo_count` is given.
    static PreAvgConfig from_ratios(double step, double horizon, double b_star, double h_star,
                                    std::optional<std::size_t> pseudo_count = std::nullopt);

    /// N = step^{-(2 gamma + 1) / (2 (4 gamma + 1))}, rounded down and at least 2.
    static std::size_t theoretical_pseudo_count(double step, double gamma = 0.5);
};

/// Filtered prices X~_{i, tau_l} = sum_k a_k(tau_l) Z_{i, t_k} on the pseudo-grid.
AssetPanel preaverage(const AssetPanel& panel, const PreAvgConfig& cfg);

/// Per-asset version for asynchronous panels: the spacing before each
/// observation replaces the uniform step (the first observation reuses the
/// following gap).
AssetPanel preaverage_async(const AssetPanel& panel, const PreAvgConfig& cfg);

/// Kernel spot covariance of the pre-averaged prices at t.
Matrix spot_cov_noisy(const AssetPanel& filtered, double t, const KernelSpec& smooth);

/// Pre-average (synchronous or asynchronous) and evaluate at each time.
MatrixSeries spot_cov_noisy_series(const AssetPanel& noisy, const PreAvgConfig& cfg,
                                   const std::vector<double>& eval_times);

}  // namespace spotvol
