#pragma once

#include "spotvol/common.hpp"
#include "spotvol/kernels.hpp"
#include "spotvol/panel.hpp"

#include <vector>

namespace spotvol {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Omega^(t) = (step / 2) sum_k w_k(t) dZ_k dZ_k^T with normalised kernel weights.
Matrix noise_cov(const ReturnPanel& noisy_returns, double t, const KernelSpec& kernel);

MatrixSeries noise_cov_series(const ReturnPanel& noisy_returns, const std::vector<double>& eval_times,
                              const KernelSpec& kernel);

struct AsyncNoiseEstimate {
    Matrix omega;
    BoolMatrix observed;  ///< false where no pairwise increment fell inside the window
    std::size_t missing_pairs() const;
};

/// How dZ_i is formed at a common time of assets i and j.
enum class PairIncrements {
    intersected,  ///< difference between consecutive common times
    own_grid,     ///< difference to the asset's own previous observation
};

/// Increments of every asset pair on the intersection of their observation times.
/// Built once per panel and reused across evaluation times.
class PairwiseIncrements {
public:
    explicit PairwiseIncrements(const AssetPanel& panel, PairIncrements scheme = PairIncrements::intersected);

    std::size_t asset_count() const { return p_; }

    struct Pair {
        std::vector<double> times;     ///< right endpoints on the intersected grid
        std::vector<double> products;  ///< dZ_i dZ_j
        std::vector<double> gaps;      ///< spacing on the intersected grid
    };

    /// Pair (i, j) with i >= j.
    const Pair& pair(std::size_t i, std::size_t j) const;

private:
    std::size_t p_ = 0;
    std::vector<Pair> pairs_;
};

/// Asynchronous estimator on intersected grids: entry (i, j) is
/// (1/2) sum_k w_k dZ_i dZ_j with w_k proportional to K(u_k) times the gap,
/// renormalised per pair to sum to one. Missing pairs are set to zero and
/// flagged in `observed`.
AsyncNoiseEstimate noise_cov_async(const PairwiseIncrements& pairs, double t, const KernelSpec& kernel);
AsyncNoiseEstimate noise_cov_async(const AssetPanel& panel, double t, const KernelSpec& kernel);

MatrixSeries noise_cov_async_series(const AssetPanel& panel, const std::vector<double>& eval_times,
                                    const KernelSpec& kernel, std::vector<BoolMatrix>* masks = nullptr,
                                    PairIncrements scheme = PairIncrements::intersected);

}  // namespace spotvol
