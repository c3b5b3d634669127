#pragma once

#include "spotvol/common.hpp"
#include "spotvol/kernels.hpp"
#include "spotvol/panel.hpp"

#include <vector>

namespace spotvol {

/// Weighted Gram matrix sum_k w_k x_k x_k^T over the columns of a window.
/// Weights must be nonnegative.
Matrix weighted_gram(const Matrix& increments, const WeightWindow& w);

/// Kernel spot covariance at time t: sum_k w_k(t) dX_k dX_k^T.
Matrix spot_cov(const ReturnPanel& returns, double t, const KernelSpec& kernel);

/// spot_cov at each evaluation time. Failures are rethrown with the offending time.
MatrixSeries spot_cov_series(const ReturnPanel& returns, const std::vector<double>& eval_times,
                             const KernelSpec& kernel);

/// `count` equally spaced times on [0, horizon] including both ends.
std::vector<double> equidistant_times(std::size_t count, double horizon);

struct CvScore {
    double bandwidth = 0.0;
    double score = 0.0;
    bool skipped = false;
};

/// Leave-one-out cross-validation over candidate bandwidths.
///
/// CV(h) = sum_k || dX_k dX_k^T / step - S_{-k}(t_k; h) ||_F^2, where S_{-k} is the
/// spot estimate with observation k removed and the weights renormalised.
/// Candidates for which some t_k has no remaining weight are skipped. Ties go
/// to the smallest bandwidth.
double cv_bandwidth(const ReturnPanel& returns, const std::vector<double>& candidates,
                    KernelFamily family = KernelFamily::epanechnikov, std::vector<CvScore>* scores = nullptr);

}  // namespace spotvol
