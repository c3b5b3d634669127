#pragma once

#include "spotvol/common.hpp"
#include "spotvol/kernels.hpp"
#include "spotvol/panel.hpp"
#include "spotvol/preavg.hpp"
#include "spotvol/shrinkage.hpp"

#include <optional>
#include <vector>

namespace spotvol {

/// sum_k w_k(t) dA_k dB_k^T for two return panels on the same grid.
Matrix spot_cov_cross(const ReturnPanel& a, const ReturnPanel& b, double t, const KernelSpec& kernel);

/// Inverse of a symmetric factor covariance via its eigendecomposition.
/// Throws NumericalFailure when the condition number exceeds `max_condition`.
Matrix factor_cov_inverse(const Matrix& sigma_f, double max_condition = 1e12, double* condition = nullptr);

/// beta = Sigma_yf Sigma_f^{-1}.
Matrix estimate_beta(const Matrix& sigma_yf, const Matrix& sigma_f, double max_condition = 1e12);

/// Sigma_y - Sigma_yf Sigma_f^{-1} Sigma_yf^T, symmetrised.
Matrix idio_cov(const Matrix& sigma_y, const Matrix& sigma_yf, const Matrix& sigma_f, double max_condition = 1e12);

/// beta Sigma_f beta^T + Sigma_x_shrunk.
Matrix factor_total_cov(const Matrix& beta, const Matrix& sigma_f, const Matrix& sigma_x_shrunk);

struct FactorEstimate {
    std::vector<double> times;
    std::vector<Matrix> betas;  ///< p x k per time
    MatrixSeries factor_cov;    ///< k x k
    MatrixSeries idio_cov;      ///< raw
    MatrixSeries idio_shrunk;
    MatrixSeries total_cov;
    std::vector<double> condition_numbers;
    std::vector<double> rhos;
    /// max-norm of Sigma_yf(t) - beta_bar Sigma_f(t), beta_bar the time-averaged loading;
    /// the residual-factor covariation when betas are constant.
    std::vector<double> orthogonality;
};

struct FactorPipelineConfig {
    KernelSpec kernel;                  ///< shared by Sigma_y, Sigma_f and Sigma_yf
    ShrinkageSpec shrinkage;
    std::optional<PreAvgConfig> preavg; ///< set for noisy inputs
    double max_condition = 1e12;
};

/// Full pipeline: (optional pre-averaging), kernel spot covariances, betas,
/// idiosyncratic matrix, shrinkage and low-rank-plus-sparse assembly.
FactorEstimate factor_pipeline(const AssetPanel& y, const AssetPanel& f, const std::vector<double>& eval_times,
                               const FactorPipelineConfig& cfg);

}  // namespace spotvol
