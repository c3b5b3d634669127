#pragma once

#include "spotvol/common.hpp"
#include "spotvol/kernels.hpp"
#include "spotvol/panel.hpp"
#include "spotvol/shrinkage.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace spotvol {

struct MatrixNorms {
    double spectral = 0.0;
    double frobenius = 0.0;
    double entry_l1 = 0.0;  ///< sum of |a_ij|
    double col_l1 = 0.0;    ///< max column sum of |a_ij|
    double inf_q = 0.0;     ///< max_i sum_j |a_ij|^q
    double max = 0.0;
};

/// `q` in [0, 1) selects the row-wise l_q measure (|a|^0 counts nonzeros).
MatrixNorms matrix_norms(const Matrix& a, double q = 0.0);

/// Largest singular value; symmetric inputs use the eigenvalues of (A + A^T) / 2.
double spectral_norm(const Matrix& a);

/// p^{-1/2} || S^{-1/2} (est - S) S^{-1/2} ||_F for positive definite S.
double relative_norm(const Matrix& est, const Matrix& truth_pd);

/// Precomputed whitening for repeated relative_norm calls against one truth.
class RelativeNorm {
public:
    explicit RelativeNorm(const Matrix& truth_pd);
    double operator()(const Matrix& est) const;

private:
    Matrix truth_;
    Eigen::LLT<Matrix> llt_;
};

struct LossReport {
    double mfl = 0.0;
    double msl = 0.0;
    std::optional<double> mrl;
    /// [replication][time]
    std::vector<std::vector<double>> frobenius;
    std::vector<std::vector<double>> spectral;
    std::vector<std::vector<double>> relative;
    std::size_t failed_replications = 0;

    /// Mean over times per replication, then over replications.
    void finalise();
};

/// Per-replication losses for one estimator.
struct ReplicationLoss {
    std::vector<double> frobenius;
    std::vector<double> spectral;
    std::vector<double> relative;
};

ReplicationLoss series_loss(const MatrixSeries& est, const MatrixSeries& truth, bool with_relative = false,
                            double scale = 1.0);

/// MFL and MSL (and MRL when requested) over replications of aligned series.
LossReport mfl_msl(const std::vector<MatrixSeries>& est, const std::vector<MatrixSeries>& truth,
                   bool with_relative = false);

enum class IntegratedMode { realized_shrunk, spot_averaged };

struct IntegratedOptions {
    IntegratedMode mode = IntegratedMode::spot_averaged;
    std::optional<ShrinkageSpec> shrinkage;  ///< unset disables shrinkage
    KernelSpec kernel;                       ///< spot_averaged only
    std::size_t stride = 1;                  ///< spot_averaged: use every stride-th in-interval time
};

/// Integrated covariance over [a, b]: either the realized outer products
/// divided by the interval length and shrunk once, or the mean of shrunk
/// spot estimates at the in-interval sample times.
Matrix integrated_cov(const ReturnPanel& returns, std::pair<double, double> interval, const IntegratedOptions& opt);

/// `count` equal intervals partitioning [0, horizon].
std::vector<std::pair<double, double>> equal_intervals(std::size_t count, double horizon);

struct RateDiagnostics {
    double zeta = 0.0;                 ///< h^gamma + sqrt(step log(max(p, 1/step)) / h)
    std::optional<double> zeta_star;   ///< h^gamma + sqrt(log(max(p, N)) / (N h))
    double delta = 0.0;                ///< zeta with h1 in place of h
    std::optional<double> nu;          ///< sqrt(N log(max(p, 1/step))) (b^{1/2} + (b / step)^{-1/2})
    double sparse_rate = 0.0;          ///< varpi zeta^{1-q}
};

struct RateInputs {
    double h = 0.0;
    double step = 0.0;
    double p = 1.0;
    double gamma = 0.5;
    double q = 0.0;
    double varpi = 1.0;
    std::optional<double> h1;           ///< defaults to h
    std::optional<double> pseudo_count; ///< N
    std::optional<double> b;
};

RateDiagnostics rate_diag(const RateInputs& in);

/// |corr_ij| >= threshold, diagonal always true.
Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> sparsity_pattern(const Matrix& corr, double threshold = 0.15);

/// Converts a covariance to a correlation matrix (zero variance rows stay zero).
Matrix to_correlation(const Matrix& cov);

}  // namespace spotvol
