#pragma once

#include "spotvol/common.hpp"
#include "spotvol/panel.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spotvol {

enum class Structure { banding, block_diagonal, exp_decay };
enum class BetaDynamics { constant, deterministic, stochastic };

Structure parse_structure(const std::string& name);
std::string to_string(Structure s);
BetaDynamics parse_beta_dynamics(const std::string& name);
std::string to_string(BetaDynamics d);

/// Three-factor model with CIR variances and leverage.
struct FactorSpec {
    std::array<double, 3> kappa{3.0, 4.0, 5.0};
    std::array<double, 3> alpha{0.09, 0.04, 0.06};
    std::array<double, 3> nu{0.3, 0.4, 0.3};
    std::array<double, 3> mu{0.05, 0.03, 0.02};
    std::array<double, 3> leverage{-0.6, -0.4, -0.25};
    std::array<double, 3> correlation{0.05, 0.10, 0.15};  ///< (rho12, rho13, rho23)
    BetaDynamics dynamics = BetaDynamics::constant;
    /// Loadings are multiplied by this factor (0 gives Y == X).
    double beta_scale = 1.0;
};

struct SimConfig {
    std::size_t p = 200;
    double horizon = kOneTradingDay;
    double step = kOneTradingDay / 1560.0;  ///< 15 seconds
    std::size_t substeps = 1;               ///< Euler steps per observation
    Structure structure = Structure::banding;

    // log-variance OU: d log S = -speed (level + log S) dt + volvol dW
    double logvar_level = 0.157;
    double logvar_speed = 0.6;
    double logvar_volvol = 0.25;
    double leverage_lo = -0.62;
    double leverage_hi = -0.30;

    // correlation driver: d kappa = speed (mean - kappa) dt + vol kappa dW
    double corr_speed = 0.03;
    double corr_mean = 0.64;
    double corr_vol = 0.118;
    double corr_idio_weight = 0.96;   ///< variance share of the independent driver
    double corr_market_loading = -0.2;

    bool noise = true;
    double omega_hi = 1.0;
    double omega_lo = 0.1;
    double noise_kappa_hi = 0.5;
    double noise_kappa_lo = -0.5;
    /// Noise variance scale c as a share of one day's integrated variance.
    double noise_ratio = 0.005;
    /// Explicit per-asset c_i; overrides noise_ratio when set.
    std::optional<std::vector<double>> noise_scale;

    std::optional<FactorSpec> factor;
    bool async = false;

    /// Block sizes for the block-diagonal structure; generated from the
    /// structure seed when empty (largest block fixed, others uniform).
    std::vector<std::size_t> block_sizes;
    std::size_t block_max = 0;  ///< 0 selects 20 for p <= 200, 40 otherwise
    std::size_t block_min = 0;  ///< 0 selects block_max / 4

    std::uint64_t seed = 1;            ///< replication seed
    std::uint64_t structure_seed = 1;  ///< leverage, blocks and noise scales

    std::size_t observation_count() const;  ///< n = horizon / step
    void validate() const;
};

/// Per-run quantities fixed across replications.
struct SimStructure {
    std::vector<double> leverage;           ///< iota_i
    std::vector<std::size_t> block_sizes;   ///< empty unless block-diagonal
    std::vector<double> noise_scale;        ///< c_i
};

SimStructure make_structure(const SimConfig& cfg);

/// Block sizes summing to p: the first block has size `largest`, the rest are
/// uniform on [lo, largest] with the last one truncated.
std::vector<std::size_t> random_block_sizes(std::size_t p, std::size_t largest, std::size_t lo, std::uint64_t seed);

/// Correlation-style matrix with entries r^{|i-j|} on the structural pattern.
Matrix structured_correlation(Structure s, std::size_t p, const std::vector<std::size_t>& blocks, double r);

/// Cyclical noise level (cos(2 pi t / T) + 1) / 2 * (hi - lo) + lo.
double noise_cycle(double t, double horizon, double hi, double lo);

struct SimRequest {
    std::vector<double> eval_times;
    /// Intervals over which (1/|I|) int_I Sigma_t dt is accumulated.
    std::vector<std::pair<double, double>> intervals;
};

struct SimOutput {
    std::uint64_t seed = 0;
    AssetPanel clean;                       ///< X, or Y for factor models
    std::optional<AssetPanel> noisy;        ///< Z
    std::optional<AssetPanel> factors;      ///< F
    std::optional<AssetPanel> noisy_factors;
    MatrixSeries truth_sigma;               ///< Sigma_t (idiosyncratic for factor models)
    std::optional<MatrixSeries> truth_total;  ///< Sigma^Y for factor models
    std::optional<MatrixSeries> truth_factor; ///< Sigma^F
    std::optional<MatrixSeries> truth_omega;
    std::vector<Matrix> truth_beta;         ///< p x 3 at eval times
    MatrixSeries truth_integrated;          ///< per requested interval, keyed by interval start
};

/// Sparse-structure DGP with optional noise and asynchronicity.
SimOutput simulate_sparse(const SimConfig& cfg, const SimRequest& request);

/// Factor DGP: dY = beta(t) dF + dX with X from the sparse DGP.
SimOutput simulate_factor(const SimConfig& cfg, const SimRequest& request);

/// Dispatches on cfg.factor.
SimOutput simulate(const SimConfig& cfg, const SimRequest& request);

/// Keeps one uniformly chosen observation of every consecutive block of three,
/// per asset; a trailing partial block is kept intact.
AssetPanel asynchronize(const AssetPanel& panel, std::uint64_t seed);

/// Brownian motion with constant covariance on a uniform grid of n steps, X_0 = 0.
AssetPanel simulate_brownian(const Matrix& sigma, std::size_t n, double horizon, std::uint64_t seed);

}  // namespace spotvol
