#pragma once

#include "spotvol/kernels.hpp"
#include "spotvol/noisecov.hpp"
#include "spotvol/panel.hpp"
#include "spotvol/shrinkage.hpp"
#include "spotvol/simulate.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace spotvol {

enum class ExperimentMode {
    simulate,
    estimate_spot,
    estimate_noisy,
    estimate_noisecov,
    estimate_factor,
    estimate_precision,
    evaluate,
    table_repro,
};

ExperimentMode parse_mode(const std::string& name);
std::string to_string(ExperimentMode mode);

/// Raised for invalid configuration; carries the offending key.
class ConfigError : public InvalidArgument {
public:
    ConfigError(const std::string& key, const std::string& message)
        : InvalidArgument(key + ": " + message), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

struct ExperimentConfig {
    ExperimentMode mode = ExperimentMode::simulate;
    std::string input;          ///< panel CSV, or a matrix series for precision / evaluate
    std::string factor_input;   ///< factor panel for estimate_factor
    std::string truth_input;    ///< truth matrix series for evaluate
    std::string output_dir = "out";
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    std::size_t replications = 1;

    SimConfig sim;
    bool factor_model = false;
    BetaDynamics beta_dynamics = BetaDynamics::constant;
    double beta_scale = 1.0;

    std::size_t eval_count = 21;
    std::vector<double> eval_times;  ///< explicit list overrides eval_count
    std::size_t intervals = 0;       ///< simulate: integrated truth over equal intervals

    KernelFamily kernel_family = KernelFamily::epanechnikov;
    double h_star = 90.0;
    std::optional<double> bandwidth;  ///< years; overrides h_star
    std::vector<double> cv_candidates;  ///< h_star values; non-empty enables cross-validation

    std::optional<ShrinkRule> rule;  ///< unset: no shrinkage
    TuningKind tuning = TuningKind::pd_grid;
    double rho = 0.0;
    double grid_step = 0.01;
    double eigen_floor = 1e-10;

    double b_star = 4.0;
    std::optional<std::size_t> pseudo_count;
    FilterNormalization normalization = FilterNormalization::riemann_sum;

    double h1_star = 90.0;
    PairIncrements async_increments = PairIncrements::intersected;

    std::optional<double> clime_rho;
    double clime_tol = 1e-9;

    LoadOptions load;
    std::size_t sync_points = 0;  ///< previous-tick grid size for asynchronous input to spot estimation

    std::string table;
    std::optional<double> table_noise_ratio;
    std::optional<double> table_grid_step;
    std::optional<std::size_t> table_stride;

    bool with_relative = false;  ///< evaluate: also report the relative loss

    std::optional<ShrinkageSpec> shrinkage() const;
    void validate() const;
};

/// Applies `section.key = value` pairs; unknown keys throw ConfigError.
void apply_config(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv);
ExperimentConfig load_config_file(const std::string& path);

/// Canonical text form; its hash identifies the run in the manifest.
std::string canonical_config(const ExperimentConfig& cfg);

/// Runs one experiment. Returns 0 on success, 3 on runtime failure and 4 when
/// some replications failed. Configuration errors throw ConfigError.
int run_experiment(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace spotvol
