#pragma once

#include "spotvol/metrics.hpp"
#include "spotvol/noisecov.hpp"
#include "spotvol/simulate.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace spotvol {

enum class TableKind { spot, factor, async, integrated };

/// One Monte Carlo table. Bandwidths are multiples of the sampling step.
struct TableSpec {
    std::string target;
    TableKind kind = TableKind::spot;
    Structure structure = Structure::banding;
    std::size_t p = 200;
    double h_star = 90.0;
    double b_star = 4.0;
    double h1_star = 90.0;
    std::size_t eval_count = 21;
    std::size_t intervals = 20;
    std::size_t stride = 1;  ///< integrated: spot estimates averaged at every stride-th step
    double noise_ratio = 0.0075;
    std::optional<std::size_t> pseudo_count;  ///< N; floor(n / b_star) when unset
    double grid_step = 0.1;                   ///< PD search grid on [0, 1]
    PairIncrements async_increments = PairIncrements::own_grid;
    std::vector<BetaDynamics> dynamics;  ///< factor tables
    bool relative_loss = false;
};

/// Targets: table1_<structure> (p=200), table2_<structure> (p=500),
/// table3_<structure> and table4_<structure> (factor model, p=500),
/// tableD1_<structure> and tableD2_<structure> (asynchronous, p=200 and 500),
/// tableD3_<structure> (integrated, p=500).
TableSpec table_spec(const std::string& target);
std::vector<std::string> table_targets();

struct TableCell {
    std::string group;      ///< beta dynamics for factor tables, empty otherwise
    std::string estimator;  ///< sigma_hat, sigma_tilde, omega_hat, total_hat, ...
    std::string rule;       ///< Naive, Hard, Soft, AL, SCAD
    LossReport loss;
};

struct TableResult {
    TableSpec spec;
    std::size_t replications = 0;
    std::vector<std::size_t> failed;  ///< indices of failed replications
    std::vector<std::string> failures;
    std::vector<TableCell> cells;

    const TableCell& cell(const std::string& estimator, const std::string& rule, const std::string& group = "") const;
};

struct TableRunOptions {
    std::size_t replications = 50;
    std::uint64_t seed = 20240601;
    std::size_t threads = 1;
    std::function<void(std::size_t done, std::size_t total)> progress;
};

TableResult run_table(const TableSpec& spec, const TableRunOptions& opt);

/// Columns target,group,estimator,rule,mfl,msl,mrl,replications,failed.
void write_table_csv(std::ostream& out, const TableResult& result);
/// Aligned text rendering with one block per estimator.
void write_table_summary(std::ostream& out, const TableResult& result);

}  // namespace spotvol
