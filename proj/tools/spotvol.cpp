#include "spotvol/experiment.hpp"
#include "spotvol/io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

// Flag values land in a key map so the CLI and config files share one parser.
struct Flags {
    std::vector<std::pair<std::string, std::string>> bindings;  // config key -> flag storage
    std::map<std::string, std::string> values;

    void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help)
    {
        app->add_option(flag, values[key], help);
        bindings.emplace_back(key, flag);
    }

    std::map<std::string, std::string> collected() const
    {
        std::map<std::string, std::string> out;
        for (const auto& [key, value] : values) {
            if (!value.empty()) out[key] = value;
        }
        return out;
    }
};

void add_common(CLI::App* app, Flags& f)
{
    f.add(app, "--eval-count", "eval.count", "number of equidistant evaluation times");
    f.add(app, "--eval-times", "eval.times", "comma-separated evaluation times (years)");
    f.add(app, "--kernel", "kernel.family", "epanechnikov, uniform, triangular or quartic");
    f.add(app, "--h-star", "kernel.h_star", "bandwidth in sampling steps");
    f.add(app, "--bandwidth", "kernel.bandwidth", "bandwidth in years");
    f.add(app, "--rule", "shrink.rule", "none, hard, soft, adaptive_lasso, scad");
    f.add(app, "--tuning", "shrink.tuning", "pd_grid, fixed, entry_adaptive");
    f.add(app, "--rho", "shrink.rho", "threshold level for fixed tuning");
    f.add(app, "--time-format", "load.time_format", "seconds, iso8601 or years");
    f.add(app, "--take-log", "load.take_log", "log-transform prices (true/false)");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spot volatility matrix estimation from high-frequency panels"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::vector<std::string> overrides;
    Flags f;
    app.add_option("--config", config_path, "config file with section.key = value lines");
    app.add_option("--set", overrides, "override a config key, key=value (repeatable)");
    f.add(&app, "--seed", "run.seed", "base seed");
    f.add(&app, "--threads", "run.threads", "worker threads");
    f.add(&app, "--output,-o", "run.output_dir", "output directory");

    auto* sim = app.add_subcommand("simulate", "simulate price panels and truth series");
    f.add(sim, "--p", "sim.p", "number of assets");
    f.add(sim, "--n", "sim.n", "observations per asset");
    f.add(sim, "--structure", "sim.structure", "banding, block_diagonal or exp_decay");
    f.add(sim, "--noise", "sim.noise", "add microstructure noise (true/false)");
    f.add(sim, "--noise-ratio", "sim.noise_ratio", "noise-to-signal ratio");
    f.add(sim, "--async", "sim.async", "asynchronous observation times (true/false)");
    f.add(sim, "--factor", "sim.factor", "factor model (true/false)");
    f.add(sim, "--beta-dynamics", "sim.beta_dynamics", "constant, deterministic or stochastic");
    f.add(sim, "--eval-count", "eval.count", "number of equidistant evaluation times");
    f.add(sim, "--intervals", "eval.intervals", "integrated truth over this many intervals");

    std::string estimate_mode = "spot";
    auto* est = app.add_subcommand("estimate", "estimate spot covariance series from a panel");
    est->add_option("--mode", estimate_mode, "spot, noisy, noisecov or factor")
        ->check(CLI::IsMember({"spot", "noisy", "noisecov", "factor"}));
    f.add(est, "--input,-i", "run.input", "panel CSV");
    f.add(est, "--factor-input", "run.factor_input", "factor panel CSV");
    f.add(est, "--cv", "kernel.cv_candidates", "comma-separated h_star candidates for cross-validation");
    f.add(est, "--b-star", "preavg.b_star", "pre-averaging window in sampling steps");
    f.add(est, "--pseudo-count", "preavg.pseudo_count", "number of pseudo-observations");
    f.add(est, "--h1-star", "noise.h1_star", "noise bandwidth in sampling steps");
    f.add(est, "--async-increments", "noise.async_increments", "intersected or own_grid");
    f.add(est, "--sync-points", "load.sync_points", "previous-tick grid size for asynchronous input");
    f.add(est, "--noisy", "sim.noise", "factor mode: pre-average noisy input (true/false)");
    f.add(est, "--step", "sim.step", "asynchronous input: nominal sampling step in years");
    add_common(est, f);

    auto* eval = app.add_subcommand("evaluate", "compare an estimate series with a truth series");
    f.add(eval, "--input,-i", "run.input", "estimate matrix series");
    f.add(eval, "--truth", "run.truth_input", "truth matrix series");
    f.add(eval, "--relative", "eval.relative", "also report the relative loss (true/false)");

    auto* table = app.add_subcommand("table-repro", "run a Monte Carlo table");
    f.add(table, "--target", "run.table", "e.g. table1_banding");
    f.add(table, "--replications,-R", "run.replications", "Monte Carlo replications");
    f.add(table, "--noise-ratio", "table.noise_ratio", "noise-to-signal ratio");
    f.add(table, "--grid-step", "table.grid_step", "PD search grid step");
    f.add(table, "--stride", "table.stride", "integrated tables: spot sampling stride");

    auto* prec = app.add_subcommand("precision", "CLIME precision series from a covariance series");
    f.add(prec, "--input,-i", "run.input", "covariance matrix series");
    f.add(prec, "--clime-rho", "clime.rho", "constraint level");
    f.add(prec, "--clime-tol", "clime.tol", "solver tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        spotvol::ExperimentConfig cfg;
        if (!config_path.empty()) cfg = spotvol::load_config_file(config_path);

        std::map<std::string, std::string> kv = f.collected();
        if (sim->parsed()) kv["run.mode"] = "simulate";
        if (est->parsed()) kv["run.mode"] = "estimate_" + estimate_mode;
        if (eval->parsed()) kv["run.mode"] = "evaluate";
        if (table->parsed()) kv["run.mode"] = "table_repro";
        if (prec->parsed()) kv["run.mode"] = "estimate_precision";
        for (const auto& o : overrides) {
            const auto eq = o.find('=');
            if (eq == std::string::npos) throw spotvol::ConfigError(o, "--set expects key=value");
            auto trim = [](std::string s) {
                s.erase(0, s.find_first_not_of(" \t"));
                s.erase(s.find_last_not_of(" \t") + 1);
                return s;
            };
            kv[trim(o.substr(0, eq))] = trim(o.substr(eq + 1));
        }
        spotvol::apply_config(cfg, kv);
        return spotvol::run_experiment(cfg, std::cerr);
    } catch (const spotvol::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
