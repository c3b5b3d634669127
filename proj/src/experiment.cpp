#include "spotvol/experiment.hpp"

#include "spotvol/factor.hpp"
#include "spotvol/io.hpp"
#include "spotvol/metrics.hpp"
#include "spotvol/preavg.hpp"
#include "spotvol/precision.hpp"
#include "spotvol/spotcov.hpp"
#include "spotvol/tables.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

namespace spotvol {

namespace {

constexpr const char* kVersion = "spotvol 1.0.0";

const std::vector<std::pair<ExperimentMode, std::string>>& mode_names()
{
    static const std::vector<std::pair<ExperimentMode, std::string>> names{
        {ExperimentMode::simulate, "simulate"},
        {ExperimentMode::estimate_spot, "estimate_spot"},
        {ExperimentMode::estimate_noisy, "estimate_noisy"},
        {ExperimentMode::estimate_noisecov, "estimate_noisecov"},
        {ExperimentMode::estimate_factor, "estimate_factor"},
        {ExperimentMode::estimate_precision, "estimate_precision"},
        {ExperimentMode::evaluate, "evaluate"},
        {ExperimentMode::table_repro, "table_repro"},
    };
    return names;
}

double to_double(const std::string& key, const std::string& v)
{
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key, "expected a number, got '" + v + "'");
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v)
{
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw ConfigError(key, "expected a nonnegative integer, got '" + v + "'");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v)
{
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(to_double(key, item));
    }
    return out;
}

std::string list_string(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
    return out;
}

template <class T>
std::string opt_string(const std::optional<T>& v)
{
    if (!v) return "";
    if constexpr (std::is_floating_point_v<T>) return format_double(*v);
    else return std::to_string(*v);
}

// Wraps parse errors of enum-like values with the key name.
template <class F>
auto parse_named(const std::string& key, const std::string& v, F parse)
{
    try {
        return parse(v);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(key, e.what());
    }
}

std::string time_format_name(TimeFormat f)
{
    switch (f) {
        case TimeFormat::seconds: return "seconds";
        case TimeFormat::iso8601: return "iso8601";
        case TimeFormat::years: return "years";
    }
    return "seconds";
}

struct Field {
    std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

const std::map<std::string, Field>& fields()
{
    using C = ExperimentConfig;
    using S = const std::string&;
    static const std::map<std::string, Field> f{
        {"run.mode", {[](C& c, S k, S v) { c.mode = parse_named(k, v, parse_mode); },
                      [](const C& c) { return to_string(c.mode); }}},
        {"run.input", {[](C& c, S, S v) { c.input = v; }, [](const C& c) { return c.input; }}},
        {"run.factor_input", {[](C& c, S, S v) { c.factor_input = v; }, [](const C& c) { return c.factor_input; }}},
        {"run.truth_input", {[](C& c, S, S v) { c.truth_input = v; }, [](const C& c) { return c.truth_input; }}},
        {"run.output_dir", {[](C& c, S, S v) { c.output_dir = v; }, [](const C& c) { return c.output_dir; }}},
        {"run.seed", {[](C& c, S k, S v) { c.seed = to_u64(k, v); }, [](const C& c) { return std::to_string(c.seed); }}},
        {"run.threads", {[](C& c, S k, S v) { c.threads = to_u64(k, v); },
                         [](const C&) { return std::string("-"); }}},
        {"run.replications", {[](C& c, S k, S v) { c.replications = to_u64(k, v); },
                              [](const C& c) { return std::to_string(c.replications); }}},
        {"run.table", {[](C& c, S, S v) { c.table = v; }, [](const C& c) { return c.table; }}},

        {"sim.p", {[](C& c, S k, S v) { c.sim.p = to_u64(k, v); }, [](const C& c) { return std::to_string(c.sim.p); }}},
        {"sim.horizon", {[](C& c, S k, S v) { c.sim.horizon = to_double(k, v); },
                         [](const C& c) { return format_double(c.sim.horizon); }}},
        {"sim.step", {[](C& c, S k, S v) { c.sim.step = to_double(k, v); },
                      [](const C& c) { return format_double(c.sim.step); }}},
        {"sim.n", {[](C& c, S k, S v) {
                       const auto n = to_u64(k, v);
                       if (n == 0) throw ConfigError(k, "must be positive");
                       c.sim.step = c.sim.horizon / static_cast<double>(n);
                   },
                   [](const C& c) { return std::to_string(c.sim.observation_count()); }}},
        {"sim.substeps", {[](C& c, S k, S v) { c.sim.substeps = to_u64(k, v); },
                          [](const C& c) { return std::to_string(c.sim.substeps); }}},
        {"sim.structure", {[](C& c, S k, S v) { c.sim.structure = parse_named(k, v, parse_structure); },
                           [](const C& c) { return to_string(c.sim.structure); }}},
        {"sim.noise", {[](C& c, S k, S v) { c.sim.noise = to_bool(k, v); },
                       [](const C& c) { return std::string(c.sim.noise ? "true" : "false"); }}},
        {"sim.noise_ratio", {[](C& c, S k, S v) { c.sim.noise_ratio = to_double(k, v); },
                             [](const C& c) { return format_double(c.sim.noise_ratio); }}},
        {"sim.async", {[](C& c, S k, S v) { c.sim.async = to_bool(k, v); },
                       [](const C& c) { return std::string(c.sim.async ? "true" : "false"); }}},
        {"sim.factor", {[](C& c, S k, S v) { c.factor_model = to_bool(k, v); },
                        [](const C& c) { return std::string(c.factor_model ? "true" : "false"); }}},
        {"sim.beta_dynamics", {[](C& c, S k, S v) { c.beta_dynamics = parse_named(k, v, parse_beta_dynamics); },
                               [](const C& c) { return to_string(c.beta_dynamics); }}},
        {"sim.beta_scale", {[](C& c, S k, S v) { c.beta_scale = to_double(k, v); },
                            [](const C& c) { return format_double(c.beta_scale); }}},
        {"sim.structure_seed", {[](C& c, S k, S v) { c.sim.structure_seed = to_u64(k, v); },
                                [](const C& c) { return std::to_string(c.sim.structure_seed); }}},

        {"eval.count", {[](C& c, S k, S v) { c.eval_count = to_u64(k, v); },
                        [](const C& c) { return std::to_string(c.eval_count); }}},
        {"eval.times", {[](C& c, S k, S v) { c.eval_times = to_list(k, v); },
                        [](const C& c) { return list_string(c.eval_times); }}},
        {"eval.intervals", {[](C& c, S k, S v) { c.intervals = to_u64(k, v); },
                            [](const C& c) { return std::to_string(c.intervals); }}},
        {"eval.relative", {[](C& c, S k, S v) { c.with_relative = to_bool(k, v); },
                           [](const C& c) { return std::string(c.with_relative ? "true" : "false"); }}},

        {"kernel.family", {[](C& c, S k, S v) { c.kernel_family = parse_named(k, v, parse_kernel_family); },
                           [](const C& c) { return to_string(c.kernel_family); }}},
        {"kernel.h_star", {[](C& c, S k, S v) { c.h_star = to_double(k, v); },
                           [](const C& c) { return format_double(c.h_star); }}},
        {"kernel.bandwidth", {[](C& c, S k, S v) { c.bandwidth = to_double(k, v); },
                              [](const C& c) { return opt_string(c.bandwidth); }}},
        {"kernel.cv_candidates", {[](C& c, S k, S v) { c.cv_candidates = to_list(k, v); },
                                  [](const C& c) { return list_string(c.cv_candidates); }}},

        {"shrink.rule", {[](C& c, S k, S v) {
                             if (v == "none") c.rule.reset();
                             else {
                                 const double eta = c.rule ? c.rule->eta : 3.0;
                                 const double a = c.rule ? c.rule->a : 3.7;
                                 c.rule = parse_named(k, v, parse_shrink_rule);
                                 c.rule->eta = eta;
                                 c.rule->a = a;
                             }
                         },
                         [](const C& c) { return c.rule ? to_string(c.rule->kind) : std::string("none"); }}},
        {"shrink.eta", {[](C& c, S k, S v) {
                            if (!c.rule) c.rule = ShrinkRule::adaptive_lasso();
                            c.rule->eta = to_double(k, v);
                        },
                        [](const C& c) { return c.rule ? format_double(c.rule->eta) : std::string(); }}},
        {"shrink.a", {[](C& c, S k, S v) {
                          if (!c.rule) c.rule = ShrinkRule::scad();
                          c.rule->a = to_double(k, v);
                      },
                      [](const C& c) { return c.rule ? format_double(c.rule->a) : std::string(); }}},
        {"shrink.tuning", {[](C& c, S k, S v) {
                               if (v == "pd_grid") c.tuning = TuningKind::pd_grid;
                               else if (v == "fixed") c.tuning = TuningKind::fixed;
                               else if (v == "entry_adaptive") c.tuning = TuningKind::entry_adaptive;
                               else throw ConfigError(k, "expected pd_grid, fixed or entry_adaptive");
                           },
                           [](const C& c) {
                               return std::string(c.tuning == TuningKind::pd_grid ? "pd_grid"
                                                  : c.tuning == TuningKind::fixed ? "fixed"
                                                                                  : "entry_adaptive");
                           }}},
        {"shrink.rho", {[](C& c, S k, S v) { c.rho = to_double(k, v); },
                        [](const C& c) { return format_double(c.rho); }}},
        {"shrink.grid_step", {[](C& c, S k, S v) { c.grid_step = to_double(k, v); },
                              [](const C& c) { return format_double(c.grid_step); }}},
        {"shrink.eigen_floor", {[](C& c, S k, S v) { c.eigen_floor = to_double(k, v); },
                                [](const C& c) { return format_double(c.eigen_floor); }}},

        {"preavg.b_star", {[](C& c, S k, S v) { c.b_star = to_double(k, v); },
                           [](const C& c) { return format_double(c.b_star); }}},
        {"preavg.pseudo_count", {[](C& c, S k, S v) { c.pseudo_count = to_u64(k, v); },
                                 [](const C& c) { return opt_string(c.pseudo_count); }}},
        {"preavg.normalization", {[](C& c, S k, S v) {
                                      if (v == "riemann_sum") c.normalization = FilterNormalization::riemann_sum;
                                      else if (v == "closed_form_integral")
                                          c.normalization = FilterNormalization::closed_form_integral;
                                      else throw ConfigError(k, "expected riemann_sum or closed_form_integral");
                                  },
                                  [](const C& c) {
                                      return std::string(c.normalization == FilterNormalization::riemann_sum
                                                             ? "riemann_sum"
                                                             : "closed_form_integral");
                                  }}},

        {"noise.h1_star", {[](C& c, S k, S v) { c.h1_star = to_double(k, v); },
                           [](const C& c) { return format_double(c.h1_star); }}},
        {"noise.async_increments", {[](C& c, S k, S v) {
                                        if (v == "intersected") c.async_increments = PairIncrements::intersected;
                                        else if (v == "own_grid") c.async_increments = PairIncrements::own_grid;
                                        else throw ConfigError(k, "expected intersected or own_grid");
                                    },
                                    [](const C& c) {
                                        return std::string(c.async_increments == PairIncrements::intersected
                                                               ? "intersected"
                                                               : "own_grid");
                                    }}},

        {"clime.rho", {[](C& c, S k, S v) { c.clime_rho = to_double(k, v); },
                       [](const C& c) { return opt_string(c.clime_rho); }}},
        {"clime.tol", {[](C& c, S k, S v) { c.clime_tol = to_double(k, v); },
                       [](const C& c) { return format_double(c.clime_tol); }}},

        {"load.time_format", {[](C& c, S k, S v) {
                                  if (v == "seconds") c.load.time_format = TimeFormat::seconds;
                                  else if (v == "iso8601") c.load.time_format = TimeFormat::iso8601;
                                  else if (v == "years") c.load.time_format = TimeFormat::years;
                                  else throw ConfigError(k, "expected seconds, iso8601 or years");
                              },
                              [](const C& c) { return time_format_name(c.load.time_format); }}},
        {"load.take_log", {[](C& c, S k, S v) { c.load.take_log = to_bool(k, v); },
                           [](const C& c) { return std::string(c.load.take_log ? "true" : "false"); }}},
        {"load.horizon", {[](C& c, S k, S v) { c.load.horizon = to_double(k, v); },
                          [](const C& c) { return opt_string(c.load.horizon); }}},
        {"load.sync_points", {[](C& c, S k, S v) { c.sync_points = to_u64(k, v); },
                              [](const C& c) { return std::to_string(c.sync_points); }}},

        {"table.noise_ratio", {[](C& c, S k, S v) { c.table_noise_ratio = to_double(k, v); },
                               [](const C& c) { return opt_string(c.table_noise_ratio); }}},
        {"table.grid_step", {[](C& c, S k, S v) { c.table_grid_step = to_double(k, v); },
                             [](const C& c) { return opt_string(c.table_grid_step); }}},
        {"table.stride", {[](C& c, S k, S v) { c.table_stride = to_u64(k, v); },
                          [](const C& c) { return opt_string(c.table_stride); }}},
    };
    return f;
}

// Output files and their content hashes, collected for the manifest.
class OutputDir {
public:
    explicit OutputDir(const std::string& dir) : dir_(dir)
    {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw InvalidArgument("cannot create output directory '" + dir + "': " + ec.message());
        const auto probe = dir_ / ".write_probe";
        std::ofstream out(probe);
        if (!out) throw InvalidArgument("output directory '" + dir + "' is not writable");
        out.close();
        std::filesystem::remove(probe, ec);
    }

    void write(const std::string& name, const std::string& content)
    {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) throw Error("cannot write '" + (dir_ / name).string() + "'");
        out << content;
        files_.emplace_back(name, hex64(fnv1a64(content)));
    }

    template <class F>
    void write_with(const std::string& name, F fill)
    {
        std::ostringstream ss;
        fill(ss);
        write(name, ss.str());
    }

    void manifest(const ExperimentConfig& cfg, double seconds, int status)
    {
        const std::string canon = canonical_config(cfg);
        std::ostringstream ss;
        ss << "version," << kVersion << '\n'
           << "mode," << to_string(cfg.mode) << '\n'
           << "config_hash," << hex64(fnv1a64(canon)) << '\n'
           << "seed," << cfg.seed << '\n'
           << "status," << status << '\n'
           << "wall_time_seconds," << seconds << '\n';
        for (const auto& [name, hash] : files_) ss << "file," << name << ',' << hash << '\n';
        std::ofstream out(dir_ / "manifest.txt", std::ios::binary);
        out << ss.str();
    }

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::string, std::string>> files_;
};

std::vector<double> eval_times_for(const ExperimentConfig& cfg, double horizon)
{
    if (!cfg.eval_times.empty()) return cfg.eval_times;
    return equidistant_times(cfg.eval_count, horizon);
}

AssetPanel load_input_panel(const std::string& path, const ExperimentConfig& cfg)
{
    return load_panel_file(path, cfg.load);
}

// Synchronous panel for estimators that need a common grid.
AssetPanel synchronous_view(const AssetPanel& panel, const ExperimentConfig& cfg)
{
    if (panel.is_synchronous()) return panel;
    if (cfg.sync_points == 0) {
        throw ConfigError("load.sync_points", "asynchronous input needs a previous-tick grid size for this mode");
    }
    return previous_tick_sync(panel, TimeGrid::uniform(cfg.sync_points, panel.horizon()));
}

double nominal_step(const AssetPanel& panel)
{
    if (panel.is_synchronous()) return panel.grid().step();
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < panel.asset_count(); ++i) {
        const auto n = panel.times(i).size();
        if (n > 1) {
            total += panel.times(i).back() - panel.times(i).front();
            count += n - 1;
        }
    }
    if (count == 0) throw InvalidArgument("input panel has fewer than two observations per asset");
    return total / static_cast<double>(count);
}

void write_series(OutputDir& out, const std::string& name, const MatrixSeries& s)
{
    out.write_with(name, [&](std::ostream& os) { write_matrix_series(os, s); });
}

void write_panel_file(OutputDir& out, const std::string& name, const AssetPanel& panel)
{
    out.write_with(name, [&](std::ostream& os) { write_panel(os, panel); });
}

MatrixSeries shrink_series(const MatrixSeries& raw, const ExperimentConfig& cfg, std::ostream* diag)
{
    const auto spec = cfg.shrinkage();
    if (!spec) return raw;
    MatrixSeries out;
    out.labels = raw.labels;
    if (diag) *diag << "t,rho,positive_definite\n";
    for (std::size_t j = 0; j < raw.size(); ++j) {
        ShrinkOutcome oc;
        out.push_back(raw.times[j], shrink_matrix(raw.matrices[j], *spec, raw.times[j], &oc));
        if (diag) *diag << format_double(raw.times[j]) << ',' << format_double(oc.rho) << ',' << oc.positive_definite << '\n';
    }
    return out;
}

int run_simulate(const ExperimentConfig& cfg, OutputDir& out, std::ostream& log)
{
    SimConfig sc = cfg.sim;
    sc.seed = cfg.seed;
    if (cfg.factor_model) {
        FactorSpec fs;
        fs.dynamics = cfg.beta_dynamics;
        fs.beta_scale = cfg.beta_scale;
        sc.factor = fs;
    }
    SimRequest req;
    req.eval_times = eval_times_for(cfg, sc.horizon);
    if (cfg.intervals > 0) req.intervals = equal_intervals(cfg.intervals, sc.horizon);
    const SimOutput sim = simulate(sc, req);

    write_panel_file(out, "panel_clean.csv", sim.clean);
    if (sim.noisy) write_panel_file(out, "panel_noisy.csv", *sim.noisy);
    if (sim.factors) write_panel_file(out, "panel_factors.csv", *sim.factors);
    if (sim.noisy_factors) write_panel_file(out, "panel_noisy_factors.csv", *sim.noisy_factors);
    write_series(out, "truth_sigma.txt", sim.truth_sigma);
    if (sim.truth_omega) write_series(out, "truth_omega.txt", *sim.truth_omega);
    if (sim.truth_total) write_series(out, "truth_total.txt", *sim.truth_total);
    if (sim.truth_factor) write_series(out, "truth_factor.txt", *sim.truth_factor);
    if (!sim.truth_integrated.empty()) write_series(out, "truth_integrated.txt", sim.truth_integrated);
    if (!sim.truth_beta.empty()) {
        out.write_with("truth_beta.csv", [&](std::ostream& os) {
            os << "t,asset,factor,beta\n";
            for (std::size_t j = 0; j < sim.truth_beta.size(); ++j) {
                const Matrix& b = sim.truth_beta[j];
                for (Eigen::Index i = 0; i < b.rows(); ++i) {
                    for (Eigen::Index k = 0; k < b.cols(); ++k) {
                        os << format_double(req.eval_times[j]) << ',' << i << ',' << k << ',' << format_double(b(i, k))
                           << '\n';
                    }
                }
            }
        });
    }
    log << "simulated p=" << sc.p << " n=" << sc.observation_count() << " seed=" << sc.seed << '\n';
    return 0;
}

int run_estimate_spot(const ExperimentConfig& cfg, OutputDir& out, std::ostream& log)
{
    const AssetPanel panel = synchronous_view(load_input_panel(cfg.input, cfg), cfg);
    const ReturnPanel r = diff_returns(panel);
    double h = cfg.bandwidth.value_or(cfg.h_star * r.grid.step());
    if (!cfg.cv_candidates.empty()) {
        std::vector<double> cands;
        for (double c : cfg.cv_candidates) cands.push_back(c * r.grid.step());
        std::vector<CvScore> scores;
        h = cv_bandwidth(r, cands, cfg.kernel_family, &scores);
        out.write_with("cv_scores.csv", [&](std::ostream& os) {
            os << "bandwidth,score,skipped\n";
            for (const auto& s : scores) os << format_double(s.bandwidth) << ',' << format_double(s.score) << ',' << s.skipped << '\n';
        });
        log << "cross-validated bandwidth " << format_double(h) << '\n';
    }
    const MatrixSeries raw = spot_cov_series(r, eval_times_for(cfg, panel.horizon()), KernelSpec{cfg.kernel_family, h});
    std::ostringstream diag;
    const MatrixSeries est = shrink_series(raw, cfg, &diag);
    write_series(out, "sigma_hat.txt", est);
    if (cfg.rule) out.write("shrinkage.csv", diag.str());
    return 0;
}

PreAvgConfig preavg_config(const ExperimentConfig& cfg, double step, double horizon)
{
    PreAvgConfig pc = PreAvgConfig::from_ratios(step, horizon, cfg.b_star, cfg.h_star, cfg.pseudo_count);
    pc.filter.family = cfg.kernel_family;
    pc.smooth.family = cfg.kernel_family;
    if (cfg.bandwidth) pc.smooth.bandwidth = *cfg.bandwidth;
    pc.normalization = cfg.normalization;
    return pc;
}

int run_estimate_noisy(const ExperimentConfig& cfg, OutputDir& out, std::ostream&)
{
    const AssetPanel panel = load_input_panel(cfg.input, cfg);
    const double step = nominal_step(panel);
    const PreAvgConfig pc = preavg_config(cfg, panel.is_synchronous() ? step : cfg.sim.step, panel.horizon());
    const auto times = eval_times_for(cfg, panel.horizon());
    MatrixSeries raw;
    if (panel.is_synchronous()) {
        raw = spot_cov_noisy_series(panel, pc, times);
    } else {
        const AssetPanel filtered = preaverage_async(panel, pc);
        raw.labels = panel.ids();
        for (double t : times) raw.push_back(t, spot_cov_noisy(filtered, t, pc.smooth));
    }
    std::ostringstream diag;
    write_series(out, "sigma_tilde.txt", shrink_series(raw, cfg, &diag));
    if (cfg.rule) out.write("shrinkage.csv", diag.str());
    return 0;
}

int run_estimate_noisecov(const ExperimentConfig& cfg, OutputDir& out, std::ostream& log)
{
    const AssetPanel panel = load_input_panel(cfg.input, cfg);
    const auto times = eval_times_for(cfg, panel.horizon());
    MatrixSeries raw;
    if (panel.is_synchronous()) {
        const ReturnPanel r = diff_returns(panel);
        raw = noise_cov_series(r, times, KernelSpec{cfg.kernel_family, cfg.bandwidth.value_or(cfg.h1_star * r.grid.step())});
    } else {
        // Bandwidth in units of the original sampling step.
        const KernelSpec k{cfg.kernel_family, cfg.bandwidth.value_or(cfg.h1_star * cfg.sim.step)};
        std::vector<BoolMatrix> masks;
        raw = noise_cov_async_series(panel, times, k, &masks, cfg.async_increments);
        std::size_t missing = 0;
        out.write_with("missing_pairs.csv", [&](std::ostream& os) {
            os << "t,i,j\n";
            for (std::size_t m = 0; m < masks.size(); ++m) {
                for (Eigen::Index j = 0; j < masks[m].cols(); ++j) {
                    for (Eigen::Index i = j + 1; i < masks[m].rows(); ++i) {
                        if (!masks[m](i, j)) {
                            os << format_double(times[m]) << ',' << i << ',' << j << '\n';
                            ++missing;
                        }
                    }
                }
            }
        });
        if (missing) log << missing << " asset pairs without common observations were set to zero\n";
    }
    std::ostringstream diag;
    write_series(out, "omega_hat.txt", shrink_series(raw, cfg, &diag));
    if (cfg.rule) out.write("shrinkage.csv", diag.str());
    return 0;
}

int run_estimate_factor(const ExperimentConfig& cfg, OutputDir& out, std::ostream&)
{
    const AssetPanel y = load_input_panel(cfg.input, cfg);
    const AssetPanel f = load_input_panel(cfg.factor_input, cfg);
    FactorPipelineConfig pc;
    const bool noisy = cfg.sim.noise;
    const double step = y.is_synchronous() ? y.grid().step() : cfg.sim.step;
    pc.kernel = KernelSpec{cfg.kernel_family, cfg.bandwidth.value_or(cfg.h_star * step)};
    if (noisy) pc.preavg = preavg_config(cfg, step, y.horizon());
    if (auto s = cfg.shrinkage()) {
        pc.shrinkage = *s;
    } else {
        pc.shrinkage.rule = ShrinkRule::soft();
        pc.shrinkage.tuning = TuningKind::fixed;
        pc.shrinkage.rho = 0.0;
    }
    const FactorEstimate est = factor_pipeline(y, f, eval_times_for(cfg, y.horizon()), pc);
    write_series(out, "idio_raw.txt", est.idio_cov);
    write_series(out, "idio_shrunk.txt", est.idio_shrunk);
    write_series(out, "total.txt", est.total_cov);
    write_series(out, "factor_cov.txt", est.factor_cov);
    out.write_with("betas.csv", [&](std::ostream& os) {
        os << "t,asset,factor,beta\n";
        for (std::size_t j = 0; j < est.betas.size(); ++j) {
            for (Eigen::Index i = 0; i < est.betas[j].rows(); ++i) {
                for (Eigen::Index k = 0; k < est.betas[j].cols(); ++k) {
                    os << format_double(est.times[j]) << ',' << i << ',' << k << ',' << format_double(est.betas[j](i, k))
                       << '\n';
                }
            }
        }
    });
    out.write_with("diagnostics.csv", [&](std::ostream& os) {
        os << "t,rho,factor_condition,orthogonality\n";
        for (std::size_t j = 0; j < est.times.size(); ++j) {
            os << format_double(est.times[j]) << ',' << format_double(est.rhos[j]) << ','
               << format_double(est.condition_numbers[j]) << ','
               << format_double(j < est.orthogonality.size() ? est.orthogonality[j] : 0.0) << '\n';
        }
    });
    return 0;
}

int run_estimate_precision(const ExperimentConfig& cfg, OutputDir& out, std::ostream&)
{
    const MatrixSeries cov = read_matrix_series_file(cfg.input);
    MatrixSeries prec;
    prec.labels = cov.labels;
    std::ostringstream diag;
    diag << "t,rho,max_residual\n";
    ClimeConfig cc;
    cc.rho = cfg.clime_rho;
    cc.solver_tol = cfg.clime_tol;
    for (std::size_t j = 0; j < cov.size(); ++j) {
        const ClimeResult r = clime_precision(cov.matrices[j], cc);
        prec.push_back(cov.times[j], r.precision);
        diag << format_double(cov.times[j]) << ',' << format_double(r.rho) << ',' << format_double(r.max_residual) << '\n';
    }
    write_series(out, "precision.txt", prec);
    out.write("clime.csv", diag.str());
    return 0;
}

int run_evaluate(const ExperimentConfig& cfg, OutputDir& out, std::ostream& log)
{
    const MatrixSeries est = read_matrix_series_file(cfg.input);
    const MatrixSeries truth = read_matrix_series_file(cfg.truth_input);
    LossReport rep = mfl_msl({est}, {truth}, cfg.with_relative);
    out.write_with("loss.csv", [&](std::ostream& os) {
        os << "t,frobenius,spectral" << (cfg.with_relative ? ",relative" : "") << '\n';
        for (std::size_t j = 0; j < est.size(); ++j) {
            os << format_double(est.times[j]) << ',' << format_double(rep.frobenius[0][j]) << ','
               << format_double(rep.spectral[0][j]);
            if (cfg.with_relative) os << ',' << format_double(rep.relative[0][j]);
            os << '\n';
        }
    });
    std::ostringstream summary;
    summary << "mfl," << format_double(rep.mfl) << "\nmsl," << format_double(rep.msl) << '\n';
    if (rep.mrl) summary << "mrl," << format_double(*rep.mrl) << '\n';
    out.write("summary.csv", summary.str());
    log << summary.str();
    return 0;
}

int run_table_repro(const ExperimentConfig& cfg, OutputDir& out, std::ostream& log)
{
    TableSpec spec = table_spec(cfg.table);
    if (cfg.table_noise_ratio) spec.noise_ratio = *cfg.table_noise_ratio;
    if (cfg.table_grid_step) spec.grid_step = *cfg.table_grid_step;
    if (cfg.table_stride) spec.stride = *cfg.table_stride;
    TableRunOptions opt;
    opt.replications = cfg.replications;
    opt.seed = cfg.seed;
    opt.threads = cfg.threads;
    opt.progress = [&](std::size_t done, std::size_t total) {
        log << "replication " << done << '/' << total << '\n' << std::flush;
    };
    const TableResult result = run_table(spec, opt);
    out.write_with("table.csv", [&](std::ostream& os) { write_table_csv(os, result); });
    out.write_with("summary.txt", [&](std::ostream& os) { write_table_summary(os, result); });
    write_table_summary(log, result);
    return result.failed.empty() ? 0 : 4;
}

}  // namespace

ExperimentMode parse_mode(const std::string& name)
{
    for (const auto& [m, n] : mode_names()) {
        if (n == name) return m;
    }
    throw ConfigError("run.mode", "unknown mode '" + name + "'");
}

std::string to_string(ExperimentMode mode)
{
    for (const auto& [m, n] : mode_names()) {
        if (m == mode) return n;
    }
    return "simulate";
}

std::optional<ShrinkageSpec> ExperimentConfig::shrinkage() const
{
    if (!rule) return std::nullopt;
    ShrinkageSpec s;
    s.rule = *rule;
    s.tuning = tuning;
    s.rho = rho;
    s.grid_step = grid_step;
    s.eigen_floor = eigen_floor;
    return s;
}

void ExperimentConfig::validate() const
{
    const auto need = [](bool ok, const char* key, const char* what) {
        if (!ok) throw ConfigError(key, what);
    };
    need(threads >= 1, "run.threads", "must be at least 1");
    need(replications >= 1, "run.replications", "must be at least 1");
    need(!output_dir.empty(), "run.output_dir", "is required");
    need(h_star > 0.0, "kernel.h_star", "must be positive");
    need(!bandwidth || *bandwidth > 0.0, "kernel.bandwidth", "must be positive");
    need(h1_star > 0.0, "noise.h1_star", "must be positive");
    need(b_star > 0.0, "preavg.b_star", "must be positive");
    need(eval_count >= 1 || !eval_times.empty(), "eval.count", "must be at least 1");
    for (double t : eval_times) need(t >= 0.0, "eval.times", "must be nonnegative");
    for (double c : cv_candidates) need(c > 0.0, "kernel.cv_candidates", "must be positive");
    need(!clime_rho || *clime_rho > 0.0, "clime.rho", "must be positive");
    try {
        if (auto s = shrinkage()) s->validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("shrink", e.what());
    }
    switch (mode) {
        case ExperimentMode::simulate:
            try {
                sim.validate();
            } catch (const std::exception& e) {
                throw ConfigError("sim", e.what());
            }
            break;
        case ExperimentMode::estimate_factor:
            need(!factor_input.empty(), "run.factor_input", "is required for estimate_factor");
            [[fallthrough]];
        case ExperimentMode::estimate_spot:
        case ExperimentMode::estimate_noisy:
        case ExperimentMode::estimate_noisecov:
        case ExperimentMode::estimate_precision:
            need(!input.empty(), "run.input", "is required for this mode");
            break;
        case ExperimentMode::evaluate:
            need(!input.empty(), "run.input", "is required for evaluate");
            need(!truth_input.empty(), "run.truth_input", "is required for evaluate");
            break;
        case ExperimentMode::table_repro:
            need(!table.empty(), "run.table", "is required for table_repro");
            try {
                table_spec(table);
            } catch (const std::exception& e) {
                throw ConfigError("run.table", e.what());
            }
            break;
    }
}

void apply_config(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv)
{
    const auto& f = fields();
    // Rule names first so shrink.eta / shrink.a apply to the selected rule.
    std::vector<std::pair<std::string, std::string>> ordered(kv.begin(), kv.end());
    std::stable_partition(ordered.begin(), ordered.end(), [](const auto& e) { return e.first == "shrink.rule"; });
    for (const auto& [key, value] : ordered) {
        const auto it = f.find(key);
        if (it == f.end()) throw ConfigError(key, "unknown configuration key");
        it->second.set(cfg, key, value);
    }
}

ExperimentConfig load_config_file(const std::string& path)
{
    ExperimentConfig cfg;
    try {
        apply_config(cfg, parse_key_values_file(path));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("config", e.what());
    }
    return cfg;
}

std::string canonical_config(const ExperimentConfig& cfg)
{
    std::string out;
    for (const auto& [key, field] : fields()) {
        if (key == "run.threads") continue;  // results do not depend on it
        out += key + " = " + field.get(cfg) + '\n';
    }
    return out;
}

int run_experiment(const ExperimentConfig& cfg, std::ostream& log)
{
    cfg.validate();
    OutputDir out(cfg.output_dir);
    const auto start = std::chrono::steady_clock::now();
    int status = 0;
    try {
        switch (cfg.mode) {
            case ExperimentMode::simulate: status = run_simulate(cfg, out, log); break;
            case ExperimentMode::estimate_spot: status = run_estimate_spot(cfg, out, log); break;
            case ExperimentMode::estimate_noisy: status = run_estimate_noisy(cfg, out, log); break;
            case ExperimentMode::estimate_noisecov: status = run_estimate_noisecov(cfg, out, log); break;
            case ExperimentMode::estimate_factor: status = run_estimate_factor(cfg, out, log); break;
            case ExperimentMode::estimate_precision: status = run_estimate_precision(cfg, out, log); break;
            case ExperimentMode::evaluate: status = run_evaluate(cfg, out, log); break;
            case ExperimentMode::table_repro: status = run_table_repro(cfg, out, log); break;
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        status = 3;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.manifest(cfg, seconds, status);
    return status;
}

}  // namespace spotvol
