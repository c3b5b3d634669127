#include "spotvol/tables.hpp"

#include "spotvol/factor.hpp"
#include "spotvol/io.hpp"
#include "spotvol/noisecov.hpp"
#include "spotvol/panel.hpp"
#include "spotvol/preavg.hpp"
#include "spotvol/rng.hpp"
#include "spotvol/shrinkage.hpp"
#include "spotvol/spotcov.hpp"

#include <atomic>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace spotvol {

namespace {

const std::vector<ShrinkRule>& table_rules()
{
    static const std::vector<ShrinkRule> rules{ShrinkRule::hard(), ShrinkRule::soft(), ShrinkRule::adaptive_lasso(),
                                               ShrinkRule::scad()};
    return rules;
}

std::vector<std::string> rule_names()
{
    std::vector<std::string> names{"Naive"};
    for (const auto& r : table_rules()) names.push_back(display_name(r.kind));
    return names;
}

ShrinkageSpec pd_spec(const ShrinkRule& rule, double grid_step)
{
    ShrinkageSpec s;
    s.rule = rule;
    s.tuning = TuningKind::pd_grid;
    s.grid_step = grid_step;
    return s;
}

KernelSpec epanechnikov(double bandwidth)
{
    return KernelSpec{KernelFamily::epanechnikov, bandwidth};
}

// Losses of the raw series and of its four shrunk versions, appended in rule order.
class LossBlock {
public:
    LossBlock(const MatrixSeries& truth, double scale, bool relative, double grid_step)
        : truth_(truth), scale_(scale), grid_step_(grid_step)
    {
        if (relative) {
            for (const auto& m : truth.matrices) rel_.emplace_back(m);
        }
    }

    ReplicationLoss loss(const std::vector<Matrix>& est) const
    {
        if (est.size() != truth_.size()) throw InvalidArgument("table: estimate and truth lengths differ");
        ReplicationLoss out;
        for (std::size_t j = 0; j < est.size(); ++j) {
            const Matrix diff = (est[j] - truth_.matrices[j]) / scale_;
            out.frobenius.push_back(diff.norm());
            out.spectral.push_back(spectral_norm(diff));
            if (!rel_.empty()) out.relative.push_back(rel_[j](est[j]));
        }
        return out;
    }

    // Naive, then each rule with the PD-driven tuning; `assemble` maps a
    // (possibly shrunk) matrix at time index j to the matrix being scored.
    void all_rules(const MatrixSeries& raw, std::vector<ReplicationLoss>& out,
                   const std::function<Matrix(const Matrix&, std::size_t)>& assemble = {}) const
    {
        const auto finish = [&](const Matrix& m, std::size_t j) { return assemble ? assemble(m, j) : m; };
        std::vector<Matrix> est;
        for (std::size_t j = 0; j < raw.size(); ++j) est.push_back(finish(raw.matrices[j], j));
        out.push_back(loss(est));
        for (const auto& rule : table_rules()) {
            const ShrinkageSpec spec = pd_spec(rule, grid_step_);
            est.clear();
            for (std::size_t j = 0; j < raw.size(); ++j) {
                est.push_back(finish(shrink_matrix(raw.matrices[j], spec, raw.times[j]), j));
            }
            out.push_back(loss(est));
        }
    }

private:
    const MatrixSeries& truth_;
    double scale_;
    double grid_step_;
    std::vector<RelativeNorm> rel_;
};

SimConfig base_config(const TableSpec& spec, std::uint64_t seed, std::uint64_t structure_seed)
{
    SimConfig cfg;
    cfg.p = spec.p;
    cfg.structure = spec.structure;
    cfg.noise = spec.kind != TableKind::integrated;
    cfg.noise_ratio = spec.noise_ratio;
    cfg.async = spec.kind == TableKind::async;
    cfg.seed = seed;
    cfg.structure_seed = structure_seed;
    return cfg;
}

std::vector<ReplicationLoss> replicate_spot(const TableSpec& spec, const SimConfig& cfg)
{
    SimRequest req;
    req.eval_times = equidistant_times(spec.eval_count, cfg.horizon);
    const SimOutput sim = simulate_sparse(cfg, req);
    const double c = make_structure(cfg).noise_scale.front();
    std::vector<ReplicationLoss> out;

    const MatrixSeries hat =
        spot_cov_series(diff_returns(sim.clean), req.eval_times, epanechnikov(spec.h_star * cfg.step));
    LossBlock(sim.truth_sigma, 1.0, false, spec.grid_step).all_rules(hat, out);

    const PreAvgConfig pre = PreAvgConfig::from_ratios(cfg.step, cfg.horizon, spec.b_star, spec.h_star, spec.pseudo_count);
    const MatrixSeries tilde = spot_cov_noisy_series(*sim.noisy, pre, req.eval_times);
    LossBlock(sim.truth_sigma, 1.0, false, spec.grid_step).all_rules(tilde, out);

    const MatrixSeries omega =
        noise_cov_series(diff_returns(*sim.noisy), req.eval_times, epanechnikov(spec.h1_star * cfg.step));
    LossBlock(*sim.truth_omega, c, false, spec.grid_step).all_rules(omega, out);
    return out;
}

std::vector<ReplicationLoss> replicate_async(const TableSpec& spec, const SimConfig& cfg)
{
    SimRequest req;
    req.eval_times = equidistant_times(spec.eval_count, cfg.horizon);
    const SimOutput sim = simulate_sparse(cfg, req);
    const double c = make_structure(cfg).noise_scale.front();
    std::vector<ReplicationLoss> out;

    const PreAvgConfig pre = PreAvgConfig::from_ratios(cfg.step, cfg.horizon, spec.b_star, spec.h_star, spec.pseudo_count);
    const AssetPanel filtered = preaverage_async(*sim.noisy, pre);
    MatrixSeries tilde;
    for (double t : req.eval_times) tilde.push_back(t, spot_cov_noisy(filtered, t, pre.smooth));
    LossBlock(sim.truth_sigma, 1.0, false, spec.grid_step).all_rules(tilde, out);

    const MatrixSeries omega =
        noise_cov_async_series(*sim.noisy, req.eval_times, epanechnikov(spec.h1_star * cfg.step), nullptr,
                               spec.async_increments);
    LossBlock(*sim.truth_omega, c, false, spec.grid_step).all_rules(omega, out);
    return out;
}

std::vector<ReplicationLoss> replicate_factor(const TableSpec& spec, SimConfig cfg)
{
    SimRequest req;
    req.eval_times = equidistant_times(spec.eval_count, cfg.horizon);
    std::vector<ReplicationLoss> out;
    for (BetaDynamics d : spec.dynamics) {
        FactorSpec fs;
        fs.dynamics = d;
        cfg.factor = fs;
        const SimOutput sim = simulate_factor(cfg, req);

        FactorPipelineConfig pc;
        pc.kernel = epanechnikov(spec.h_star * cfg.step);
        pc.shrinkage.rule = ShrinkRule::soft();
        pc.shrinkage.tuning = TuningKind::fixed;
        pc.shrinkage.rho = 0.0;

        const auto score = [&](const FactorEstimate& est) {
            const auto total = [&](const Matrix& sx, std::size_t j) {
                return factor_total_cov(est.betas[j], est.factor_cov.matrices[j], sx);
            };
            LossBlock(sim.truth_sigma, 1.0, false, spec.grid_step).all_rules(est.idio_cov, out);
            LossBlock(*sim.truth_total, 1.0, spec.relative_loss, spec.grid_step).all_rules(est.idio_cov, out, total);
        };

        score(factor_pipeline(sim.clean, *sim.factors, req.eval_times, pc));
        pc.preavg = PreAvgConfig::from_ratios(cfg.step, cfg.horizon, spec.b_star, spec.h_star, spec.pseudo_count);
        score(factor_pipeline(*sim.noisy, *sim.noisy_factors, req.eval_times, pc));
    }
    return out;
}

std::vector<ReplicationLoss> replicate_integrated(const TableSpec& spec, const SimConfig& cfg)
{
    SimRequest req;
    req.intervals = equal_intervals(spec.intervals, cfg.horizon);
    const SimOutput sim = simulate_sparse(cfg, req);
    const ReturnPanel rx = diff_returns(sim.clean);
    const std::size_t nr = table_rules().size() + 1;

    // realized_shrunk, then spot_averaged; both Naive + rules.
    std::vector<std::vector<Matrix>> realized(nr), averaged(nr);
    const KernelSpec kernel = epanechnikov(spec.h_star * cfg.step);
    for (const auto& iv : req.intervals) {
        IntegratedOptions ro;
        ro.mode = IntegratedMode::realized_shrunk;
        realized[0].push_back(integrated_cov(rx, iv, ro));
        for (std::size_t r = 0; r < table_rules().size(); ++r) {
            realized[r + 1].push_back(shrink_matrix(realized[0].back(), pd_spec(table_rules()[r], spec.grid_step),
                                                    0.5 * (iv.first + iv.second)));
        }

        // Same sample times as integrated_cov in spot_averaged mode.
        std::vector<Matrix> sums(nr, Matrix::Zero(static_cast<Eigen::Index>(cfg.p), static_cast<Eigen::Index>(cfg.p)));
        std::size_t count = 0;
        const auto steps = static_cast<std::size_t>(std::llround((iv.second - iv.first) / cfg.step));
        for (std::size_t k = 0; k < steps; k += spec.stride) {
            const double t = iv.first + static_cast<double>(k) * cfg.step;
            const Matrix s = spot_cov(rx, t, kernel);
            sums[0] += s;
            for (std::size_t r = 0; r < table_rules().size(); ++r) {
                sums[r + 1] += shrink_matrix(s, pd_spec(table_rules()[r], spec.grid_step), t);
            }
            ++count;
        }
        for (std::size_t r = 0; r < nr; ++r) averaged[r].push_back(sums[r] / static_cast<double>(count));
    }

    LossBlock block(sim.truth_integrated, 1.0, false, spec.grid_step);
    std::vector<ReplicationLoss> out;
    for (const auto& m : realized) out.push_back(block.loss(m));
    for (const auto& m : averaged) out.push_back(block.loss(m));
    return out;
}

std::vector<TableCell> cell_layout(const TableSpec& spec)
{
    std::vector<std::pair<std::string, std::string>> blocks;  // (group, estimator)
    switch (spec.kind) {
        case TableKind::spot:
            blocks = {{"", "sigma_hat"}, {"", "sigma_tilde"}, {"", "omega_hat"}};
            break;
        case TableKind::async:
            blocks = {{"", "sigma_tilde_async"}, {"", "omega_hat_async"}};
            break;
        case TableKind::integrated:
            blocks = {{"", "realized_shrunk"}, {"", "spot_averaged"}};
            break;
        case TableKind::factor:
            for (BetaDynamics d : spec.dynamics) {
                const std::string g = to_string(d);
                blocks.insert(blocks.end(),
                              {{g, "idio_hat"}, {g, "total_hat"}, {g, "idio_tilde"}, {g, "total_tilde"}});
            }
            break;
    }
    std::vector<TableCell> cells;
    for (const auto& [group, estimator] : blocks) {
        for (const auto& rule : rule_names()) cells.push_back(TableCell{group, estimator, rule, {}});
    }
    return cells;
}

std::vector<ReplicationLoss> replicate(const TableSpec& spec, const SimConfig& cfg)
{
    switch (spec.kind) {
        case TableKind::spot: return replicate_spot(spec, cfg);
        case TableKind::async: return replicate_async(spec, cfg);
        case TableKind::factor: return replicate_factor(spec, cfg);
        case TableKind::integrated: return replicate_integrated(spec, cfg);
    }
    return {};
}

}  // namespace

TableSpec table_spec(const std::string& target)
{
    const auto us = target.find('_');
    if (us == std::string::npos) throw InvalidArgument("unknown table target '" + target + "'");
    const std::string table = target.substr(0, us);
    TableSpec s;
    s.target = target;
    s.structure = parse_structure(target.substr(us + 1));
    if (table == "table1") {
        s.p = 200;
    } else if (table == "table2") {
        s.p = 500;
        s.h_star = s.h1_star = 240.0;
    } else if (table == "table3" || table == "table4") {
        s.kind = TableKind::factor;
        s.p = 500;
        s.h_star = s.h1_star = 240.0;
        s.dynamics = {BetaDynamics::constant, BetaDynamics::deterministic, BetaDynamics::stochastic};
        s.relative_loss = true;
    } else if (table == "tableD1") {
        s.kind = TableKind::async;
        s.p = 200;
        s.h1_star = 250.0;
    } else if (table == "tableD2") {
        s.kind = TableKind::async;
        s.p = 500;
        s.h_star = 240.0;
        s.b_star = 6.0;
        s.h1_star = 260.0;
    } else if (table == "tableD3") {
        s.kind = TableKind::integrated;
        s.p = 500;
        s.h_star = 240.0;
        s.stride = 13;
    } else {
        throw InvalidArgument("unknown table target '" + target + "'");
    }
    // Pseudo-grid spacing of half a filter width.
    const std::size_t n = SimConfig{}.observation_count();
    s.pseudo_count = static_cast<std::size_t>(std::llround(2.0 * static_cast<double>(n) / s.b_star));
    return s;
}

std::vector<std::string> table_targets()
{
    std::vector<std::string> out;
    for (const char* t : {"table1", "table2", "table3", "table4", "tableD1", "tableD2", "tableD3"}) {
        for (const char* s : {"banding", "block_diagonal", "exp_decay"}) out.push_back(std::string(t) + "_" + s);
    }
    return out;
}

const TableCell& TableResult::cell(const std::string& estimator, const std::string& rule, const std::string& group) const
{
    for (const auto& c : cells) {
        if (c.estimator == estimator && c.rule == rule && c.group == group) return c;
    }
    throw InvalidArgument("table: no cell " + group + "/" + estimator + "/" + rule);
}

TableResult run_table(const TableSpec& spec, const TableRunOptions& opt)
{
    if (opt.replications == 0) throw InvalidArgument("table: replications must be positive");
    if (spec.stride == 0) throw InvalidArgument("table: stride must be positive");
    TableResult result;
    result.spec = spec;
    result.replications = opt.replications;
    result.cells = cell_layout(spec);

    std::vector<std::vector<ReplicationLoss>> losses(opt.replications);
    std::vector<std::string> errors(opt.replications);
    std::atomic<std::size_t> next{0}, done{0};
    std::mutex progress_mutex;

    const auto worker = [&]() {
        for (std::size_t r = next++; r < opt.replications; r = next++) {
            try {
                const SimConfig cfg = base_config(spec, derive_seed(opt.seed, r), opt.seed);
                losses[r] = replicate(spec, cfg);
                if (losses[r].size() != result.cells.size()) throw Error("table: cell count mismatch");
            } catch (const std::exception& e) {
                losses[r].clear();
                errors[r] = e.what();
            }
            const std::size_t d = ++done;
            if (opt.progress) {
                std::lock_guard<std::mutex> lock(progress_mutex);
                opt.progress(d, opt.replications);
            }
        }
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(opt.threads, opt.replications));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (std::size_t r = 0; r < opt.replications; ++r) {
        if (losses[r].empty()) {
            result.failed.push_back(r);
            result.failures.push_back("replication " + std::to_string(r) + ": " + errors[r]);
            continue;
        }
        for (std::size_t c = 0; c < result.cells.size(); ++c) {
            LossReport& rep = result.cells[c].loss;
            rep.frobenius.push_back(std::move(losses[r][c].frobenius));
            rep.spectral.push_back(std::move(losses[r][c].spectral));
            if (!losses[r][c].relative.empty()) rep.relative.push_back(std::move(losses[r][c].relative));
        }
    }
    for (auto& c : result.cells) {
        c.loss.failed_replications = result.failed.size();
        c.loss.finalise();
    }
    return result;
}

void write_table_csv(std::ostream& out, const TableResult& result)
{
    out << "target,group,estimator,rule,mfl,msl,mrl,replications,failed\n";
    for (const auto& c : result.cells) {
        out << result.spec.target << ',' << c.group << ',' << c.estimator << ',' << c.rule << ','
            << format_double(c.loss.mfl) << ',' << format_double(c.loss.msl) << ','
            << (c.loss.mrl ? format_double(*c.loss.mrl) : std::string()) << ',' << result.replications << ','
            << result.failed.size() << '\n';
    }
}

void write_table_summary(std::ostream& out, const TableResult& result)
{
    out << result.spec.target << "  p=" << result.spec.p << "  R=" << result.replications;
    if (!result.failed.empty()) out << "  failed=" << result.failed.size() << " (incomplete)";
    out << '\n';
    const auto names = rule_names();
    std::string current;
    for (std::size_t i = 0; i < result.cells.size(); i += names.size()) {
        const auto& head = result.cells[i];
        const std::string label = (head.group.empty() ? "" : head.group + "/") + head.estimator;
        out << std::left << std::setw(28) << label;
        for (const auto& n : names) out << std::right << std::setw(10) << n;
        out << '\n';
        const auto row = [&](const char* name, auto get) {
            out << std::left << std::setw(28) << std::string("  ") + name;
            for (std::size_t k = 0; k < names.size(); ++k) {
                std::ostringstream v;
                v << std::fixed << std::setprecision(4) << get(result.cells[i + k].loss);
                out << std::right << std::setw(10) << v.str();
            }
            out << '\n';
        };
        row("MFL", [](const LossReport& l) { return l.mfl; });
        row("MSL", [](const LossReport& l) { return l.msl; });
        if (head.loss.mrl) row("MRL", [](const LossReport& l) { return l.mrl.value_or(0.0); });
    }
    for (const auto& f : result.failures) out << "  " << f << '\n';
}

}  // namespace spotvol
