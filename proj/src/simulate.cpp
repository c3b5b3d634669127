#include "spotvol/simulate.hpp"

#include "spotvol/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace spotvol {

Structure parse_structure(const std::string& name)
{
    if (name == "banding") return Structure::banding;
    if (name == "block" || name == "block_diagonal") return Structure::block_diagonal;
    if (name == "exp_decay" || name == "exponential") return Structure::exp_decay;
    throw InvalidArgument("unknown structure '" + name + "'");
}

std::string to_string(Structure s)
{
    switch (s) {
        case Structure::banding: return "banding";
        case Structure::block_diagonal: return "block_diagonal";
        case Structure::exp_decay: return "exp_decay";
    }
    return "unknown";
}

BetaDynamics parse_beta_dynamics(const std::string& name)
{
    if (name == "constant") return BetaDynamics::constant;
    if (name == "deterministic") return BetaDynamics::deterministic;
    if (name == "stochastic") return BetaDynamics::stochastic;
    throw InvalidArgument("unknown beta dynamics '" + name + "'");
}

std::string to_string(BetaDynamics d)
{
    switch (d) {
        case BetaDynamics::constant: return "constant";
        case BetaDynamics::deterministic: return "deterministic";
        case BetaDynamics::stochastic: return "stochastic";
    }
    return "unknown";
}

std::size_t SimConfig::observation_count() const
{
    return static_cast<std::size_t>(std::llround(horizon / step));
}

void SimConfig::validate() const
{
    if (p < 2) throw InvalidArgument("SimConfig: p must be at least 2");
    if (!(horizon > 0.0) || !(step > 0.0)) throw InvalidArgument("SimConfig: horizon and step must be positive");
    const double n = horizon / step;
    if (n < 1.0 - 1e-9 || std::abs(n - std::round(n)) > 1e-6) {
        throw InvalidArgument("SimConfig: horizon must be an integer multiple of step");
    }
    if (substeps == 0) throw InvalidArgument("SimConfig: substeps must be positive");
    if (!(leverage_lo <= leverage_hi) || leverage_lo < -1.0 || leverage_hi > 1.0) {
        throw InvalidArgument("SimConfig: leverage range must lie in [-1, 1]");
    }
    if (corr_idio_weight < 0.0 || corr_idio_weight > 1.0) {
        throw InvalidArgument("SimConfig: correlation driver weight must lie in [0, 1]");
    }
    if (!(noise_ratio >= 0.0)) throw InvalidArgument("SimConfig: noise ratio must be nonnegative");
    if (noise_scale && noise_scale->size() != p) throw InvalidArgument("SimConfig: noise_scale must have p entries");
    if (!block_sizes.empty()) {
        std::size_t total = 0;
        for (auto b : block_sizes) total += b;
        if (total != p) throw InvalidArgument("SimConfig: block sizes must sum to p");
    }
    if (std::abs(noise_kappa_hi) >= 1.0 || std::abs(noise_kappa_lo) >= 1.0) {
        throw InvalidArgument("SimConfig: noise correlation levels must lie in (-1, 1)");
    }
}

std::vector<std::size_t> random_block_sizes(std::size_t p, std::size_t largest, std::size_t lo, std::uint64_t seed)
{
    if (largest == 0 || lo == 0 || lo > largest) throw InvalidArgument("random_block_sizes: invalid size range");
    RandomStream rs(seed, StreamKind::structure, 1);
    std::vector<std::size_t> sizes;
    std::size_t used = std::min(largest, p);
    sizes.push_back(used);
    while (used < p) {
        auto b = static_cast<std::size_t>(rs.integer(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(largest)));
        b = std::min(b, p - used);
        sizes.push_back(b);
        used += b;
    }
    return sizes;
}

SimStructure make_structure(const SimConfig& cfg)
{
    cfg.validate();
    SimStructure s;
    RandomStream rs(cfg.structure_seed, StreamKind::structure, 0);
    s.leverage.resize(cfg.p);
    for (auto& v : s.leverage) v = rs.uniform(cfg.leverage_lo, cfg.leverage_hi);
    if (cfg.structure == Structure::block_diagonal) {
        if (!cfg.block_sizes.empty()) {
            s.block_sizes = cfg.block_sizes;
        } else {
            const std::size_t largest = cfg.block_max ? cfg.block_max : (cfg.p <= 200 ? 20 : 40);
            const std::size_t lo = cfg.block_min ? cfg.block_min : std::max<std::size_t>(1, largest / 4);
            s.block_sizes = random_block_sizes(cfg.p, largest, lo, cfg.structure_seed);
        }
    }
    if (cfg.noise_scale) {
        s.noise_scale = *cfg.noise_scale;
    } else {
        const double daily_var = std::exp(-cfg.logvar_level) * cfg.horizon;
        s.noise_scale.assign(cfg.p, cfg.noise_ratio * daily_var);
    }
    return s;
}

double noise_cycle(double t, double horizon, double hi, double lo)
{
    return 0.5 * (std::cos(2.0 * std::numbers::pi * t / horizon) + 1.0) * (hi - lo) + lo;
}

namespace {

std::vector<std::size_t> block_ids(std::size_t p, const std::vector<std::size_t>& blocks)
{
    std::vector<std::size_t> id(p, 0);
    std::size_t pos = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (std::size_t k = 0; k < blocks[b] && pos < p; ++k) id[pos++] = b;
    }
    return id;
}

// Lower Cholesky factor of the structured correlation matrix, applied in O(p).
class StructuredFactor {
public:
    StructuredFactor(Structure s, std::size_t p, const std::vector<std::size_t>& blocks)
        : structure_(s), p_(p), block_(block_ids(p, blocks)), l1_(p, 0.0), l2_(p, 0.0), d_(p, 1.0)
    {
    }

    // Prepares the factor for correlation level r.
    void set(double r)
    {
        r_ = r;
        if (structure_ != Structure::banding) return;
        const double r2 = r * r;
        for (std::size_t i = 0; i < p_; ++i) {
            double a2 = 0.0, a1 = 0.0;
            if (i >= 2) a2 = r2 / d_[i - 2];
            if (i >= 1) a1 = (r - (i >= 2 ? a2 * l1_[i - 1] : 0.0)) / d_[i - 1];
            const double rem = 1.0 - a2 * a2 - a1 * a1;
            if (!(rem > 0.0)) {
                std::ostringstream msg;
                msg << "banded correlation matrix not positive definite at r=" << r;
                throw NumericalFailure(msg.str());
            }
            l2_[i] = a2;
            l1_[i] = a1;
            d_[i] = std::sqrt(rem);
        }
    }

    // y = L z.
    void apply(const double* z, double* y) const
    {
        switch (structure_) {
            case Structure::banding:
                for (std::size_t i = 0; i < p_; ++i) {
                    double v = d_[i] * z[i];
                    if (i >= 1) v += l1_[i] * z[i - 1];
                    if (i >= 2) v += l2_[i] * z[i - 2];
                    y[i] = v;
                }
                break;
            case Structure::exp_decay:
            case Structure::block_diagonal: {
                const double c = std::sqrt(1.0 - r_ * r_);
                for (std::size_t i = 0; i < p_; ++i) {
                    const bool restart =
                        i == 0 || (structure_ == Structure::block_diagonal && block_[i] != block_[i - 1]);
                    y[i] = restart ? z[i] : r_ * y[i - 1] + c * z[i];
                }
                break;
            }
        }
    }

    bool linked(std::size_t i, std::size_t j) const
    {
        const std::size_t d = i > j ? i - j : j - i;
        switch (structure_) {
            case Structure::banding: return d <= 2;
            case Structure::block_diagonal: return block_[i] == block_[j];
            case Structure::exp_decay: return true;
        }
        return false;
    }

    // Adds w * D^{1/2} R(r) D^{1/2} to `acc` (lower triangle and upper by symmetry).
    void accumulate(Matrix& acc, const std::vector<double>& sd, double w) const
    {
        for (std::size_t j = 0; j < p_; ++j) {
            double rk = 1.0;
            for (std::size_t i = j; i < p_; ++i) {
                if (i > j) rk *= r_;
                if (!linked(i, j)) {
                    if (structure_ == Structure::block_diagonal) break;
                    if (structure_ == Structure::banding) break;
                    continue;
                }
                const double v = w * rk * sd[i] * sd[j];
                acc(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += v;
                if (i != j) acc(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) += v;
            }
        }
    }

    Matrix dense(const std::vector<double>& sd) const
    {
        Matrix m = Matrix::Zero(static_cast<Eigen::Index>(p_), static_cast<Eigen::Index>(p_));
        accumulate(m, sd, 1.0);
        return m;
    }

private:
    Structure structure_;
    std::size_t p_;
    std::vector<std::size_t> block_;
    std::vector<double> l1_, l2_, d_;
    double r_ = 0.0;
};

struct FactorState {
    Eigen::Matrix3d corr_chol;
    Eigen::Matrix3d corr;
    std::array<double, 3> var{};
    Matrix beta;  // p x 3
    Matrix beta_lo, beta_hi, beta_phase, beta_speed, beta_mean, beta_vol;
};

Eigen::Matrix3d factor_correlation(const FactorSpec& f)
{
    Eigen::Matrix3d r;
    r << 1.0, f.correlation[0], f.correlation[1], f.correlation[0], 1.0, f.correlation[2], f.correlation[1],
        f.correlation[2], 1.0;
    return r;
}

SimOutput run(const SimConfig& cfg, const SimRequest& request, bool with_factor)
{
    cfg.validate();
    const SimStructure st = make_structure(cfg);
    const std::size_t p = cfg.p;
    const std::size_t n = cfg.observation_count();
    const double dt = cfg.step / static_cast<double>(cfg.substeps);
    const double sqdt = std::sqrt(dt);
    const double horizon = cfg.horizon;

    for (double t : request.eval_times) {
        if (t < -1e-12 || t > horizon * (1.0 + 1e-12)) throw InvalidArgument("simulate: eval time outside [0, T]");
    }
    for (const auto& [a, b] : request.intervals) {
        if (!(b > a) || a < -1e-12 || b > horizon * (1.0 + 1e-12)) {
            throw InvalidArgument("simulate: invalid integration interval");
        }
    }

    // Observation index carrying each eval time (state is piecewise constant between observations).
    std::vector<std::size_t> eval_index(request.eval_times.size());
    for (std::size_t e = 0; e < eval_index.size(); ++e) {
        const double k = std::floor(request.eval_times[e] / cfg.step + 1e-9);
        eval_index[e] = std::min(n, static_cast<std::size_t>(std::max(0.0, k)));
    }

    std::vector<RandomStream> diff, volvol;
    diff.reserve(p);
    volvol.reserve(p);
    for (std::size_t i = 0; i < p; ++i) {
        diff.emplace_back(cfg.seed, StreamKind::diffusion, static_cast<std::uint32_t>(i));
        volvol.emplace_back(cfg.seed, StreamKind::vol_of_vol, static_cast<std::uint32_t>(i));
    }
    RandomStream corr_stream(cfg.seed, StreamKind::correlation, 0);

    StructuredFactor sigma_factor(cfg.structure, p, st.block_sizes);
    StructuredFactor omega_factor(cfg.structure, p, st.block_sizes);

    std::vector<double> logvar(p, -cfg.logvar_level);
    std::vector<double> sd(p), z(p), y(p), zs(p);
    double kappa = cfg.corr_mean;

    Matrix x(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(n + 1));
    x.col(0).setZero();

    SimOutput out;
    out.seed = cfg.seed;
    out.truth_sigma.times = request.eval_times;
    out.truth_sigma.matrices.resize(request.eval_times.size());

    // Factor state.
    const FactorSpec fs = with_factor ? *cfg.factor : FactorSpec{};
    FactorState fstate;
    std::vector<RandomStream> beta_streams;
    std::vector<RandomStream> fdiff, fvol;
    Matrix f_path, y_path;
    if (with_factor) {
        fstate.corr = factor_correlation(fs);
        Eigen::LLT<Eigen::Matrix3d> llt(fstate.corr);
        if (llt.info() != Eigen::Success) throw InvalidArgument("simulate_factor: factor correlation not PD");
        fstate.corr_chol = llt.matrixL();
        for (int k = 0; k < 3; ++k) {
            fstate.var[static_cast<std::size_t>(k)] = fs.alpha[static_cast<std::size_t>(k)];
            fdiff.emplace_back(cfg.seed, StreamKind::factor_diffusion, static_cast<std::uint32_t>(k));
            fvol.emplace_back(cfg.seed, StreamKind::factor_vol, static_cast<std::uint32_t>(k));
        }
        const auto P = static_cast<Eigen::Index>(p);
        fstate.beta.resize(P, 3);
        fstate.beta_lo.resize(P, 3);
        fstate.beta_hi.resize(P, 3);
        fstate.beta_phase.resize(P, 3);
        fstate.beta_speed.resize(P, 3);
        fstate.beta_mean.resize(P, 3);
        fstate.beta_vol.resize(P, 3);
        for (std::size_t i = 0; i < p; ++i) {
            beta_streams.emplace_back(cfg.seed, StreamKind::beta, static_cast<std::uint32_t>(i));
            RandomStream& bs = beta_streams.back();
            const auto ii = static_cast<Eigen::Index>(i);
            for (Eigen::Index l = 0; l < 3; ++l) {
                const double lo = l == 0 ? 0.25 : -0.5;
                const double hi = l == 0 ? 2.25 : 0.5;
                switch (fs.dynamics) {
                    case BetaDynamics::constant:
                        fstate.beta(ii, l) = bs.uniform(lo, hi);
                        break;
                    case BetaDynamics::deterministic: {
                        const double u1 = bs.uniform(lo, hi);
                        const double u2 = bs.uniform(lo, hi);
                        fstate.beta_lo(ii, l) = std::min(u1, u2);
                        fstate.beta_hi(ii, l) = std::max(u1, u2);
                        fstate.beta_phase(ii, l) = bs.uniform(0.0, 2.0 * horizon);
                        break;
                    }
                    case BetaDynamics::stochastic:
                        fstate.beta_speed(ii, l) = bs.uniform(1.0, 3.0);
                        fstate.beta_mean(ii, l) = bs.uniform(lo, hi);
                        fstate.beta_vol(ii, l) = bs.uniform(2.0, 4.0);
                        fstate.beta(ii, l) = fstate.beta_mean(ii, l);
                        break;
                }
            }
        }
        f_path.resize(3, static_cast<Eigen::Index>(n + 1));
        f_path.col(0).setZero();
        y_path.resize(P, static_cast<Eigen::Index>(n + 1));
        y_path.col(0).setZero();
        out.truth_total = MatrixSeries{};
        out.truth_total->times = request.eval_times;
        out.truth_total->matrices.resize(request.eval_times.size());
        out.truth_factor = MatrixSeries{};
        out.truth_factor->times = request.eval_times;
        out.truth_factor->matrices.resize(request.eval_times.size());
        out.truth_beta.resize(request.eval_times.size());
    }

    auto deterministic_beta = [&](double t) {
        for (Eigen::Index i = 0; i < fstate.beta.rows(); ++i) {
            for (Eigen::Index l = 0; l < 3; ++l) {
                const double c = 0.5 * (std::cos(std::numbers::pi * (t - fstate.beta_phase(i, l)) / horizon) + 1.0);
                fstate.beta(i, l) = c * (fstate.beta_hi(i, l) - fstate.beta_lo(i, l)) + fstate.beta_lo(i, l);
            }
        }
    };

    auto factor_cov = [&]() {
        Eigen::Matrix3d s;
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                s(a, b) = std::sqrt(std::max(0.0, fstate.var[static_cast<std::size_t>(a)])) *
                          std::sqrt(std::max(0.0, fstate.var[static_cast<std::size_t>(b)])) * fstate.corr(a, b);
            }
        }
        return s;
    };

    std::vector<Matrix> integrated(request.intervals.size(),
                                   Matrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));

    auto record = [&](std::size_t k) {
        for (std::size_t e = 0; e < eval_index.size(); ++e) {
            if (eval_index[e] != k) continue;
            for (std::size_t i = 0; i < p; ++i) sd[i] = std::exp(0.5 * logvar[i]);
            sigma_factor.set(std::tanh(kappa));
            Matrix s = sigma_factor.dense(sd);
            if (with_factor) {
                const Matrix sf = factor_cov();
                const Matrix b = fs.beta_scale * fstate.beta;
                out.truth_total->matrices[e] = b * sf * b.transpose() + s;
                out.truth_factor->matrices[e] = sf;
                out.truth_beta[e] = b;
            }
            out.truth_sigma.matrices[e] = std::move(s);
        }
    };

    const double w_idio = std::sqrt(cfg.corr_idio_weight);
    const double w_market = cfg.corr_market_loading / std::sqrt(static_cast<double>(p));
    std::array<double, 3> zf{}, zf_mixed{};

    if (with_factor && fs.dynamics == BetaDynamics::deterministic) deterministic_beta(0.0);
    record(0);
    for (std::size_t k = 1; k <= n; ++k) {
        auto xk = x.col(static_cast<Eigen::Index>(k));
        xk = x.col(static_cast<Eigen::Index>(k - 1));
        Eigen::Vector3d df = Eigen::Vector3d::Zero();
        Vector dy;
        if (with_factor) dy = Vector::Zero(static_cast<Eigen::Index>(p));
        for (std::size_t s = 0; s < cfg.substeps; ++s) {
            const double t0 = (static_cast<double>(k - 1) * static_cast<double>(cfg.substeps) + static_cast<double>(s)) * dt;
            const double r = std::tanh(kappa);
            try {
                sigma_factor.set(r);
            } catch (const NumericalFailure& e) {
                throw NumericalFailure(std::string("simulate: step ") + std::to_string(k) + ": " + e.what());
            }
            double zsum = 0.0;
            for (std::size_t i = 0; i < p; ++i) {
                sd[i] = std::exp(0.5 * logvar[i]);
                z[i] = diff[i].normal();
                zs[i] = volvol[i].normal();
                zsum += z[i];
            }
            for (std::size_t e = 0; e < request.intervals.size(); ++e) {
                const auto& [a, b] = request.intervals[e];
                if (t0 >= a - 1e-12 * horizon && t0 < b - 1e-12 * horizon) sigma_factor.accumulate(integrated[e], sd, dt);
            }
            sigma_factor.apply(z.data(), y.data());
            for (std::size_t i = 0; i < p; ++i) {
                const double dxi = sd[i] * y[i] * sqdt;
                xk(static_cast<Eigen::Index>(i)) += dxi;
                if (with_factor) dy(static_cast<Eigen::Index>(i)) += dxi;
                const double lev = st.leverage[i];
                logvar[i] += -cfg.logvar_speed * (cfg.logvar_level + logvar[i]) * dt +
                             cfg.logvar_volvol * (lev * z[i] + std::sqrt(1.0 - lev * lev) * zs[i]) * sqdt;
            }
            const double zk = w_idio * corr_stream.normal() + w_market * zsum;
            kappa += cfg.corr_speed * (cfg.corr_mean - kappa) * dt + cfg.corr_vol * kappa * zk * sqdt;

            if (with_factor) {
                for (std::size_t a = 0; a < 3; ++a) zf[a] = fdiff[a].normal();
                for (int a = 0; a < 3; ++a) {
                    double v = 0.0;
                    for (int b = 0; b <= a; ++b) v += fstate.corr_chol(a, b) * zf[static_cast<std::size_t>(b)];
                    zf_mixed[static_cast<std::size_t>(a)] = v;
                }
                Eigen::Vector3d dfs;
                for (std::size_t a = 0; a < 3; ++a) {
                    const double vol = std::sqrt(std::max(0.0, fstate.var[a]));
                    dfs(static_cast<Eigen::Index>(a)) = fs.mu[a] * dt + vol * zf_mixed[a] * sqdt;
                    const double lev = fs.leverage[a];
                    const double zv = lev * zf_mixed[a] + std::sqrt(1.0 - lev * lev) * fvol[a].normal();
                    fstate.var[a] += fs.kappa[a] * (fs.alpha[a] - fstate.var[a]) * dt + fs.nu[a] * vol * zv * sqdt;
                }
                if (fs.dynamics == BetaDynamics::deterministic) deterministic_beta(t0);
                dy += fs.beta_scale * (fstate.beta * dfs);
                df += dfs;
                if (fs.dynamics == BetaDynamics::stochastic) {
                    for (Eigen::Index i = 0; i < fstate.beta.rows(); ++i) {
                        RandomStream& bs = beta_streams[static_cast<std::size_t>(i)];
                        for (Eigen::Index l = 0; l < 3; ++l) {
                            fstate.beta(i, l) += fstate.beta_speed(i, l) * (fstate.beta_mean(i, l) - fstate.beta(i, l)) * dt +
                                                 fstate.beta_vol(i, l) * bs.normal() * sqdt;
                        }
                    }
                }
            }
        }
        if (with_factor) {
            f_path.col(static_cast<Eigen::Index>(k)) = f_path.col(static_cast<Eigen::Index>(k - 1)) + df;
            y_path.col(static_cast<Eigen::Index>(k)) = y_path.col(static_cast<Eigen::Index>(k - 1)) + dy;
            if (fs.dynamics == BetaDynamics::deterministic) deterministic_beta(static_cast<double>(k) * cfg.step);
        }
        record(k);
    }

    std::vector<std::string> ids(p);
    for (std::size_t i = 0; i < p; ++i) ids[i] = "A" + std::to_string(i + 1);
    const TimeGrid grid = TimeGrid::uniform(n, horizon);

    out.truth_sigma.labels = ids;
    if (out.truth_total) out.truth_total->labels = ids;
    for (std::size_t e = 0; e < request.intervals.size(); ++e) {
        const auto& [a, b] = request.intervals[e];
        out.truth_integrated.push_back(a, integrated[e] / (b - a));
    }
    out.truth_integrated.labels = ids;

    const Matrix& clean_values = with_factor ? y_path : x;

    if (cfg.noise) {
        Matrix z_noisy = clean_values;
        std::vector<RandomStream> noise;
        noise.reserve(p);
        for (std::size_t i = 0; i < p; ++i) noise.emplace_back(cfg.seed, StreamKind::noise, static_cast<std::uint32_t>(i));
        std::vector<double> xi(p), eta(p), csd(p);
        for (std::size_t k = 0; k <= n; ++k) {
            const double t = static_cast<double>(k) * cfg.step;
            const double level = noise_cycle(t, horizon, cfg.omega_hi, cfg.omega_lo);
            omega_factor.set(noise_cycle(t, horizon, cfg.noise_kappa_hi, cfg.noise_kappa_lo));
            for (std::size_t i = 0; i < p; ++i) {
                xi[i] = noise[i].normal();
                csd[i] = std::sqrt(st.noise_scale[i] * level);
            }
            omega_factor.apply(xi.data(), eta.data());
            for (std::size_t i = 0; i < p; ++i) {
                z_noisy(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) += csd[i] * eta[i];
            }
        }
        out.truth_omega = MatrixSeries{};
        out.truth_omega->labels = ids;
        for (double t : request.eval_times) {
            const double level = noise_cycle(t, horizon, cfg.omega_hi, cfg.omega_lo);
            omega_factor.set(noise_cycle(t, horizon, cfg.noise_kappa_hi, cfg.noise_kappa_lo));
            for (std::size_t i = 0; i < p; ++i) csd[i] = std::sqrt(st.noise_scale[i] * level);
            out.truth_omega->push_back(t, omega_factor.dense(csd));
        }
        out.noisy = AssetPanel::synchronous(ids, grid, std::move(z_noisy));
    }

    out.clean = AssetPanel::synchronous(ids, grid, clean_values);
    if (with_factor) {
        const std::vector<std::string> fids{"F1", "F2", "F3"};
        out.factors = AssetPanel::synchronous(fids, grid, f_path);
        if (cfg.noise) {
            Matrix zf_noisy = f_path;
            for (std::size_t a = 0; a < 3; ++a) {
                RandomStream ns(cfg.seed, StreamKind::factor_noise, static_cast<std::uint32_t>(a));
                const double c = cfg.noise_ratio * fs.alpha[a] * horizon;
                for (std::size_t k = 0; k <= n; ++k) {
                    const double t = static_cast<double>(k) * cfg.step;
                    const double level = noise_cycle(t, horizon, cfg.omega_hi, cfg.omega_lo);
                    zf_noisy(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(k)) += std::sqrt(c * level) * ns.normal();
                }
            }
            out.noisy_factors = AssetPanel::synchronous(fids, grid, std::move(zf_noisy));
        }
    }

    if (cfg.async) {
        out.clean = asynchronize(out.clean, cfg.seed);
        if (out.noisy) out.noisy = asynchronize(*out.noisy, cfg.seed);
        if (out.factors) out.factors = asynchronize(*out.factors, cfg.seed ^ 0xF00Dull);
        if (out.noisy_factors) out.noisy_factors = asynchronize(*out.noisy_factors, cfg.seed ^ 0xF00Dull);
    }
    return out;
}

}  // namespace

Matrix structured_correlation(Structure s, std::size_t p, const std::vector<std::size_t>& blocks, double r)
{
    StructuredFactor f(s, p, blocks);
    f.set(r);
    return f.dense(std::vector<double>(p, 1.0));
}

SimOutput simulate_sparse(const SimConfig& cfg, const SimRequest& request)
{
    return run(cfg, request, false);
}

SimOutput simulate_factor(const SimConfig& cfg, const SimRequest& request)
{
    if (!cfg.factor) throw InvalidArgument("simulate_factor: factor specification missing");
    return run(cfg, request, true);
}

SimOutput simulate(const SimConfig& cfg, const SimRequest& request)
{
    return cfg.factor ? simulate_factor(cfg, request) : simulate_sparse(cfg, request);
}

AssetPanel asynchronize(const AssetPanel& panel, std::uint64_t seed)
{
    const std::size_t p = panel.asset_count();
    std::vector<AssetSeries> series(p);
    for (std::size_t i = 0; i < p; ++i) {
        const auto& t = panel.times(i);
        const auto v = panel.series_values(i);
        RandomStream rs(seed, StreamKind::asynchrony, static_cast<std::uint32_t>(i));
        const std::size_t full = t.size() / 3;
        for (std::size_t b = 0; b < full; ++b) {
            const auto keep = 3 * b + static_cast<std::size_t>(rs.integer(0, 2));
            series[i].times.push_back(t[keep]);
            series[i].values.push_back(v[keep]);
        }
        for (std::size_t k = 3 * full; k < t.size(); ++k) {
            series[i].times.push_back(t[k]);
            series[i].values.push_back(v[k]);
        }
    }
    return AssetPanel::asynchronous(panel.ids(), std::move(series), panel.horizon());
}

AssetPanel simulate_brownian(const Matrix& sigma, std::size_t n, double horizon, std::uint64_t seed)
{
    if (sigma.rows() != sigma.cols() || sigma.rows() == 0) throw InvalidArgument("simulate_brownian: bad covariance");
    if (n == 0) throw InvalidArgument("simulate_brownian: n must be positive");
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success) throw InvalidArgument("simulate_brownian: covariance not positive definite");
    const Matrix l = llt.matrixL();
    const Eigen::Index p = sigma.rows();
    const double sq = std::sqrt(horizon / static_cast<double>(n));
    std::vector<RandomStream> streams;
    for (Eigen::Index i = 0; i < p; ++i) streams.emplace_back(seed, StreamKind::diffusion, static_cast<std::uint32_t>(i));
    Matrix x(p, static_cast<Eigen::Index>(n + 1));
    x.col(0).setZero();
    Vector z(p);
    for (std::size_t k = 1; k <= n; ++k) {
        for (Eigen::Index i = 0; i < p; ++i) z(i) = streams[static_cast<std::size_t>(i)].normal();
        x.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>(k - 1)) + sq * (l * z);
    }
    std::vector<std::string> ids(static_cast<std::size_t>(p));
    for (Eigen::Index i = 0; i < p; ++i) ids[static_cast<std::size_t>(i)] = "A" + std::to_string(i + 1);
    return AssetPanel::synchronous(std::move(ids), TimeGrid::uniform(n, horizon), std::move(x));
}

}  // namespace spotvol
