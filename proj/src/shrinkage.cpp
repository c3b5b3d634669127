#include "spotvol/shrinkage.hpp"

#include <algorithm>
#include <cmath>

namespace spotvol {

void ShrinkRule::validate() const
{
    if (kind == ShrinkKind::adaptive_lasso && !(eta >= 1.0)) {
        throw InvalidArgument("ShrinkRule: adaptive lasso requires eta >= 1");
    }
    if (kind == ShrinkKind::scad && !(a > 2.0)) throw InvalidArgument("ShrinkRule: SCAD requires a > 2");
}

void ShrinkageSpec::validate() const
{
    rule.validate();
    if (!(grid_step > 0.0 && grid_step <= 1.0)) throw InvalidArgument("ShrinkageSpec: grid step must be in (0, 1]");
    if (!(eigen_floor >= 0.0)) throw InvalidArgument("ShrinkageSpec: eigen floor must be nonnegative");
    if (!(rho >= 0.0)) throw InvalidArgument("ShrinkageSpec: rho must be nonnegative");
}

ShrinkRule parse_shrink_rule(const std::string& name)
{
    if (name == "hard") return ShrinkRule::hard();
    if (name == "soft") return ShrinkRule::soft();
    if (name == "al" || name == "adaptive_lasso") return ShrinkRule::adaptive_lasso();
    if (name == "scad") return ShrinkRule::scad();
    throw InvalidArgument("unknown shrinkage rule '" + name + "'");
}

std::string to_string(ShrinkKind kind)
{
    switch (kind) {
        case ShrinkKind::hard: return "hard";
        case ShrinkKind::soft: return "soft";
        case ShrinkKind::adaptive_lasso: return "adaptive_lasso";
        case ShrinkKind::scad: return "scad";
    }
    return "unknown";
}

std::string display_name(ShrinkKind kind)
{
    switch (kind) {
        case ShrinkKind::hard: return "Hard";
        case ShrinkKind::soft: return "Soft";
        case ShrinkKind::adaptive_lasso: return "AL";
        case ShrinkKind::scad: return "SCAD";
    }
    return "?";
}

double shrink_value(const ShrinkRule& rule, double u, double rho)
{
    const double a = std::abs(u);
    if (a <= rho) return 0.0;
    const double sgn = u < 0.0 ? -1.0 : 1.0;
    switch (rule.kind) {
        case ShrinkKind::hard: return u;
        case ShrinkKind::soft: return sgn * (a - rho);
        case ShrinkKind::adaptive_lasso: return u * std::max(0.0, 1.0 - std::pow(rho / a, rule.eta));
        case ShrinkKind::scad:
            if (a <= 2.0 * rho) return sgn * (a - rho);
            if (a <= rule.a * rho) return ((rule.a - 1.0) * u - sgn * rule.a * rho) / (rule.a - 2.0);
            return u;
    }
    return u;
}

namespace {

void check_square(const Matrix& s, const char* what)
{
    if (s.rows() != s.cols()) throw InvalidArgument(std::string(what) + ": matrix must be square");
}

Matrix shrink_with(const Matrix& s, const ShrinkRule& rule, double rho, bool adaptive)
{
    const Eigen::Index p = s.rows();
    Matrix out(p, p);
    Vector root(p);
    if (adaptive) {
        for (Eigen::Index i = 0; i < p; ++i) {
            if (!(s(i, i) > 0.0)) {
                throw InvalidArgument("shrink_matrix: entry-adaptive tuning needs a positive diagonal");
            }
            root(i) = std::sqrt(s(i, i));
        }
    }
    for (Eigen::Index j = 0; j < p; ++j) {
        out(j, j) = s(j, j);
        for (Eigen::Index i = j + 1; i < p; ++i) {
            const double r = adaptive ? rho * root(i) * root(j) : rho;
            const double v = shrink_value(rule, s(i, j), r);
            out(i, j) = v;
            out(j, i) = v;
        }
    }
    return out;
}

}  // namespace

Matrix shrink_entry_adaptive(const Matrix& s, const ShrinkRule& rule, double rho)
{
    check_square(s, "shrink_matrix");
    return shrink_with(s, rule, rho, true);
}

bool exceeds_eigen_floor(const Matrix& s, double floor)
{
    Matrix shifted = s;
    shifted.diagonal().array() -= floor;
    Eigen::LLT<Matrix, Eigen::Lower> llt(shifted);
    return llt.info() == Eigen::Success;
}

PdSearch min_pd_rho(const Matrix& s, const ShrinkRule& rule, double grid_step, double eigen_floor)
{
    check_square(s, "min_pd_rho");
    rule.validate();
    if (!(grid_step > 0.0 && grid_step <= 1.0)) throw InvalidArgument("min_pd_rho: grid step must be in (0, 1]");
    const auto steps = static_cast<int>(std::floor(1.0 / grid_step + 1e-9));
    const bool exact = std::abs(steps * grid_step - 1.0) < 1e-9;
    for (int k = 0; k <= steps; ++k) {
        // k / steps avoids accumulating representation error in k * step.
        const double rho = exact ? static_cast<double>(k) / steps : std::min(1.0, k * grid_step);
        const Matrix candidate = k == 0 ? s : shrink_entry_adaptive(s, rule, rho);
        if (exceeds_eigen_floor(candidate, eigen_floor)) return {rho, true};
    }
    if (!exact) {
        if (exceeds_eigen_floor(shrink_entry_adaptive(s, rule, 1.0), eigen_floor)) return {1.0, true};
    }
    return {1.0, false};
}

Matrix shrink_matrix(const Matrix& s, const ShrinkageSpec& spec, double t, ShrinkOutcome* outcome)
{
    check_square(s, "shrink_matrix");
    spec.validate();
    ShrinkOutcome out;
    Matrix result;
    switch (spec.tuning) {
        case TuningKind::fixed:
            out.rho = spec.rho;
            result = shrink_with(s, spec.rule, spec.rho, false);
            break;
        case TuningKind::entry_adaptive:
            out.rho = spec.rho_of_t ? spec.rho_of_t(t) : spec.rho;
            if (!(out.rho >= 0.0)) throw InvalidArgument("shrink_matrix: rho(t) must be nonnegative");
            result = shrink_with(s, spec.rule, out.rho, true);
            break;
        case TuningKind::pd_grid: {
            const PdSearch search = min_pd_rho(s, spec.rule, spec.grid_step, spec.eigen_floor);
            out.rho = search.rho;
            out.positive_definite = search.positive_definite;
            if (!search.positive_definite) warn("shrinkage not positive definite at rho=1 (t=" + std::to_string(t) + ")");
            result = search.rho == 0.0 ? s : shrink_with(s, spec.rule, search.rho, true);
            break;
        }
    }
    if (outcome) *outcome = out;
    return result;
}

ShrinkageSpec theory_tuning(const ShrinkRule& rule, std::function<double(double)> m_of_t, double h, double gamma,
                            double step, double p)
{
    if (!(h > 0.0 && step > 0.0 && p > 0.0 && gamma > 0.0)) {
        throw InvalidArgument("theory_tuning: h, gamma, step and p must be positive");
    }
    if (!m_of_t) throw InvalidArgument("theory_tuning: M(t) is required");
    const double zeta = std::pow(h, gamma) + std::sqrt(step * std::log(std::max(p, 1.0 / step)) / h);
    ShrinkageSpec spec;
    spec.rule = rule;
    spec.tuning = TuningKind::entry_adaptive;
    spec.rho_of_t = [m = std::move(m_of_t), zeta](double t) { return m(t) * zeta; };
    return spec;
}

}  // namespace spotvol
