#pragma once

#include "spotvol/common.hpp"

#include <functional>
#include <string>

namespace spotvol {

enum class ShrinkKind { hard, soft, adaptive_lasso, scad };

struct ShrinkRule {
    ShrinkKind kind = ShrinkKind::soft;
    double eta = 3.0;  ///< adaptive lasso exponent, >= 1
    double a = 3.7;    ///< SCAD knot, > 2

    static ShrinkRule hard() { return {ShrinkKind::hard}; }
    static ShrinkRule soft() { return {ShrinkKind::soft}; }
    static ShrinkRule adaptive_lasso(double eta = 3.0) { return {ShrinkKind::adaptive_lasso, eta}; }
    static ShrinkRule scad(double a = 3.7) { return {ShrinkKind::scad, 3.0, a}; }

    void validate() const;
};

ShrinkRule parse_shrink_rule(const std::string& name);
std::string to_string(ShrinkKind kind);
/// Short label used in tables: Hard, Soft, AL, SCAD.
std::string display_name(ShrinkKind kind);

enum class TuningKind {
    fixed,           ///< rho_ij = rho for every off-diagonal entry
    entry_adaptive,  ///< rho_ij = rho(t) * sqrt(S_ii S_jj)
    pd_grid          ///< entry_adaptive with rho(t) = min_pd_rho(S)
};

struct ShrinkageSpec {
    ShrinkRule rule;
    TuningKind tuning = TuningKind::pd_grid;
    double rho = 0.0;                        ///< used by fixed and entry_adaptive
    std::function<double(double)> rho_of_t;  ///< overrides `rho` for entry_adaptive when set
    double grid_step = 0.01;
    double eigen_floor = 1e-10;

    void validate() const;
};

/// s_rho(u) for the given rule. |u| == rho maps to zero.
double shrink_value(const ShrinkRule& rule, double u, double rho);

struct PdSearch {
    double rho = 0.0;
    bool positive_definite = true;  ///< false when no grid value qualified (rho is then 1)
};

struct ShrinkOutcome {
    double rho = 0.0;  ///< the rho(t) actually used
    bool positive_definite = true;
};

/// Applies the rule entrywise off the diagonal; the diagonal is copied.
Matrix shrink_matrix(const Matrix& s, const ShrinkageSpec& spec, double t = 0.0, ShrinkOutcome* outcome = nullptr);

/// Entry-adaptive shrinkage at a given rho.
Matrix shrink_entry_adaptive(const Matrix& s, const ShrinkRule& rule, double rho);

/// Smallest rho on {0, step, ..., 1} for which the entry-adaptive shrinkage has
/// minimum eigenvalue above `eigen_floor`. PD is decided by a Cholesky
/// factorisation of (S_rho - eigen_floor I).
PdSearch min_pd_rho(const Matrix& s, const ShrinkRule& rule, double grid_step = 0.01, double eigen_floor = 1e-10);

/// True when the smallest eigenvalue of the symmetric matrix exceeds `floor`.
bool exceeds_eigen_floor(const Matrix& s, double floor);

/// Tuning of the form rho(t) = M(t) * zeta with zeta = h^gamma + sqrt(step log(max(p, 1/step)) / h).
ShrinkageSpec theory_tuning(const ShrinkRule& rule, std::function<double(double)> m_of_t, double h, double gamma,
                            double step, double p);

}  // namespace spotvol
