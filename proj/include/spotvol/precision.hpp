#pragma once

#include "spotvol/common.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace spotvol {

struct LpResult {
    Vector x;
    double objective = 0.0;
    bool feasible = false;
    bool optimal = false;
    int iterations = 0;
};

/// min c^T x subject to A x <= b, x >= 0, by a dense two-phase tableau simplex
/// (Dantzig pricing, Bland's rule after a run of degenerate pivots).
LpResult solve_lp(const Vector& c, const Matrix& a, const Vector& b, double tol = 1e-10, int max_iter = 100000);

struct ClimeConfig {
    /// Constraint level; when unset, default_clime_rho picks it from the data.
    std::optional<double> rho;
    double solver_tol = 1e-9;
    int max_iter = 100000;
};

struct ClimeResult {
    Matrix precision;  ///< symmetrised
    Matrix raw;        ///< column solutions before symmetrisation
    double rho = 0.0;
    double max_residual = 0.0;  ///< max |S Lambda_raw - I|
};

/// Column-wise min |lambda|_1 s.t. |S lambda - e_j|_max <= rho, symmetrised by
/// keeping the entry of smaller magnitude of (i, j) and (j, i).
/// Throws NumericalFailure when some column is infeasible or the iteration cap is hit.
ClimeResult clime_precision(const Matrix& s, const ClimeConfig& cfg = {});

/// Log grid 1e-4 .. 1 with four points per decade.
std::vector<double> clime_rho_grid();

/// Smallest value of clime_rho_grid() for which every column problem is feasible.
double default_clime_rho(const Matrix& s, double tol = 1e-9);

}  // namespace spotvol
