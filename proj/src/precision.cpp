#include "spotvol/precision.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace spotvol {

namespace {

class Tableau {
public:
    Tableau(Eigen::Index rows, Eigen::Index cols) : t_(Matrix::Zero(rows + 1, cols + 1)), basis_(rows, -1) {}

    Matrix& data() { return t_; }
    std::vector<Eigen::Index>& basis() { return basis_; }
    Eigen::Index rows() const { return t_.rows() - 1; }
    Eigen::Index cols() const { return t_.cols() - 1; }
    double rhs(Eigen::Index i) const { return t_(i, cols()); }

    void pivot(Eigen::Index r, Eigen::Index c)
    {
        t_.row(r) /= t_(r, c);
        for (Eigen::Index i = 0; i < t_.rows(); ++i) {
            if (i == r) continue;
            const double f = t_(i, c);
            if (f != 0.0) t_.row(i) -= f * t_.row(r);
        }
        basis_[static_cast<std::size_t>(r)] = c;
    }

    // Minimises the objective held in the last row over columns [0, allowed).
    // Returns false on unboundedness or when the iteration cap is hit.
    bool optimise(Eigen::Index allowed, double tol, int max_iter, int& iterations, bool& capped)
    {
        const Eigen::Index m = rows();
        int degenerate_run = 0;
        while (true) {
            if (iterations >= max_iter) {
                capped = true;
                return false;
            }
            const bool bland = degenerate_run > 50;
            Eigen::Index enter = -1;
            double best = -tol;
            for (Eigen::Index j = 0; j < allowed; ++j) {
                const double r = t_(m, j);
                if (r < best) {
                    enter = j;
                    if (bland) break;
                    best = r;
                }
            }
            if (enter < 0) return true;
            Eigen::Index leave = -1;
            double ratio = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < m; ++i) {
                const double a = t_(i, enter);
                if (a > tol) {
                    const double q = t_(i, cols()) / a;
                    if (q < ratio - 1e-15 ||
                        (bland && std::abs(q - ratio) <= 1e-15 && leave >= 0 &&
                         basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
                        ratio = q;
                        leave = i;
                    }
                }
            }
            if (leave < 0) return false;
            degenerate_run = ratio <= tol ? degenerate_run + 1 : 0;
            pivot(leave, enter);
            ++iterations;
        }
    }

private:
    Matrix t_;
    std::vector<Eigen::Index> basis_;
};

}  // namespace

LpResult solve_lp(const Vector& c, const Matrix& a, const Vector& b, double tol, int max_iter)
{
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();
    if (c.size() != n || b.size() != m) throw InvalidArgument("solve_lp: shape mismatch");

    std::vector<Eigen::Index> negative;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (b(i) < 0.0) negative.push_back(i);
    }
    const auto n_art = static_cast<Eigen::Index>(negative.size());
    const Eigen::Index slack0 = n;
    const Eigen::Index art0 = n + m;
    const Eigen::Index total = n + m + n_art;
    Tableau tab(m, total);
    Matrix& t = tab.data();
    for (Eigen::Index i = 0; i < m; ++i) {
        t.row(i).head(n) = a.row(i);
        t(i, slack0 + i) = 1.0;
        t(i, total) = b(i);
        tab.basis()[static_cast<std::size_t>(i)] = slack0 + i;
    }
    for (Eigen::Index k = 0; k < n_art; ++k) {
        const Eigen::Index i = negative[static_cast<std::size_t>(k)];
        t.row(i) *= -1.0;
        t(i, art0 + k) = 1.0;
        tab.basis()[static_cast<std::size_t>(i)] = art0 + k;
    }

    LpResult result;
    bool capped = false;
    if (n_art > 0) {
        t.row(m).setZero();
        for (Eigen::Index k = 0; k < n_art; ++k) {
            t.row(m) -= t.row(negative[static_cast<std::size_t>(k)]);
        }
        for (Eigen::Index k = 0; k < n_art; ++k) t(m, art0 + k) = 0.0;
        tab.optimise(total, tol, max_iter, result.iterations, capped);
        if (capped) return result;
        const double infeasibility = -t(m, total);
        if (infeasibility > tol * std::max(1.0, b.cwiseAbs().maxCoeff())) return result;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (tab.basis()[static_cast<std::size_t>(i)] < art0) continue;
            for (Eigen::Index j = 0; j < art0; ++j) {
                if (std::abs(t(i, j)) > tol) {
                    tab.pivot(i, j);
                    break;
                }
            }
        }
    }
    result.feasible = true;

    t.row(m).setZero();
    t.row(m).head(n) = c.transpose();
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::Index bi = tab.basis()[static_cast<std::size_t>(i)];
        if (bi < n && c(bi) != 0.0) t.row(m) -= c(bi) * t.row(i);
    }
    result.optimal = tab.optimise(art0, tol, max_iter, result.iterations, capped);
    result.x = Vector::Zero(n);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::Index bi = tab.basis()[static_cast<std::size_t>(i)];
        if (bi < n) result.x(bi) = std::max(0.0, t(i, total));
    }
    result.objective = c.dot(result.x);
    return result;
}

namespace {

Matrix clime_constraints(const Matrix& s)
{
    const Eigen::Index p = s.rows();
    Matrix a(2 * p, 2 * p);
    a << s, -s, -s, s;
    return a;
}

LpResult clime_column(const Matrix& a, Eigen::Index p, Eigen::Index j, double rho, double tol, int max_iter)
{
    Vector b = Vector::Constant(2 * p, rho);
    b(j) += 1.0;
    b(p + j) -= 1.0;
    return solve_lp(Vector::Ones(2 * p), a, b, tol, max_iter);
}

}  // namespace

std::vector<double> clime_rho_grid()
{
    std::vector<double> grid;
    for (int k = -16; k <= 0; ++k) grid.push_back(std::pow(10.0, k / 4.0));
    grid.back() = 1.0;
    return grid;
}

double default_clime_rho(const Matrix& s, double tol)
{
    if (s.rows() != s.cols()) throw InvalidArgument("default_clime_rho: matrix must be square");
    const Eigen::Index p = s.rows();
    const auto grid = clime_rho_grid();
    // A positive definite matrix admits its exact inverse, so every level is feasible.
    Eigen::LLT<Matrix> llt(0.5 * (s + s.transpose()));
    if (llt.info() == Eigen::Success) return grid.front();
    const Matrix a = clime_constraints(s);
    for (double rho : grid) {
        bool all = true;
        for (Eigen::Index j = 0; j < p && all; ++j) all = clime_column(a, p, j, rho, tol, 100000).feasible;
        if (all) return rho;
    }
    return 1.0;
}

ClimeResult clime_precision(const Matrix& s, const ClimeConfig& cfg)
{
    if (s.rows() != s.cols() || s.rows() == 0) throw InvalidArgument("clime_precision: matrix must be square");
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, s.cwiseAbs().maxCoeff())) {
        throw InvalidArgument("clime_precision: matrix must be symmetric");
    }
    if (!(cfg.solver_tol > 0.0)) throw InvalidArgument("clime_precision: solver_tol must be positive");
    const Eigen::Index p = s.rows();
    ClimeResult out;
    out.rho = cfg.rho ? *cfg.rho : default_clime_rho(s, cfg.solver_tol);
    if (!(out.rho >= 0.0)) throw InvalidArgument("clime_precision: rho must be nonnegative");

    const Matrix a = clime_constraints(s);
    out.raw.resize(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const LpResult lp = clime_column(a, p, j, out.rho, cfg.solver_tol, cfg.max_iter);
        if (!lp.feasible || !lp.optimal) {
            std::ostringstream msg;
            msg << "clime_precision: column " << j << (lp.feasible ? " hit the iteration cap" : " is infeasible")
                << " at rho=" << out.rho;
            throw NumericalFailure(msg.str());
        }
        out.raw.col(j) = lp.x.head(p) - lp.x.tail(p);
    }
    out.max_residual = (s * out.raw - Matrix::Identity(p, p)).cwiseAbs().maxCoeff();
    out.precision.resize(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) {
            const double x = out.raw(i, j);
            const double y = out.raw(j, i);
            const double v = std::abs(x) <= std::abs(y) ? x : y;
            out.precision(i, j) = v;
            out.precision(j, i) = v;
        }
    }
    return out;
}

}  // namespace spotvol
