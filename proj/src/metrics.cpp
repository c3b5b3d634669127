#include "spotvol/metrics.hpp"

#include "spotvol/spotcov.hpp"

#include <algorithm>
#include <cmath>

namespace spotvol {

double spectral_norm(const Matrix& a)
{
    if (a.size() == 0) return 0.0;
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if (a.rows() == a.cols() && (a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
        return eig.eigenvalues().cwiseAbs().maxCoeff();
    }
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(0);
}

MatrixNorms matrix_norms(const Matrix& a, double q)
{
    if (!(q >= 0.0 && q < 1.0)) throw InvalidArgument("matrix_norms: q must lie in [0, 1)");
    MatrixNorms out;
    if (a.size() == 0) return out;
    if (!a.allFinite()) throw InvalidArgument("matrix_norms: non-finite entry");
    const Matrix abs = a.cwiseAbs();
    out.spectral = spectral_norm(a);
    out.frobenius = a.norm();
    out.entry_l1 = abs.sum();
    out.col_l1 = abs.colwise().sum().maxCoeff();
    out.max = abs.maxCoeff();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        double row = 0.0;
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            const double v = abs(i, j);
            row += q == 0.0 ? (v != 0.0 ? 1.0 : 0.0) : std::pow(v, q);
        }
        out.inf_q = std::max(out.inf_q, row);
    }
    return out;
}

RelativeNorm::RelativeNorm(const Matrix& truth_pd) : truth_(truth_pd)
{
    if (truth_pd.rows() != truth_pd.cols() || truth_pd.rows() == 0) {
        throw InvalidArgument("relative_norm: truth must be square and nonempty");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (truth_pd + truth_pd.transpose()), Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 1e-12)) throw InvalidArgument("relative_norm: truth is not positive definite");
    llt_.compute(0.5 * (truth_pd + truth_pd.transpose()));
    if (llt_.info() != Eigen::Success) throw InvalidArgument("relative_norm: truth is not positive definite");
}

double RelativeNorm::operator()(const Matrix& est) const
{
    if (est.rows() != truth_.rows() || est.cols() != truth_.cols()) throw InvalidArgument("relative_norm: shape mismatch");
    // ||S^{-1/2} E S^{-1/2}||_F == ||L^{-1} E L^{-T}||_F for S = L L^T.
    Matrix w = est - truth_;
    llt_.matrixL().solveInPlace(w);
    Matrix wt = w.transpose();
    llt_.matrixL().solveInPlace(wt);
    return wt.norm() / std::sqrt(static_cast<double>(truth_.rows()));
}

double relative_norm(const Matrix& est, const Matrix& truth_pd)
{
    return RelativeNorm(truth_pd)(est);
}

void LossReport::finalise()
{
    auto mean_of_means = [](const std::vector<std::vector<double>>& v) {
        double total = 0.0;
        std::size_t count = 0;
        for (const auto& rep : v) {
            if (rep.empty()) continue;
            double s = 0.0;
            for (double x : rep) s += x;
            total += s / static_cast<double>(rep.size());
            ++count;
        }
        return count ? total / static_cast<double>(count) : 0.0;
    };
    mfl = mean_of_means(frobenius);
    msl = mean_of_means(spectral);
    if (!relative.empty() && !relative.front().empty()) mrl = mean_of_means(relative);
}

ReplicationLoss series_loss(const MatrixSeries& est, const MatrixSeries& truth, bool with_relative, double scale)
{
    if (est.size() != truth.size()) throw InvalidArgument("series_loss: series lengths differ");
    ReplicationLoss out;
    for (std::size_t j = 0; j < est.size(); ++j) {
        if (std::abs(est.times[j] - truth.times[j]) > 1e-12 * std::max(1.0, std::abs(truth.times[j]))) {
            throw InvalidArgument("series_loss: evaluation times are not aligned");
        }
        const Matrix diff = (est.matrices[j] - truth.matrices[j]) / scale;
        out.frobenius.push_back(diff.norm());
        out.spectral.push_back(spectral_norm(diff));
        if (with_relative) out.relative.push_back(relative_norm(est.matrices[j], truth.matrices[j]));
    }
    return out;
}

LossReport mfl_msl(const std::vector<MatrixSeries>& est, const std::vector<MatrixSeries>& truth, bool with_relative)
{
    if (est.size() != truth.size()) throw InvalidArgument("mfl_msl: replication counts differ");
    LossReport report;
    for (std::size_t r = 0; r < est.size(); ++r) {
        ReplicationLoss loss = series_loss(est[r], truth[r], with_relative);
        report.frobenius.push_back(std::move(loss.frobenius));
        report.spectral.push_back(std::move(loss.spectral));
        if (with_relative) report.relative.push_back(std::move(loss.relative));
    }
    report.finalise();
    return report;
}

Matrix integrated_cov(const ReturnPanel& returns, std::pair<double, double> interval, const IntegratedOptions& opt)
{
    const auto [a, b] = interval;
    if (!(b > a)) throw InvalidArgument("integrated_cov: empty interval");
    const auto& pts = returns.grid.points;
    if (pts.empty()) throw InvalidArgument("integrated_cov: no returns");
    const double slack = 1e-9 * returns.grid.step();
    if (a < -slack || b > returns.grid.horizon + slack) throw InvalidArgument("integrated_cov: interval outside [0, T]");

    // Increments (t_{k-1}, t_k] with t_k in (a, b].
    const auto lo = static_cast<std::size_t>(std::upper_bound(pts.begin(), pts.end(), a + slack) - pts.begin());
    const auto hi = static_cast<std::size_t>(std::upper_bound(pts.begin(), pts.end(), b + slack) - pts.begin());
    if (hi <= lo) throw InvalidArgument("integrated_cov: no observation inside the interval");
    const Eigen::Index p = returns.increments.rows();

    if (opt.mode == IntegratedMode::realized_shrunk) {
        const auto block = returns.increments.middleCols(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi - lo));
        Matrix rv = Matrix::Zero(p, p);
        rv.selfadjointView<Eigen::Lower>().rankUpdate(block);
        symmetrize_from_lower(rv);
        rv /= (b - a);
        return opt.shrinkage ? shrink_matrix(rv, *opt.shrinkage, 0.5 * (a + b)) : rv;
    }

    if (opt.stride == 0) throw InvalidArgument("integrated_cov: stride must be positive");
    // Sample times: the left end of the interval and the in-interval observation times before b.
    std::vector<double> times;
    for (std::size_t k = lo; k < hi; ++k) {
        const double t = k == 0 ? a : pts[k - 1];
        if (t >= a - slack && t < b - slack) times.push_back(t);
    }
    if (times.empty()) times.push_back(a);
    Matrix acc = Matrix::Zero(p, p);
    std::size_t used = 0;
    for (std::size_t j = 0; j < times.size(); j += opt.stride) {
        Matrix s = spot_cov(returns, times[j], opt.kernel);
        if (opt.shrinkage) s = shrink_matrix(s, *opt.shrinkage, times[j]);
        acc += s;
        ++used;
    }
    return acc / static_cast<double>(used);
}

std::vector<std::pair<double, double>> equal_intervals(std::size_t count, double horizon)
{
    if (count == 0 || !(horizon > 0.0)) throw InvalidArgument("equal_intervals: need a positive count and horizon");
    std::vector<std::pair<double, double>> out(count);
    for (std::size_t j = 0; j < count; ++j) {
        out[j] = {horizon * static_cast<double>(j) / static_cast<double>(count),
                  j + 1 == count ? horizon : horizon * static_cast<double>(j + 1) / static_cast<double>(count)};
    }
    return out;
}

RateDiagnostics rate_diag(const RateInputs& in)
{
    if (!(in.h > 0.0 && in.step > 0.0 && in.p > 0.0 && in.gamma > 0.0 && in.varpi > 0.0)) {
        throw InvalidArgument("rate_diag: inputs must be positive");
    }
    if (!(in.q >= 0.0 && in.q < 1.0)) throw InvalidArgument("rate_diag: q must lie in [0, 1)");
    const double log_term = std::log(std::max(in.p, 1.0 / in.step));
    const double h1 = in.h1.value_or(in.h);
    RateDiagnostics out;
    out.zeta = std::pow(in.h, in.gamma) + std::sqrt(in.step * log_term / in.h);
    out.delta = std::pow(h1, in.gamma) + std::sqrt(in.step * log_term / h1);
    out.sparse_rate = in.varpi * std::pow(out.zeta, 1.0 - in.q);
    if (in.pseudo_count) {
        const double n = *in.pseudo_count;
        out.zeta_star = std::pow(in.h, in.gamma) + std::sqrt(std::log(std::max(in.p, n)) / (n * in.h));
        if (in.b) out.nu = std::sqrt(n * log_term) * (std::sqrt(*in.b) + 1.0 / std::sqrt(*in.b / in.step));
    }
    return out;
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> sparsity_pattern(const Matrix& corr, double threshold)
{
    if (corr.rows() != corr.cols()) throw InvalidArgument("sparsity_pattern: matrix must be square");
    if (corr.size() && corr.cwiseAbs().maxCoeff() > 1.0 + 1e-8) {
        throw InvalidArgument("sparsity_pattern: entries exceed 1 in magnitude");
    }
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> out = (corr.cwiseAbs().array() >= threshold).matrix();
    out.diagonal().setConstant(true);
    return out;
}

Matrix to_correlation(const Matrix& cov)
{
    const Vector d = cov.diagonal();
    Vector inv(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) inv(i) = d(i) > 0.0 ? 1.0 / std::sqrt(d(i)) : 0.0;
    Matrix out = inv.asDiagonal() * cov * inv.asDiagonal();
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (d(i) > 0.0) out(i, i) = 1.0;
    }
    return out;
}

}  // namespace spotvol
