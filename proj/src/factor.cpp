#include "spotvol/factor.hpp"

#include "spotvol/spotcov.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace spotvol {

Matrix spot_cov_cross(const ReturnPanel& a, const ReturnPanel& b, double t, const KernelSpec& kernel)
{
    if (a.grid.points != b.grid.points || a.increments.cols() != b.increments.cols()) {
        throw InvalidArgument("spot_cov_cross: panels are not on the same grid");
    }
    const WeightWindow w = normalized_weights(kernel, a.grid, t);
    const auto first = static_cast<Eigen::Index>(w.first);
    const auto len = static_cast<Eigen::Index>(w.size());
    const Eigen::Map<const Vector> weights(w.weights.data(), len);
    return a.increments.middleCols(first, len) * weights.asDiagonal() * b.increments.middleCols(first, len).transpose();
}

Matrix factor_cov_inverse(const Matrix& sigma_f, double max_condition, double* condition)
{
    if (sigma_f.rows() != sigma_f.cols() || sigma_f.rows() == 0) {
        throw InvalidArgument("factor covariance must be square and nonempty");
    }
    Matrix sym = 0.5 * (sigma_f + sigma_f.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    if (eig.info() != Eigen::Success) throw NumericalFailure("factor covariance eigendecomposition failed");
    const Vector& ev = eig.eigenvalues();
    const double largest = ev.cwiseAbs().maxCoeff();
    const double smallest = ev.cwiseAbs().minCoeff();
    const double cond = smallest > 0.0 ? largest / smallest : std::numeric_limits<double>::infinity();
    if (condition) *condition = cond;
    if (!(cond <= max_condition)) {
        std::ostringstream msg;
        msg << "factor covariance is singular or ill-conditioned (condition number " << cond << ")";
        throw NumericalFailure(msg.str());
    }
    return eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
}

Matrix estimate_beta(const Matrix& sigma_yf, const Matrix& sigma_f, double max_condition)
{
    if (sigma_yf.cols() != sigma_f.rows()) throw InvalidArgument("estimate_beta: shape mismatch");
    return sigma_yf * factor_cov_inverse(sigma_f, max_condition);
}

Matrix idio_cov(const Matrix& sigma_y, const Matrix& sigma_yf, const Matrix& sigma_f, double max_condition)
{
    if (sigma_y.rows() != sigma_yf.rows() || sigma_yf.cols() != sigma_f.rows() || sigma_y.rows() != sigma_y.cols()) {
        throw InvalidArgument("idio_cov: shape mismatch");
    }
    Matrix out = sigma_y - sigma_yf * factor_cov_inverse(sigma_f, max_condition) * sigma_yf.transpose();
    symmetrize(out);
    return out;
}

Matrix factor_total_cov(const Matrix& beta, const Matrix& sigma_f, const Matrix& sigma_x_shrunk)
{
    if (beta.cols() != sigma_f.rows() || sigma_f.rows() != sigma_f.cols() || beta.rows() != sigma_x_shrunk.rows() ||
        sigma_x_shrunk.rows() != sigma_x_shrunk.cols()) {
        throw InvalidArgument("factor_total_cov: shape mismatch");
    }
    Matrix out = beta * sigma_f * beta.transpose() + sigma_x_shrunk;
    symmetrize(out);
    return out;
}

FactorEstimate factor_pipeline(const AssetPanel& y, const AssetPanel& f, const std::vector<double>& eval_times,
                               const FactorPipelineConfig& cfg)
{
    ReturnPanel ry, rf;
    KernelSpec kernel = cfg.kernel;
    try {
        if (cfg.preavg) {
            const auto filter = [&](const AssetPanel& panel) {
                return panel.is_synchronous() ? preaverage(panel, *cfg.preavg) : preaverage_async(panel, *cfg.preavg);
            };
            ry = diff_returns(filter(y));
            rf = diff_returns(filter(f));
            kernel = cfg.preavg->smooth;
        } else {
            if (!y.is_synchronous() || !f.is_synchronous()) {
                throw InvalidArgument("factor_pipeline: synchronous panels required without pre-averaging");
            }
            ry = diff_returns(y);
            rf = diff_returns(f);
        }
    } catch (const Error& e) {
        throw InvalidArgument(std::string("factor_pipeline [returns]: ") + e.what());
    }
    if (ry.grid.points != rf.grid.points) throw InvalidArgument("factor_pipeline: Y and F grids differ");

    FactorEstimate est;
    est.times = eval_times;
    est.idio_cov.labels = ry.ids;
    est.idio_shrunk.labels = ry.ids;
    est.total_cov.labels = ry.ids;
    est.factor_cov.labels = rf.ids;

    // Joint panel (Y; F) so one Gram product gives all three blocks.
    ReturnPanel joint;
    joint.grid = ry.grid;
    joint.increments.resize(ry.increments.rows() + rf.increments.rows(), ry.increments.cols());
    joint.increments << ry.increments, rf.increments;
    const Eigen::Index p = ry.increments.rows();
    const Eigen::Index k = rf.increments.rows();

    std::vector<Matrix> cross;
    for (double t : eval_times) {
        const char* stage = "spot covariance";
        try {
            const Matrix s = spot_cov(joint, t, kernel);
            const Matrix sy = s.topLeftCorner(p, p);
            const Matrix syf = s.topRightCorner(p, k);
            const Matrix sf = s.bottomRightCorner(k, k);
            stage = "beta";
            double cond = 0.0;
            const Matrix sf_inv = factor_cov_inverse(sf, cfg.max_condition, &cond);
            const Matrix beta = syf * sf_inv;
            stage = "idiosyncratic";
            Matrix sx = sy - syf * sf_inv * syf.transpose();
            symmetrize(sx);
            stage = "shrinkage";
            ShrinkOutcome outcome;
            const Matrix sxs = shrink_matrix(sx, cfg.shrinkage, t, &outcome);
            stage = "assembly";
            Matrix total = factor_total_cov(beta, sf, sxs);

            est.betas.push_back(beta);
            est.factor_cov.push_back(t, sf);
            est.idio_cov.push_back(t, std::move(sx));
            est.idio_shrunk.push_back(t, sxs);
            est.total_cov.push_back(t, std::move(total));
            est.condition_numbers.push_back(cond);
            est.rhos.push_back(outcome.rho);
            cross.push_back(syf);
        } catch (const Error& e) {
            throw NumericalFailure(std::string("factor_pipeline [") + stage + "] at t=" + std::to_string(t) + ": " +
                                   e.what());
        }
    }

    // Residuals dY - beta_bar dF against dF, with beta_bar the time-averaged loading.
    if (!est.betas.empty()) {
        Matrix beta_bar = Matrix::Zero(p, k);
        for (const auto& b : est.betas) beta_bar += b;
        beta_bar /= static_cast<double>(est.betas.size());
        for (std::size_t j = 0; j < cross.size(); ++j) {
            est.orthogonality.push_back((cross[j] - beta_bar * est.factor_cov.matrices[j]).cwiseAbs().maxCoeff());
        }
    }
    return est;
}

}  // namespace spotvol
