#include "spotvol/noisecov.hpp"

#include "spotvol/spotcov.hpp"

#include <algorithm>

namespace spotvol {

Matrix noise_cov(const ReturnPanel& noisy_returns, double t, const KernelSpec& kernel)
{
    if (noisy_returns.increments.cols() != static_cast<Eigen::Index>(noisy_returns.grid.size())) {
        throw InvalidArgument("noise_cov: increments and grid differ in length");
    }
    Matrix out = spot_cov(noisy_returns, t, kernel);
    out *= 0.5 * noisy_returns.grid.step();
    return out;
}

MatrixSeries noise_cov_series(const ReturnPanel& noisy_returns, const std::vector<double>& eval_times,
                              const KernelSpec& kernel)
{
    MatrixSeries out;
    out.labels = noisy_returns.ids;
    for (double t : eval_times) {
        try {
            out.push_back(t, noise_cov(noisy_returns, t, kernel));
        } catch (const Error& e) {
            throw InvalidArgument("noise_cov_series at t=" + std::to_string(t) + ": " + e.what());
        }
    }
    return out;
}

std::size_t AsyncNoiseEstimate::missing_pairs() const
{
    std::size_t count = 0;
    for (Eigen::Index j = 0; j < observed.cols(); ++j) {
        for (Eigen::Index i = j + 1; i < observed.rows(); ++i) count += observed(i, j) ? 0 : 1;
    }
    return count;
}

PairwiseIncrements::PairwiseIncrements(const AssetPanel& panel, PairIncrements scheme) : p_(panel.asset_count())
{
    pairs_.resize(p_ * (p_ + 1) / 2);
    std::vector<std::vector<double>> values(p_);
    for (std::size_t i = 0; i < p_; ++i) values[i] = panel.series_values(i);

    std::vector<std::size_t> ia, ja;
    for (std::size_t i = 0; i < p_; ++i) {
        const auto& ti = panel.times(i);
        for (std::size_t j = 0; j <= i; ++j) {
            const auto& tj = panel.times(j);
            ia.clear();
            ja.clear();
            std::size_t a = 0, b = 0;
            while (a < ti.size() && b < tj.size()) {
                if (ti[a] < tj[b]) {
                    ++a;
                } else if (tj[b] < ti[a]) {
                    ++b;
                } else {
                    ia.push_back(a++);
                    ja.push_back(b++);
                }
            }
            Pair& pr = pairs_[i * (i + 1) / 2 + j];
            const std::size_t m = ia.size() < 2 ? 0 : ia.size() - 1;
            pr.times.resize(m);
            pr.products.resize(m);
            pr.gaps.resize(m);
            const bool own = scheme == PairIncrements::own_grid;
            for (std::size_t k = 0; k < m; ++k) {
                const std::size_t a0 = own ? ia[k + 1] - 1 : ia[k];
                const std::size_t b0 = own ? ja[k + 1] - 1 : ja[k];
                const double dzi = values[i][ia[k + 1]] - values[i][a0];
                const double dzj = values[j][ja[k + 1]] - values[j][b0];
                pr.times[k] = ti[ia[k + 1]];
                pr.products[k] = dzi * dzj;
                pr.gaps[k] = ti[ia[k + 1]] - ti[ia[k]];
            }
        }
    }
}

const PairwiseIncrements::Pair& PairwiseIncrements::pair(std::size_t i, std::size_t j) const
{
    if (i < j) std::swap(i, j);
    return pairs_.at(i * (i + 1) / 2 + j);
}

AsyncNoiseEstimate noise_cov_async(const PairwiseIncrements& pairs, double t, const KernelSpec& kernel)
{
    kernel.validate();
    const std::size_t p = pairs.asset_count();
    AsyncNoiseEstimate est;
    est.omega = Matrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    est.observed = BoolMatrix::Constant(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p), false);
    const double h = kernel.bandwidth;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const auto& pr = pairs.pair(i, j);
            const auto [lo, hi] = kernel_support(pr.times, t, h);
            double num = 0.0;
            double mass = 0.0;
            for (std::size_t k = lo; k < hi; ++k) {
                const double w = kernel_eval(kernel.family, (pr.times[k] - t) / h) * pr.gaps[k];
                num += w * pr.products[k];
                mass += w;
            }
            const auto ii = static_cast<Eigen::Index>(i);
            const auto jj = static_cast<Eigen::Index>(j);
            if (!(mass > 0.0)) {
                if (i == j) {
                    throw InvalidArgument("noise_cov_async: asset " + std::to_string(i) +
                                          " has no increment within the kernel window at t=" + std::to_string(t));
                }
                continue;
            }
            const double v = 0.5 * num / mass;
            est.omega(ii, jj) = v;
            est.omega(jj, ii) = v;
            est.observed(ii, jj) = true;
            est.observed(jj, ii) = true;
        }
    }
    return est;
}

AsyncNoiseEstimate noise_cov_async(const AssetPanel& panel, double t, const KernelSpec& kernel)
{
    return noise_cov_async(PairwiseIncrements(panel), t, kernel);
}

MatrixSeries noise_cov_async_series(const AssetPanel& panel, const std::vector<double>& eval_times,
                                    const KernelSpec& kernel, std::vector<BoolMatrix>* masks, PairIncrements scheme)
{
    const PairwiseIncrements pairs(panel, scheme);
    MatrixSeries out;
    out.labels = panel.ids();
    if (masks) masks->clear();
    for (double t : eval_times) {
        AsyncNoiseEstimate est = noise_cov_async(pairs, t, kernel);
        if (masks) masks->push_back(est.observed);
        out.push_back(t, std::move(est.omega));
    }
    return out;
}

}  // namespace spotvol
