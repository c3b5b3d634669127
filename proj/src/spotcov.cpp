#include "spotvol/spotcov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spotvol {

Matrix weighted_gram(const Matrix& increments, const WeightWindow& w)
{
    const Eigen::Index p = increments.rows();
    const auto len = static_cast<Eigen::Index>(w.size());
    Matrix scaled(p, len);
    for (Eigen::Index j = 0; j < len; ++j) {
        scaled.col(j) = std::sqrt(w.weights[static_cast<std::size_t>(j)]) *
                        increments.col(static_cast<Eigen::Index>(w.first) + j);
    }
    Matrix out = Matrix::Zero(p, p);
    out.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
    symmetrize_from_lower(out);
    return out;
}

Matrix spot_cov(const ReturnPanel& returns, double t, const KernelSpec& kernel)
{
    if (returns.increments.cols() != static_cast<Eigen::Index>(returns.grid.size())) {
        throw InvalidArgument("spot_cov: increments and grid differ in length");
    }
    const WeightWindow w = normalized_weights(kernel, returns.grid, t);
    return weighted_gram(returns.increments, w);
}

MatrixSeries spot_cov_series(const ReturnPanel& returns, const std::vector<double>& eval_times,
                             const KernelSpec& kernel)
{
    MatrixSeries out;
    out.labels = returns.ids;
    for (double t : eval_times) {
        try {
            out.push_back(t, spot_cov(returns, t, kernel));
        } catch (const Error& e) {
            throw InvalidArgument("spot_cov_series at t=" + std::to_string(t) + ": " + e.what());
        }
    }
    return out;
}

std::vector<double> equidistant_times(std::size_t count, double horizon)
{
    std::vector<double> t(count);
    if (count == 1) {
        t[0] = 0.0;
        return t;
    }
    for (std::size_t j = 0; j < count; ++j) {
        t[j] = horizon * static_cast<double>(j) / static_cast<double>(count - 1);
    }
    if (count > 1) t.back() = horizon;
    return t;
}

namespace {

// CV score for one bandwidth, or NaN when some point has no leave-one-out weight.
double cv_score(const std::vector<double>& points, double step, const Matrix& gram_sq,
                std::size_t band, KernelFamily family, double h)
{
    const std::size_t n = points.size();
    double total = 0.0;
    std::vector<double> k_vals;
    for (std::size_t k = 0; k < n; ++k) {
        const auto [lo, hi] = kernel_support(points, points[k], h);
        k_vals.assign(hi - lo, 0.0);
        double mass = 0.0;
        for (std::size_t l = lo; l < hi; ++l) {
            if (l == k) continue;
            k_vals[l - lo] = kernel_eval(family, (points[l] - points[k]) / h);
            mass += k_vals[l - lo];
        }
        if (!(mass > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        const double scale = 1.0 / (step * mass);
        for (double& v : k_vals) v *= scale;

        auto g2 = [&](std::size_t a, std::size_t b) {
            const std::size_t lo_ab = std::min(a, b);
            const std::size_t off = std::max(a, b) - lo_ab;
            if (off > band) throw NumericalFailure("cv_bandwidth: band too narrow");
            return gram_sq(static_cast<Eigen::Index>(off), static_cast<Eigen::Index>(lo_ab));
        };

        double self = g2(k, k) / (step * step);
        double cross = 0.0;
        double quad = 0.0;
        for (std::size_t l = lo; l < hi; ++l) {
            const double wl = k_vals[l - lo];
            if (wl == 0.0) continue;
            cross += wl * g2(k, l);
            quad += wl * wl * g2(l, l);
            for (std::size_t m = l + 1; m < hi; ++m) {
                const double wm = k_vals[m - lo];
                if (wm != 0.0) quad += 2.0 * wl * wm * g2(l, m);
            }
        }
        total += self - 2.0 * cross / step + quad;
    }
    return total;
}

}  // namespace

double cv_bandwidth(const ReturnPanel& returns, const std::vector<double>& candidates, KernelFamily family,
                    std::vector<CvScore>* scores)
{
    if (candidates.empty()) throw InvalidArgument("cv_bandwidth: no candidate bandwidths");
    for (double h : candidates) {
        if (!(h > 0.0)) throw InvalidArgument("cv_bandwidth: candidate bandwidths must be positive");
    }
    const auto& points = returns.grid.points;
    const std::size_t n = points.size();
    if (static_cast<std::size_t>(returns.increments.cols()) != n) {
        throw InvalidArgument("cv_bandwidth: increments and grid differ in length");
    }
    const double step = returns.grid.step();
    const double h_max = *std::max_element(candidates.begin(), candidates.end());

    // Squared inner products (r_a . r_b)^2 for |a - b| <= band, stored by offset.
    std::size_t band = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto [lo, hi] = kernel_support(points, points[k], h_max);
        band = std::max(band, std::max(k - lo, hi - 1 - k));
    }
    band = std::min(2 * band, n - 1);
    Matrix gram_sq = Matrix::Zero(static_cast<Eigen::Index>(band + 1), static_cast<Eigen::Index>(n));
    const Matrix& x = returns.increments;
    for (std::size_t a = 0; a < n; ++a) {
        const std::size_t end = std::min(n, a + band + 1);
        for (std::size_t b = a; b < end; ++b) {
            const double g = x.col(static_cast<Eigen::Index>(a)).dot(x.col(static_cast<Eigen::Index>(b)));
            gram_sq(static_cast<Eigen::Index>(b - a), static_cast<Eigen::Index>(a)) = g * g;
        }
    }

    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return candidates[a] < candidates[b]; });

    double best_h = 0.0;
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    if (scores) scores->clear();
    for (std::size_t idx : order) {
        const double h = candidates[idx];
        const double s = cv_score(points, step, gram_sq, band, family, h);
        const bool skipped = std::isnan(s);
        if (scores) scores->push_back({h, s, skipped});
        if (skipped) continue;
        if (!found || s < best) {
            best = s;
            best_h = h;
            found = true;
        }
    }
    if (!found) throw InvalidArgument("cv_bandwidth: every candidate left some point without weight");
    return best_h;
}

}  // namespace spotvol
