#include "spotvol/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace spotvol {

void KernelSpec::validate() const
{
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
        throw InvalidArgument("KernelSpec: bandwidth must be positive and finite");
    }
}

KernelFamily parse_kernel_family(const std::string& name)
{
    if (name == "epanechnikov") return KernelFamily::epanechnikov;
    if (name == "uniform") return KernelFamily::uniform;
    if (name == "triangular") return KernelFamily::triangular;
    if (name == "quartic" || name == "biweight") return KernelFamily::quartic;
    throw InvalidArgument("unknown kernel family '" + name + "'");
}

std::string to_string(KernelFamily family)
{
    switch (family) {
        case KernelFamily::epanechnikov: return "epanechnikov";
        case KernelFamily::uniform: return "uniform";
        case KernelFamily::triangular: return "triangular";
        case KernelFamily::quartic: return "quartic";
    }
    return "unknown";
}

double kernel_eval(KernelFamily family, double u)
{
    const double a = std::abs(u);
    if (a > 1.0) return 0.0;
    switch (family) {
        case KernelFamily::epanechnikov: return 0.75 * (1.0 - u * u);
        case KernelFamily::uniform: return 0.5;
        case KernelFamily::triangular: return 1.0 - a;
        case KernelFamily::quartic: {
            const double v = 1.0 - u * u;
            return 0.9375 * v * v;
        }
    }
    return 0.0;
}

double kernel_cdf(KernelFamily family, double u)
{
    if (u <= -1.0) return 0.0;
    if (u >= 1.0) return 1.0;
    switch (family) {
        case KernelFamily::epanechnikov: return 0.5 + 0.75 * (u - u * u * u / 3.0);
        case KernelFamily::uniform: return 0.5 * (u + 1.0);
        case KernelFamily::triangular:
            return u <= 0.0 ? 0.5 * (1.0 + u) * (1.0 + u) : 1.0 - 0.5 * (1.0 - u) * (1.0 - u);
        case KernelFamily::quartic: {
            const double u3 = u * u * u;
            return 0.5 + 0.9375 * (u - 2.0 * u3 / 3.0 + u3 * u * u / 5.0);
        }
    }
    return 0.0;
}

std::pair<std::size_t, std::size_t> kernel_support(const std::vector<double>& points, double t, double h)
{
    const auto lo = std::lower_bound(points.begin(), points.end(), t - h);
    const auto hi = std::upper_bound(lo, points.end(), t + h);
    return {static_cast<std::size_t>(lo - points.begin()), static_cast<std::size_t>(hi - points.begin())};
}

WeightWindow normalized_weights(const KernelSpec& spec, const std::vector<double>& points, double step, double t)
{
    spec.validate();
    if (!(step > 0.0)) throw InvalidArgument("normalized_weights: grid step must be positive");
    const double h = spec.bandwidth;
    const auto [lo, hi] = kernel_support(points, t, h);
    WeightWindow w;
    w.first = lo;
    w.weights.resize(hi - lo);
    double total = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
        const double v = kernel_eval(spec.family, (points[k] - t) / h);
        w.weights[k - lo] = v;
        total += v;
    }
    if (!(total > 0.0)) {
        throw InvalidArgument("normalized_weights: no grid point within bandwidth of t=" + std::to_string(t));
    }
    const double scale = 1.0 / (step * total);
    for (double& v : w.weights) v *= scale;
    return w;
}

WeightWindow normalized_weights(const KernelSpec& spec, const TimeGrid& grid, double t)
{
    return normalized_weights(spec, grid.points, grid.step(), t);
}

Vector normalized_weights_dense(const KernelSpec& spec, const TimeGrid& grid, double t)
{
    const WeightWindow w = normalized_weights(spec, grid, t);
    Vector dense = Vector::Zero(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t j = 0; j < w.size(); ++j) dense(static_cast<Eigen::Index>(w.first + j)) = w.weights[j];
    return dense;
}

WeightWindow filter_weights(const KernelSpec& spec, const std::vector<double>& points,
                            const std::vector<double>& gaps, double step, double tau, double horizon,
                            FilterNormalization normalization)
{
    spec.validate();
    if (!gaps.empty() && gaps.size() != points.size()) {
        throw InvalidArgument("filter_weights: gaps and points differ in length");
    }
    const double b = spec.bandwidth;
    const auto [lo, hi] = kernel_support(points, tau, b);
    WeightWindow w;
    w.first = lo;
    w.weights.resize(hi - lo);
    double total = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
        const double g = gaps.empty() ? step : gaps[k];
        const double v = kernel_eval(spec.family, (points[k] - tau) / b) * g;
        w.weights[k - lo] = v;
        total += v;
    }
    if (!(total > 0.0)) {
        throw InvalidArgument("filter_weights: empty filter window at tau=" + std::to_string(tau));
    }
    double scale = 1.0 / total;
    if (normalization == FilterNormalization::closed_form_integral) {
        const double mass = kernel_cdf(spec.family, (horizon - tau) / b) - kernel_cdf(spec.family, -tau / b);
        if (!(mass > 0.0)) throw InvalidArgument("filter_weights: filter has no mass on [0, T]");
        scale = 1.0 / (b * mass);
    }
    for (double& v : w.weights) v *= scale;
    return w;
}

}  // namespace spotvol
