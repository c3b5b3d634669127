#pragma once

#include "spotvol/common.hpp"
#include "spotvol/panel.hpp"

#include <string>
#include <vector>

namespace spotvol {

enum class KernelFamily { epanechnikov, uniform, triangular, quartic };

/// Compact-support kernel on [-1, 1] with a bandwidth in years.
struct KernelSpec {
    KernelFamily family = KernelFamily::epanechnikov;
    double bandwidth = 1.0;

    void validate() const;
};

KernelFamily parse_kernel_family(const std::string& name);
std::string to_string(KernelFamily family);

/// K(u); zero outside [-1, 1].
double kernel_eval(KernelFamily family, double u);
inline double kernel_eval(const KernelSpec& spec, double u) { return kernel_eval(spec.family, u); }

/// Integral of K over [-1, u], clamped to [0, 1].
double kernel_cdf(KernelFamily family, double u);

/// Nonzero stretch of a weight vector: weights[j] belongs to grid index first + j.
struct WeightWindow {
    std::size_t first = 0;
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
    std::size_t last() const { return first + weights.size(); }
};

/// Indices [lo, hi) of sorted `points` with |points[k] - t| <= h.
std::pair<std::size_t, std::size_t> kernel_support(const std::vector<double>& points, double t, double h);

/// w_k = K_h(t_k - t) / (step * sum_l K_h(t_l - t)) over the points inside the
/// kernel window, so that step * sum(w) == 1. Throws InvalidArgument when every
/// kernel value is zero.
WeightWindow normalized_weights(const KernelSpec& spec, const std::vector<double>& points, double step, double t);
WeightWindow normalized_weights(const KernelSpec& spec, const TimeGrid& grid, double t);

/// Dense length-grid.size() version of normalized_weights.
Vector normalized_weights_dense(const KernelSpec& spec, const TimeGrid& grid, double t);

enum class FilterNormalization {
    riemann_sum,          ///< divide by the discrete sum, so a constant input is reproduced exactly
    closed_form_integral  ///< divide by the integral of L_b over [0, T]
};

/// Pre-averaging filter weights a_k at `tau`, ready to be applied as sum_k a_k Z_k.
///
/// `gaps` holds per-point spacings (empty means the uniform `step`). With
/// riemann_sum, a_k = L(u_k) g_k / sum_l L(u_l) g_l. With closed_form_integral,
/// a_k = g_k L_b(t_k - tau) / int_0^T L_b(s - tau) ds.
WeightWindow filter_weights(const KernelSpec& spec, const std::vector<double>& points,
                            const std::vector<double>& gaps, double step, double tau, double horizon,
                            FilterNormalization normalization);

}  // namespace spotvol
