#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace spotvol {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Violated precondition on user-supplied data or configuration.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A numerical step could not be completed (singular matrix, failed factorization, ...).
class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// Seconds in one trading session (6.5 hours).
inline constexpr double kSecondsPerTradingDay = 6.5 * 3600.0;
inline constexpr double kTradingDaysPerYear = 252.0;
/// One trading day expressed in years.
inline constexpr double kOneTradingDay = 1.0 / kTradingDaysPerYear;

/// A sequence of p x p matrices indexed by evaluation time.
struct MatrixSeries {
    std::vector<double> times;
    std::vector<Matrix> matrices;
    std::vector<std::string> labels;

    std::size_t size() const { return matrices.size(); }
    bool empty() const { return matrices.empty(); }
    Eigen::Index dim() const { return matrices.empty() ? 0 : matrices.front().rows(); }

    void push_back(double t, Matrix m)
    {
        times.push_back(t);
        matrices.push_back(std::move(m));
    }

    /// Throws InvalidArgument when dimensions disagree or a matrix is not symmetric
    /// within `tol` in max-norm.
    void validate(double tol = 1e-10) const;
};

/// Copies the lower triangle into the upper triangle.
void symmetrize_from_lower(Matrix& m);

/// Replaces m by (m + m^T) / 2.
void symmetrize(Matrix& m);

/// Receives warnings emitted by estimators (overlapping pseudo-grids, flagged PD searches, ...).
using WarningSink = std::function<void(const std::string&)>;

/// Installs a process-wide warning sink; the default writes to stderr. Returns the previous one.
WarningSink set_warning_sink(WarningSink sink);

void warn(const std::string& message);

}  // namespace spotvol
