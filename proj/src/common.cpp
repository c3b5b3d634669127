#include "spotvol/common.hpp"

#include <iostream>
#include <mutex>

namespace spotvol {

namespace {

std::mutex& sink_mutex()
{
    static std::mutex m;
    return m;
}

WarningSink& sink_ref()
{
    static WarningSink sink = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
    return sink;
}

}  // namespace

void MatrixSeries::validate(double tol) const
{
    if (times.size() != matrices.size()) {
        throw InvalidArgument("MatrixSeries: times and matrices differ in length");
    }
    for (std::size_t i = 0; i < matrices.size(); ++i) {
        const Matrix& m = matrices[i];
        if (m.rows() != m.cols() || m.rows() != dim()) {
            throw InvalidArgument("MatrixSeries: inconsistent dimensions at index " + std::to_string(i));
        }
        if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol) {
            throw InvalidArgument("MatrixSeries: matrix at t=" + std::to_string(times[i]) +
                                  " is not symmetric");
        }
    }
    if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != dim()) {
        throw InvalidArgument("MatrixSeries: label count does not match dimension");
    }
}

void symmetrize_from_lower(Matrix& m)
{
    for (Eigen::Index j = 1; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < j; ++i) m(i, j) = m(j, i);
    }
}

void symmetrize(Matrix& m)
{
    m = (0.5 * (m + m.transpose())).eval();
}

WarningSink set_warning_sink(WarningSink sink)
{
    std::lock_guard lock(sink_mutex());
    WarningSink previous = std::move(sink_ref());
    sink_ref() = std::move(sink);
    return previous;
}

void warn(const std::string& message)
{
    std::lock_guard lock(sink_mutex());
    if (sink_ref()) sink_ref()(message);
}

}  // namespace spotvol
