#pragma once

#include "spotvol/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace spotvol {

/// Shortest-safe decimal form with 17 significant digits.
std::string format_double(double v);

/// Header `p,<p>,times,<m>`, then per time a `t,<value>` line and p rows of p values.
void write_matrix_series(std::ostream& out, const MatrixSeries& series);
MatrixSeries read_matrix_series(std::istream& in);
void write_matrix_series_file(const std::string& path, const MatrixSeries& series);
MatrixSeries read_matrix_series_file(const std::string& path);

/// Writes a matrix as plain CSV rows.
void write_matrix_csv(std::ostream& out, const Matrix& m);

/// `section.key = value` lines; `#` starts a comment. Duplicate keys and
/// malformed lines throw InvalidArgument with the line number.
std::map<std::string, std::string> parse_key_values(std::istream& in);
std::map<std::string, std::string> parse_key_values_file(const std::string& path);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);
std::string read_file(const std::string& path);

}  // namespace spotvol
