#include "spotvol/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace spotvol {

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_matrix_series(std::ostream& out, const MatrixSeries& series)
{
    series.validate(std::numeric_limits<double>::infinity());
    const Eigen::Index p = series.dim();
    out << "p," << p << ",times," << series.size() << '\n';
    for (std::size_t j = 0; j < series.size(); ++j) {
        out << "t," << format_double(series.times[j]) << '\n';
        const Matrix& m = series.matrices[j];
        for (Eigen::Index i = 0; i < p; ++i) {
            for (Eigen::Index k = 0; k < p; ++k) {
                if (k) out << ',';
                out << format_double(m(i, k));
            }
            out << '\n';
        }
    }
}

namespace {

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        parts.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return parts;
}

double to_double(const std::string& s, std::size_t line)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw InvalidArgument("matrix series: line " + std::to_string(line) + ": invalid number '" + s + "'");
    }
    return v;
}

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

MatrixSeries read_matrix_series(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    auto next = [&]() {
        if (!std::getline(in, line)) throw InvalidArgument("matrix series: unexpected end of input");
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
    };
    next();
    const auto head = split(line, ',');
    if (head.size() != 4 || head[0] != "p" || head[2] != "times") {
        throw InvalidArgument("matrix series: expected header 'p,<p>,times,<m>'");
    }
    const auto p = static_cast<Eigen::Index>(to_double(head[1], line_no));
    const auto m = static_cast<std::size_t>(to_double(head[3], line_no));
    MatrixSeries series;
    for (std::size_t j = 0; j < m; ++j) {
        next();
        const auto tl = split(line, ',');
        if (tl.size() != 2 || tl[0] != "t") {
            throw InvalidArgument("matrix series: line " + std::to_string(line_no) + ": expected 't,<value>'");
        }
        const double t = to_double(tl[1], line_no);
        Matrix mat(p, p);
        for (Eigen::Index i = 0; i < p; ++i) {
            next();
            const auto row = split(line, ',');
            if (static_cast<Eigen::Index>(row.size()) != p) {
                throw InvalidArgument("matrix series: line " + std::to_string(line_no) + ": expected " +
                                      std::to_string(p) + " values");
            }
            for (Eigen::Index k = 0; k < p; ++k) mat(i, k) = to_double(row[static_cast<std::size_t>(k)], line_no);
        }
        series.push_back(t, std::move(mat));
    }
    return series;
}

void write_matrix_series_file(const std::string& path, const MatrixSeries& series)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write '" + path + "'");
    write_matrix_series(out, series);
}

MatrixSeries read_matrix_series_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open '" + path + "'");
    return read_matrix_series(in);
}

void write_matrix_csv(std::ostream& out, const Matrix& m)
{
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            if (k) out << ',';
            out << format_double(m(i, k));
        }
        out << '\n';
    }
}

std::map<std::string, std::string> parse_key_values(std::istream& in)
{
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidArgument("config line " + std::to_string(line_no) + ": expected 'section.key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto dot = key.find('.');
        if (key.empty() || dot == std::string::npos || dot == 0 || dot + 1 == key.size()) {
            throw InvalidArgument("config line " + std::to_string(line_no) + ": key '" + key +
                                  "' must have the form section.key");
        }
        if (!kv.emplace(key, value).second) {
            throw InvalidArgument("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
    }
    return kv;
}

std::map<std::string, std::string> parse_key_values_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config '" + path + "'");
    return parse_key_values(in);
}

std::uint64_t fnv1a64(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace spotvol
