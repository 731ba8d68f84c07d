#pragma once

#include <heavytail/error.hpp>
#include <heavytail/spd.hpp>
#include <heavytail/tyler.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace heavytail {

namespace detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.size() - start : comma - start)));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

inline bool parse_double(std::string_view field, double& value)
{
    if (field.empty())
        return false;
    if (field.front() == '+')
        field.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    return ec == std::errc() && ptr == field.data() + field.size();
}

} // namespace detail

/**
 * Parses comma separated numbers, one observation per line. A first line
 * that does not parse as numbers is taken as a header. Blank lines are
 * skipped; every data line must have the same field count and only finite
 * values. Positions in errors are 1-based file lines and columns.
 */
inline Matrix parse_csv_matrix(std::string_view text)
{
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    std::size_t width = 0;
    bool first_content = true;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        const std::string_view raw = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        std::string_view line = detail::trim(raw);
        if (line_no == 1 && line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF")
            line.remove_prefix(3);
        if (line.empty())
            continue;

        const auto fields = detail::split_fields(line);
        std::vector<double> values(fields.size());
        bool numeric = true;
        std::size_t bad_col = 0;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (!detail::parse_double(fields[c], values[c])) {
                numeric = false;
                bad_col = c + 1;
                break;
            }
        }
        if (!numeric) {
            if (first_content) {
                first_content = false;
                continue; // header
            }
            throw ParseError(line_no, bad_col, "cannot parse '" + std::string(fields[bad_col - 1]) + "' as a number");
        }
        first_content = false;
        for (std::size_t c = 0; c < values.size(); ++c)
            if (!std::isfinite(values[c]))
                throw ParseError(line_no, c + 1, "non-finite value");
        if (width == 0)
            width = values.size();
        else if (values.size() != width)
            throw ParseError(line_no, std::min(values.size(), width) + 1,
                             "expected " + std::to_string(width) + " fields, found " + std::to_string(values.size()));
        rows.push_back(std::move(values));
    }
    if (rows.empty())
        throw ParseError(0, 0, "no numeric rows");

    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return out;
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError(0, 0, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline DataMatrix load_csv(const std::string& path) { return DataMatrix(parse_csv_matrix(read_file(path))); }

/// p-by-p SPD matrix stored as CSV.
inline SpdMatrix load_spd_file(const std::string& path) { return SpdMatrix(parse_csv_matrix(read_file(path))); }

/// Shortest text that reads back to the same double; "inf"/"-inf"/"nan" otherwise.
inline std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline std::string to_csv(const Matrix& m)
{
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j)
                out += ',';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

} // namespace heavytail
