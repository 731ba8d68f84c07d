#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace heavytail {

/// Five-number summary plus mean. Quartiles follow the inclusive-median rule:
/// for odd counts the median belongs to both halves.
struct Summary {
    std::size_t count = 0;
    double mean = std::numeric_limits<double>::quiet_NaN();
    double median = std::numeric_limits<double>::quiet_NaN();
    double q1 = std::numeric_limits<double>::quiet_NaN();
    double q3 = std::numeric_limits<double>::quiet_NaN();
    double min = std::numeric_limits<double>::quiet_NaN();
    double max = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline double sorted_median(std::span<const double> v)
{
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace detail

inline double median(std::vector<double> values)
{
    if (values.empty())
        return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    return detail::sorted_median(values);
}

inline Summary summarize(std::vector<double> values)
{
    Summary s;
    s.count = values.size();
    if (values.empty())
        return s;
    std::sort(values.begin(), values.end());
    const std::span<const double> all(values);
    const std::size_t n = values.size();
    const std::size_t half = (n + 1) / 2;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    s.median = detail::sorted_median(all);
    s.q1 = detail::sorted_median(all.first(half));
    s.q3 = detail::sorted_median(all.last(half));
    s.min = values.front();
    s.max = values.back();
    return s;
}

/// Mean of (x - truth)^2.
inline double mean_squared_error(std::span<const double> values, double truth)
{
    if (values.empty())
        return std::numeric_limits<double>::quiet_NaN();
    double acc = 0.0;
    for (double v : values)
        acc += (v - truth) * (v - truth);
    return acc / static_cast<double>(values.size());
}

} // namespace heavytail
