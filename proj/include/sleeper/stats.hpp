#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace sleeper::stats {

// Linear-interpolation percentile on an ascending-sorted sample, rank q*(n-1)
// with q in [0, 100].
inline double percentile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("percentile of empty sample");
    const double rank = q / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// Same definition as percentile_sorted, via selection (reorders `values`).
inline double percentile_inplace(std::vector<double>& values, double q) {
    if (values.empty()) throw std::invalid_argument("percentile of empty sample");
    const double rank = q / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const double frac = rank - static_cast<double>(lo);
    auto nth = values.begin() + static_cast<std::ptrdiff_t>(lo);
    std::nth_element(values.begin(), nth, values.end());
    const double v_lo = *nth;
    if (frac == 0.0 || lo + 1 >= values.size()) return v_lo;
    const double v_hi = *std::min_element(nth + 1, values.end());
    return v_lo + frac * (v_hi - v_lo);
}

inline double percentile(std::vector<double> values, double q) { return percentile_inplace(values, q); }

inline double median(std::vector<double> values) { return percentile(std::move(values), 50.0); }

inline double mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace sleeper::stats
