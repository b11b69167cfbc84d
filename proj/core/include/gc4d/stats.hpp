#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace gc4d {

/// Median of a copy of the values; mean of the two middle elements for even
/// counts. Returns NaN on empty input.
inline double median(std::span<const double> values) {
  if (values.empty()) return std::nan("");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

/// Left-to-right summation, so the result does not depend on thread count.
inline double mean(std::span<const double> values) {
  if (values.empty()) return std::nan("");
  double sum = 0.0;
  for (double x : values) sum += x;
  return sum / static_cast<double>(values.size());
}

}  // namespace gc4d
