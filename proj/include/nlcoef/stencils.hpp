#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nlcoef/error.hpp"

namespace nlcoef::stencil {

// Second-order one-sided first derivative at the left end (forward) and
// right end (backward) of a uniformly spaced series.
inline double first_forward(std::span<const double> v, double h) {
  return (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
}
inline double first_backward(std::span<const double> v, double h) {
  const std::size_t n = v.size();
  return (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
}

// Second-order one-sided second derivative (four points).
inline double second_forward(std::span<const double> v, double h) {
  return (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h);
}
inline double second_backward(std::span<const double> v, double h) {
  const std::size_t n = v.size();
  return (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / (h * h);
}

/// Central first differences, second-order one-sided at the ends.
inline std::vector<double> first_derivative(std::span<const double> v, double h) {
  require(v.size() >= 3, ErrorCode::InvalidArgument, "first_derivative: need at least 3 points");
  const std::size_t n = v.size();
  std::vector<double> d(n);
  d[0] = first_forward(v, h);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
  d[n - 1] = first_backward(v, h);
  return d;
}

/// Central second differences, second-order one-sided (four point) at the ends.
inline std::vector<double> second_derivative(std::span<const double> v, double h) {
  require(v.size() >= 4, ErrorCode::InvalidArgument, "second_derivative: need at least 4 points");
  const std::size_t n = v.size();
  std::vector<double> d(n);
  d[0] = second_forward(v, h);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
  d[n - 1] = second_backward(v, h);
  return d;
}

}  // namespace nlcoef::stencil
