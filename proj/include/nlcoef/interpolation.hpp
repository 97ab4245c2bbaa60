#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "nlcoef/banded.hpp"
#include "nlcoef/error.hpp"

namespace nlcoef {

namespace detail {

inline void check_abscissae(std::span<const double> x, std::span<const double> y, std::size_t min_points,
                            const char* who) {
  require(x.size() == y.size(), ErrorCode::InvalidArgument, std::string(who) + ": size mismatch");
  require(x.size() >= min_points, ErrorCode::InvalidArgument, std::string(who) + ": too few points");
  for (std::size_t i = 1; i < x.size(); ++i)
    require(x[i] > x[i - 1], ErrorCode::InvalidArgument,
            std::string(who) + ": abscissae must be strictly increasing");
}

// Index of the interval [x[k], x[k+1]] containing t, clamped to the table.
inline std::size_t locate(std::span<const double> x, double t) {
  if (t <= x.front()) return 0;
  if (t >= x.back()) return x.size() - 2;
  auto it = std::upper_bound(x.begin(), x.end(), t);
  return static_cast<std::size_t>(it - x.begin()) - 1;
}

}  // namespace detail

/// Piecewise-linear interpolation with constant extension outside the table.
inline double linear_interpolate(std::span<const double> x, std::span<const double> y, double t) {
  if (x.size() == 1) return y[0];
  if (t <= x.front()) return y.front();
  if (t >= x.back()) return y.back();
  const std::size_t k = detail::locate(x, t);
  const double w = (t - x[k]) / (x[k + 1] - x[k]);
  return (1.0 - w) * y[k] + w * y[k + 1];
}

/// C1 cubic Hermite interpolant with second-order (three-point) slope
/// estimates, limited by the Fritsch-Carlson/Hyman filter so that the
/// interpolant never overshoots monotone data. Away from data extrema the
/// limiter is inactive and the interpolant is third-order accurate.
///
/// Outside [x_front, x_back] the interpolant is extended linearly with the
/// end slope.
class MonotoneCubic {
public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    detail::check_abscissae(x_, y_, 2, "MonotoneCubic");
    build_slopes();
  }

  double operator()(double t) const {
    if (t <= x_.front()) return y_.front() + m_.front() * (t - x_.front());
    if (t >= x_.back()) return y_.back() + m_.back() * (t - x_.back());
    const std::size_t k = detail::locate(x_, t);
    return hermite(k, t);
  }

  double derivative(double t) const {
    if (t <= x_.front()) return m_.front();
    if (t >= x_.back()) return m_.back();
    const std::size_t k = detail::locate(x_, t);
    const double h = x_[k + 1] - x_[k];
    const double s = (t - x_[k]) / h;
    const double dh00 = 6.0 * s * s - 6.0 * s;
    const double dh10 = 3.0 * s * s - 4.0 * s + 1.0;
    const double dh01 = -dh00;
    const double dh11 = 3.0 * s * s - 2.0 * s;
    return (dh00 * y_[k] + dh01 * y_[k + 1]) / h + dh10 * m_[k] + dh11 * m_[k + 1];
  }

  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& y() const { return y_; }
  const std::vector<double>& slopes() const { return m_; }

private:
  double hermite(std::size_t k, double t) const {
    const double h = x_[k + 1] - x_[k];
    const double s = (t - x_[k]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    return h00 * y_[k] + h10 * h * m_[k] + h01 * y_[k + 1] + h11 * h * m_[k + 1];
  }

  void build_slopes() {
    const std::size_t n = x_.size();
    m_.assign(n, 0.0);
    if (n == 2) {
      m_[0] = m_[1] = (y_[1] - y_[0]) / (x_[1] - x_[0]);
      return;
    }
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    for (std::size_t i = 1; i + 1 < n; ++i)
      m_[i] = (h[i] * delta[i - 1] + h[i - 1] * delta[i]) / (h[i - 1] + h[i]);
    m_[0] = ((2.0 * h[0] + h[1]) * delta[0] - h[0] * delta[1]) / (h[0] + h[1]);
    m_[n - 1] = ((2.0 * h[n - 2] + h[n - 3]) * delta[n - 2] - h[n - 2] * delta[n - 3]) /
                (h[n - 2] + h[n - 3]);

    // Hyman filter: slopes bounded by three times the adjacent secants,
    // zero at data extrema and flat segments.
    auto limit = [](double m, double dl, double dr) {
      if (dl * dr <= 0.0) return 0.0;
      const double sgn = dl > 0.0 ? 1.0 : -1.0;
      const double bound = 3.0 * std::min(std::abs(dl), std::abs(dr));
      return sgn * std::min(std::max(0.0, sgn * m), bound);
    };
    for (std::size_t i = 1; i + 1 < n; ++i) m_[i] = limit(m_[i], delta[i - 1], delta[i]);
    m_[0] = limit(m_[0], delta[0], delta[0]);
    m_[n - 1] = limit(m_[n - 1], delta[n - 2], delta[n - 2]);
  }

  std::vector<double> x_, y_, m_;
};

enum class SplineEnd { Natural, NotAKnot };

/// Interpolating cubic spline. NotAKnot (the default, needs 4 points, else
/// falls back to Natural) keeps full accuracy up to the ends; Natural sets
/// the second derivative to zero there.
class CubicSpline {
public:
  CubicSpline(std::vector<double> x, std::vector<double> y, SplineEnd end = SplineEnd::NotAKnot)
      : x_(std::move(x)), y_(std::move(y)) {
    detail::check_abscissae(x_, y_, 2, "CubicSpline");
    const std::size_t n = x_.size();
    m2_.assign(n, 0.0);
    if (n < 3) return;
    const bool not_a_knot = end == SplineEnd::NotAKnot && n >= 4;
    // Unknowns are the second derivatives M_1..M_{n-2}; with not-a-knot the
    // end values M_0, M_{n-1} are eliminated through third-derivative
    // continuity at x_1 and x_{n-2}.
    const std::size_t k = n - 2;
    std::vector<double> lo(k), di(k), up(k), rhs(k);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t i = j + 1;
      const double hl = x_[i] - x_[i - 1];
      const double hr = x_[i + 1] - x_[i];
      lo[j] = hl / 6.0;
      di[j] = (hl + hr) / 3.0;
      up[j] = hr / 6.0;
      rhs[j] = (y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl;
    }
    const double h0 = x_[1] - x_[0], h1 = x_[2] - x_[1];
    const double ha = x_[n - 1] - x_[n - 2], hb = x_[n - 2] - x_[n - 3];
    if (not_a_knot) {
      // M_0 = ((h0 + h1) M_1 - h0 M_2) / h1
      di[0] += h0 * (h0 + h1) / (6.0 * h1);
      up[0] -= h0 * h0 / (6.0 * h1);
      // M_{n-1} = ((ha + hb) M_{n-2} - ha M_{n-3}) / hb
      di[k - 1] += ha * (ha + hb) / (6.0 * hb);
      lo[k - 1] -= ha * ha / (6.0 * hb);
    }
    const auto sol = solve_tridiagonal(lo, di, up, rhs);
    for (std::size_t j = 0; j < k; ++j) m2_[j + 1] = sol[j];
    if (not_a_knot) {
      m2_[0] = ((h0 + h1) * m2_[1] - h0 * m2_[2]) / h1;
      m2_[n - 1] = ((ha + hb) * m2_[n - 2] - ha * m2_[n - 3]) / hb;
    }
  }

  double operator()(double t) const {
    const std::size_t k = detail::locate(x_, t);
    const double h = x_[k + 1] - x_[k];
    const double a = (x_[k + 1] - t) / h;
    const double b = (t - x_[k]) / h;
    return a * y_[k] + b * y_[k + 1] +
           ((a * a * a - a) * m2_[k] + (b * b * b - b) * m2_[k + 1]) * h * h / 6.0;
  }

  const std::vector<double>& second_derivatives() const { return m2_; }

private:
  std::vector<double> x_, y_, m2_;
};

}  // namespace nlcoef
