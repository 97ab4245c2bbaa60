#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include "nlcoef/error.hpp"
#include "nlcoef/interpolation.hpp"

namespace nlcoef {

using ScalarFn = std::function<double(double)>;

inline ScalarFn constant_fn(double value) {
  return [value](double) { return value; };
}

/// Diffusion coefficient a(tau) represented by values at uniform knots on
/// J = [j_lo, j_hi] and prescribed exterior functions a_le (below J) and
/// a_ri (above J).
///
/// Inside J the knots are joined by a monotone-safe C1 cubic. On
/// [j_lo - w, j_lo] and [j_hi, j_hi + w] (w = blend_width) the interior is
/// extended linearly and cross-faded into the exterior with a cosine taper
/// whose derivative vanishes at both ends, which keeps the whole function
/// C1. With w = 0 the exterior takes over directly at the ends of J.
///
/// Every evaluation is clamped from below at a_floor.
class CoefficientFn {
public:
  static constexpr double kDefaultFloor = 1e-3;

  CoefficientFn(double j_lo, double j_hi, std::vector<double> knot_values, ScalarFn a_le, ScalarFn a_ri,
                double blend_width = 0.0, double a_floor = kDefaultFloor)
      : j_lo_(j_lo),
        j_hi_(j_hi),
        blend_(blend_width),
        floor_(a_floor),
        a_le_(std::move(a_le)),
        a_ri_(std::move(a_ri)) {
    require(j_lo < j_hi, ErrorCode::InvalidArgument, "CoefficientFn: j_lo must be < j_hi");
    require(knot_values.size() >= 2, ErrorCode::InvalidArgument, "CoefficientFn: need at least 2 knots");
    require(blend_width >= 0.0, ErrorCode::InvalidArgument, "CoefficientFn: blend_width must be >= 0");
    require(a_floor > 0.0, ErrorCode::InvalidArgument, "CoefficientFn: a_floor must be positive");
    require(static_cast<bool>(a_le_) && static_cast<bool>(a_ri_), ErrorCode::InvalidArgument,
            "CoefficientFn: exterior functions required");
    for (double& v : knot_values) {
      require(std::isfinite(v), ErrorCode::InvalidArgument, "CoefficientFn: non-finite knot value");
      if (v < floor_) {
        v = floor_;
        ++clamped_;
      }
    }
    const std::size_t n = knot_values.size();
    std::vector<double> knots(n);
    const double h = (j_hi - j_lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) knots[i] = i + 1 == n ? j_hi : j_lo + static_cast<double>(i) * h;
    interior_ = MonotoneCubic(std::move(knots), std::move(knot_values));
  }

  /// Samples f at n_knots uniform knots on [j_lo, j_hi].
  static CoefficientFn sample(const ScalarFn& f, double j_lo, double j_hi, std::size_t n_knots, ScalarFn a_le,
                              ScalarFn a_ri, double blend_width = 0.0, double a_floor = kDefaultFloor) {
    require(n_knots >= 2, ErrorCode::InvalidArgument, "CoefficientFn::sample: need at least 2 knots");
    std::vector<double> v(n_knots);
    const double h = (j_hi - j_lo) / static_cast<double>(n_knots - 1);
    for (std::size_t i = 0; i < n_knots; ++i)
      v[i] = f(i + 1 == n_knots ? j_hi : j_lo + static_cast<double>(i) * h);
    return {j_lo, j_hi, std::move(v), std::move(a_le), std::move(a_ri), blend_width, a_floor};
  }

  static CoefficientFn constant(double value, double j_lo, double j_hi, std::size_t n_knots,
                                double a_floor = kDefaultFloor) {
    return sample(constant_fn(value), j_lo, j_hi, n_knots, constant_fn(value), constant_fn(value), 0.0, a_floor);
  }

  /// Same exterior, blend and floor, new knot values.
  CoefficientFn with_values(std::vector<double> knot_values) const {
    return {j_lo_, j_hi_, std::move(knot_values), a_le_, a_ri_, blend_, floor_};
  }

  double operator()(double tau) const { return std::max(floor_, raw(tau)); }

  double derivative(double tau) const {
    if (raw(tau) < floor_) return 0.0;
    if (tau >= j_lo_ && tau <= j_hi_) return interior_.derivative(tau);
    if (tau < j_lo_) return exterior_derivative(tau, j_lo_ - blend_, a_le_, false);
    return exterior_derivative(tau, j_hi_ + blend_, a_ri_, true);
  }

  double j_lo() const { return j_lo_; }
  double j_hi() const { return j_hi_; }
  double blend_width() const { return blend_; }
  double a_floor() const { return floor_; }
  std::size_t n_knots() const { return interior_.x().size(); }
  double knot_spacing() const { return (j_hi_ - j_lo_) / static_cast<double>(n_knots() - 1); }
  const std::vector<double>& knots() const { return interior_.x(); }
  const std::vector<double>& values() const { return interior_.y(); }
  /// Number of knot values raised to a_floor at construction.
  std::size_t clamped_count() const { return clamped_; }
  const ScalarFn& a_le() const { return a_le_; }
  const ScalarFn& a_ri() const { return a_ri_; }

private:
  double raw(double tau) const {
    if (tau >= j_lo_ && tau <= j_hi_) return interior_(tau);
    if (tau < j_lo_) {
      if (tau <= j_lo_ - blend_) return a_le_(tau);
      const double s = taper((tau - (j_lo_ - blend_)) / blend_);
      return (1.0 - s) * a_le_(tau) + s * interior_(tau);
    }
    if (tau >= j_hi_ + blend_) return a_ri_(tau);
    const double s = taper(((j_hi_ + blend_) - tau) / blend_);
    return (1.0 - s) * a_ri_(tau) + s * interior_(tau);
  }

  // Blend zone derivative. `edge` is the outer end of the zone; `upper`
  // selects the side above J.
  double exterior_derivative(double tau, double edge, const ScalarFn& ext, bool upper) const {
    const double dext = numeric_derivative(ext, tau);
    if ((!upper && tau <= edge) || (upper && tau >= edge)) return dext;
    const double z = upper ? (edge - tau) / blend_ : (tau - edge) / blend_;
    const double s = taper(z);
    const double ds = (upper ? -1.0 : 1.0) * taper_slope(z) / blend_;
    return (1.0 - s) * dext + s * interior_.derivative(tau) + ds * (interior_(tau) - ext(tau));
  }

  static double taper(double z) { return 0.5 * (1.0 - std::cos(std::numbers::pi * z)); }
  static double taper_slope(double z) { return 0.5 * std::numbers::pi * std::sin(std::numbers::pi * z); }
  static double numeric_derivative(const ScalarFn& f, double tau) {
    const double h = 1e-6 * std::max(1.0, std::abs(tau));
    return (f(tau + h) - f(tau - h)) / (2.0 * h);
  }

  double j_lo_;
  double j_hi_;
  double blend_;
  double floor_;
  ScalarFn a_le_;
  ScalarFn a_ri_;
  MonotoneCubic interior_;
  std::size_t clamped_ = 0;
};

inline double evaluate_coefficient(const CoefficientFn& c, double tau) { return c(tau); }
inline double coefficient_derivative(const CoefficientFn& c, double tau) { return c.derivative(tau); }

}  // namespace nlcoef
