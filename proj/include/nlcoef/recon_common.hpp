#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlcoef/coefficient.hpp"
#include "nlcoef/error.hpp"
#include "nlcoef/interpolation.hpp"
#include "nlcoef/observation.hpp"

namespace nlcoef {

/// How reconstructed coefficients are represented: knot count on J,
/// exterior functions, blend width and floor. An unset exterior function
/// continues the end knot value as a constant.
struct CoefficientLayout {
  std::size_t n_knots = 101;
  ScalarFn a_le;
  ScalarFn a_ri;
  double blend_width = 0.0;
  double a_floor = CoefficientFn::kDefaultFloor;

  CoefficientFn build(const RangeInterval& J, std::vector<double> knot_values) const {
    require(knot_values.size() == n_knots, ErrorCode::InvalidArgument, "CoefficientLayout: wrong knot count");
    ScalarFn le = a_le ? a_le : constant_fn(std::max(a_floor, knot_values.front()));
    ScalarFn ri = a_ri ? a_ri : constant_fn(std::max(a_floor, knot_values.back()));
    return {J.u_lo, J.u_hi, std::move(knot_values), std::move(le), std::move(ri), blend_width, a_floor};
  }
  CoefficientFn sample(const ScalarFn& f, const RangeInterval& J) const {
    std::vector<double> v(n_knots);
    const double h = J.width() / static_cast<double>(n_knots - 1);
    for (std::size_t i = 0; i < n_knots; ++i)
      v[i] = f(i + 1 == n_knots ? J.u_hi : J.u_lo + static_cast<double>(i) * h);
    return build(J, std::move(v));
  }
  CoefficientFn constant(double value, const RangeInterval& J) const { return sample(constant_fn(value), J); }
};

enum class AnchorSource { BoundaryFlux, UserSupplied };

/// Value a0 of the coefficient at tau0.
struct Anchor {
  double value = 1.0;
  double tau = 0.0;
  AnchorSource source = AnchorSource::UserSupplied;
};

inline const char* to_string(AnchorSource s) { return s == AnchorSource::BoundaryFlux ? "boundary-flux" : "user"; }

/// Composite trapezoid running integral on a (possibly nonuniform,
/// possibly decreasing) abscissa.
inline std::vector<double> cumulative_trapezoid(std::span<const double> x, std::span<const double> f) {
  require(x.size() == f.size() && !x.empty(), ErrorCode::InvalidArgument, "cumulative_trapezoid: bad sizes");
  std::vector<double> F(x.size(), 0.0);
  for (std::size_t i = 1; i < x.size(); ++i) F[i] = F[i - 1] + 0.5 * (x[i] - x[i - 1]) * (f[i - 1] + f[i]);
  return F;
}

/// Solves a' + p a = f along tau with a(tau[0]) = a0, using the exact
/// integrating-factor recursion with trapezoid quadrature on each interval:
/// a_i = a_{i-1} e^{-dP} + dtau/2 (f_{i-1} e^{-dP} + f_i), dP = dtau (p_{i-1} + p_i)/2.
inline std::vector<double> solve_linear_ode(std::span<const double> tau, std::span<const double> p,
                                            std::span<const double> f, double a0) {
  require(tau.size() == p.size() && tau.size() == f.size() && !tau.empty(), ErrorCode::InvalidArgument,
          "solve_linear_ode: bad sizes");
  std::vector<double> a(tau.size());
  a[0] = a0;
  for (std::size_t i = 1; i < tau.size(); ++i) {
    const double dtau = tau[i] - tau[i - 1];
    const double decay = std::exp(-0.5 * dtau * (p[i - 1] + p[i]));
    a[i] = a[i - 1] * decay + 0.5 * dtau * (f[i - 1] * decay + f[i]);
  }
  return a;
}

/// Builds a coefficient on J from values at scattered, strictly monotone
/// image points tau_i. Knots outside the scatter hull take the nearest end
/// value.
inline CoefficientFn coefficient_from_scatter(std::vector<double> tau, std::vector<double> vals, const RangeInterval& J,
                                              const CoefficientLayout& layout) {
  require(tau.size() == vals.size() && tau.size() >= 2, ErrorCode::InvalidArgument,
          "coefficient_from_scatter: need matching tau/value arrays");
  if (tau.back() < tau.front()) {
    std::reverse(tau.begin(), tau.end());
    std::reverse(vals.begin(), vals.end());
  }
  for (std::size_t i = 1; i < tau.size(); ++i)
    require(tau[i] > tau[i - 1], ErrorCode::NonMonotone,
            "image points not strictly monotone at index " + std::to_string(i));
  for (double v : vals)
    require(std::isfinite(v), ErrorCode::NonConvergence, "reconstruction produced a non-finite value");
  const MonotoneCubic interp(tau, vals);
  const double h = J.width() / static_cast<double>(layout.n_knots - 1);
  std::vector<double> knots(layout.n_knots);
  for (std::size_t i = 0; i < layout.n_knots; ++i) {
    const double s = i + 1 == layout.n_knots ? J.u_hi : J.u_lo + static_cast<double>(i) * h;
    knots[i] = interp(std::clamp(s, tau.front(), tau.back()));
  }
  return layout.build(J, std::move(knots));
}

/// Allowed excursion of the solution range beyond J: a fraction of |J|
/// plus the data noise amplitude.
inline double range_tolerance(const RangeInterval& J, double range_tol, double noise_level_percent) {
  return range_tol * J.width() + noise_level_percent / 100.0 * std::max(std::abs(J.u_lo), std::abs(J.u_hi));
}

inline void require_range(const RangeInterval& J, const RangeInterval& sol_range, double range_tol,
                          double noise_level_percent) {
  const double margin = std::min(sol_range.u_lo - J.u_lo, J.u_hi - sol_range.u_hi);
  const double tol = range_tolerance(J, range_tol, noise_level_percent);
  require(margin >= -tol, ErrorCode::RangeViolation,
          "solution range [" + std::to_string(sol_range.u_lo) + ", " + std::to_string(sol_range.u_hi) +
              "] not covered by data range [" + std::to_string(J.u_lo) + ", " + std::to_string(J.u_hi) +
              "] (margin " + std::to_string(margin) + ", tolerance " + std::to_string(tol) + ")");
}

inline RangeInterval value_range(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return {*lo, *hi};
}

}  // namespace nlcoef
