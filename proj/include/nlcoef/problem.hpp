#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "nlcoef/coefficient.hpp"
#include "nlcoef/error.hpp"
#include "nlcoef/grid.hpp"

namespace nlcoef {

using TimeFn = std::function<double(double t)>;
using SourceFn = std::function<double(double x, double t, double u)>;

enum class BoundaryKind { Impedance, Dirichlet };
enum class Side { Left, Right };

/// Boundary condition at one end of the interval. Impedance means
/// a(u) du/dnu + gamma u = b(t) with the outward normal; Dirichlet means
/// u = d(t). `data` holds b or d accordingly.
struct BoundaryCondition {
  BoundaryKind kind = BoundaryKind::Impedance;
  double gamma = 0.0;
  TimeFn data = [](double) { return 0.0; };

  static BoundaryCondition impedance(double gamma, TimeFn b) {
    require(gamma >= 0.0, ErrorCode::InvalidArgument, "impedance gamma must be >= 0");
    return {BoundaryKind::Impedance, gamma, std::move(b)};
  }
  static BoundaryCondition dirichlet(TimeFn d) { return {BoundaryKind::Dirichlet, 0.0, std::move(d)}; }

  bool is_impedance() const { return kind == BoundaryKind::Impedance; }
};

/// Full description of a forward problem u_t - (a(u) u_x)_x = r(x, t, u)
/// on a 1-D interval.
struct ProblemSpec {
  SpatialGrid grid;
  TimeGrid times;
  ScalarFn coefficient;
  SourceFn source = [](double, double, double) { return 0.0; };
  BoundaryCondition left;
  BoundaryCondition right;
  std::vector<double> u0;

  const BoundaryCondition& boundary(Side s) const { return s == Side::Left ? left : right; }
  BoundaryCondition& boundary(Side s) { return s == Side::Left ? left : right; }

  ProblemSpec with_coefficient(ScalarFn a) const {
    ProblemSpec copy = *this;
    copy.coefficient = std::move(a);
    return copy;
  }

  void validate(double dirichlet_tol = 1e-8) const {
    grid.validate();
    times.validate();
    require(static_cast<bool>(coefficient), ErrorCode::InvalidArgument, "ProblemSpec: coefficient not set");
    require(static_cast<bool>(source), ErrorCode::InvalidArgument, "ProblemSpec: source not set");
    require(static_cast<bool>(left.data) && static_cast<bool>(right.data), ErrorCode::InvalidArgument,
            "ProblemSpec: boundary data not set");
    require(u0.size() == grid.n_nodes(), ErrorCode::InvalidArgument,
            "ProblemSpec: u0 has " + std::to_string(u0.size()) + " values, grid has " +
                std::to_string(grid.n_nodes()) + " nodes");
    for (double v : u0) require(std::isfinite(v), ErrorCode::InvalidArgument, "ProblemSpec: u0 not finite");
    if (!left.is_impedance() && !right.is_impedance()) {
      require(std::abs(left.data(0.0) - u0.front()) <= dirichlet_tol &&
                  std::abs(right.data(0.0) - u0.back()) <= dirichlet_tol,
              ErrorCode::InvalidArgument, "ProblemSpec: Dirichlet data inconsistent with u0 at t = 0");
    }
  }
};

/// Node index of a sensor location; throws BadSensor if x0 is not a node.
inline std::size_t node_index(const SpatialGrid& grid, double x0) {
  const double pos = (x0 - grid.x_lo) / grid.dx();
  const double idx = std::round(pos);
  require(idx >= 0.0 && idx <= static_cast<double>(grid.n_cells) && std::abs(pos - idx) < 1e-8,
          ErrorCode::BadSensor, "sensor location " + std::to_string(x0) + " is not a grid node");
  return static_cast<std::size_t>(idx);
}

/// Boundary side of a sensor location; throws BadSensor for interior points.
inline Side boundary_side(const SpatialGrid& grid, double x0) {
  const std::size_t i = node_index(grid, x0);
  if (i == 0) return Side::Left;
  if (i == grid.n_cells) return Side::Right;
  throw Error(ErrorCode::BadSensor, "sensor location " + std::to_string(x0) + " is not on the boundary");
}

/// Data along a parametrized observation curve x(sigma), sigma in [0, 1]:
/// g = u(x(sigma), T), |grad g|^2, lap g and the right-hand side
/// D_t u - r evaluated on the curve.
struct CurveSamples {
  std::vector<double> sigma;
  std::vector<double> g_vals;
  std::vector<double> grad_norm_sq;
  std::vector<double> laplacian_g;
  std::vector<double> rhs_vals;

  std::size_t size() const { return sigma.size(); }

  /// Checks sizes, strict monotonicity of g along the curve and
  /// |grad g|^2 >= kappa^2.
  void validate(double kappa) const {
    const std::size_t n = sigma.size();
    require(n >= 2 && g_vals.size() == n && grad_norm_sq.size() == n && laplacian_g.size() == n &&
                rhs_vals.size() == n,
            ErrorCode::InvalidArgument, "CurveSamples: inconsistent sizes");
    const bool increasing = g_vals[1] > g_vals[0];
    for (std::size_t i = 1; i < n; ++i) {
      const bool ok = increasing ? g_vals[i] > g_vals[i - 1] : g_vals[i] < g_vals[i - 1];
      require(ok, ErrorCode::NonMonotone,
              "CurveSamples: g not strictly monotone along the curve at index " + std::to_string(i));
    }
    for (std::size_t i = 0; i < n; ++i)
      require(grad_norm_sq[i] >= kappa * kappa, ErrorCode::DegenerateGradient,
              "CurveSamples: |grad g|^2 below kappa^2 at sigma = " + std::to_string(sigma[i]));
  }
};

}  // namespace nlcoef
