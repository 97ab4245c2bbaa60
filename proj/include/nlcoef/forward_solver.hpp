#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nlcoef/banded.hpp"
#include "nlcoef/error.hpp"
#include "nlcoef/grid.hpp"
#include "nlcoef/interpolation.hpp"
#include "nlcoef/observation.hpp"
#include "nlcoef/problem.hpp"
#include "nlcoef/stencils.hpp"

namespace nlcoef {

struct SolverConfig {
  double picard_tol = 1e-10;  // relative to max(1, |u|_inf)
  int picard_max_iter = 50;
  double theta = 0.5;  // 0.5 = Crank-Nicolson
  // Leading steps taken as two implicit Euler half-steps each (Rannacher
  // start), which damps the oscillatory CN response to rough data.
  std::size_t startup_steps = 0;
  // Newton iteration (tridiagonal Jacobian, a' by central differences)
  // for steps where Picard does not converge.
  bool newton_fallback = true;
  int newton_max_iter = 30;
  double a_floor = CoefficientFn::kDefaultFloor;

  void validate() const {
    require(picard_tol > 0.0, ErrorCode::InvalidArgument, "SolverConfig: picard_tol must be positive");
    require(picard_max_iter >= 1, ErrorCode::InvalidArgument, "SolverConfig: picard_max_iter must be >= 1");
    require(theta >= 0.0 && theta <= 1.0, ErrorCode::InvalidArgument, "SolverConfig: theta must lie in [0, 1]");
  }
};

/// Per-time-level boundary quantities at one end: the flux a(u) du/dnu and
/// the normal derivative du/dnu (outward normal), the latter from a
/// second-order one-sided difference.
struct BoundaryTrace {
  std::vector<double> flux;
  std::vector<double> normal_derivative;
};

struct ForwardSolution {
  SpaceTimeField field;
  BoundaryTrace left;
  BoundaryTrace right;
  std::vector<int> picard_iterations;  // one entry per time step

  const BoundaryTrace& boundary(Side s) const { return s == Side::Left ? left : right; }
};

namespace detail {

inline double outward_normal_derivative(std::span<const double> u, double dx, Side side) {
  return side == Side::Left ? -stencil::first_forward(u, dx) : stencil::first_backward(u, dx);
}

inline void record_boundary(const ProblemSpec& spec, const SolverConfig& cfg, std::span<const double> u, double t,
                            ForwardSolution& sol) {
  const double dx = spec.grid.dx();
  for (Side side : {Side::Left, Side::Right}) {
    const BoundaryCondition& bc = spec.boundary(side);
    const double ub = side == Side::Left ? u.front() : u.back();
    const double dn = outward_normal_derivative(u, dx, side);
    const double flux = bc.is_impedance() ? bc.data(t) - bc.gamma * ub
                                          : std::max(cfg.a_floor, spec.coefficient(ub)) * dn;
    BoundaryTrace& tr = side == Side::Left ? sol.left : sol.right;
    tr.flux.push_back(flux);
    tr.normal_derivative.push_back(dn);
  }
}

}  // namespace detail

/// Solves u_t - (a(u) u_x)_x = r(x, t, u) by theta-weighted vertex-centred
/// finite volumes. Face coefficients use a at the mean of the adjacent nodal
/// values; impedance ends use half-cell balances with the prescribed flux,
/// Dirichlet ends are imposed strongly. Each step closes the nonlinearity by
/// Picard iteration on a(u) and r(., ., u).
inline ForwardSolution solve_forward(const ProblemSpec& spec, const SolverConfig& cfg = {}) {
  spec.validate();
  cfg.validate();
  require(spec.grid.n_nodes() >= 4, ErrorCode::InvalidArgument, "solve_forward: need at least 4 nodes");

  const std::size_t n_nodes = spec.grid.n_nodes();
  const std::size_t last = n_nodes - 1;
  const double dx = spec.grid.dx();
  const double idx2 = 1.0 / (dx * dx);
  const std::vector<double> xs = spec.grid.nodes();

  ForwardSolution sol{SpaceTimeField(spec.grid, spec.times), {}, {}, {}};
  sol.picard_iterations.reserve(spec.times.n_steps);

  auto coef = [&](double u) { return std::max(cfg.a_floor, spec.coefficient(u)); };

  std::vector<double> u_old(spec.u0);
  std::copy(u_old.begin(), u_old.end(), sol.field.level(0).begin());
  detail::record_boundary(spec, cfg, u_old, 0.0, sol);

  std::vector<double> face(n_nodes - 1), lower(n_nodes), diag(n_nodes), upper(n_nodes), rhs(n_nodes),
      explicit_part(n_nodes), src(n_nodes);

  // One Newton update of u (in place) for the theta-step ending at t1,
  // using explicit_part from the current step. Returns max |delta|.
  auto dcoef = [&](double u) {
    const double eps = 1e-7 * (1.0 + std::abs(u));
    return (coef(u + eps) - coef(u - eps)) / (2.0 * eps);
  };
  auto dsource = [&](double x, double t, double u) {
    const double eps = 1e-7 * (1.0 + std::abs(u));
    return (spec.source(x, t, u + eps) - spec.source(x, t, u - eps)) / (2.0 * eps);
  };
  std::vector<double> flux(n_nodes - 1), dflux_l(n_nodes - 1), dflux_r(n_nodes - 1), res(n_nodes);
  auto newton_step = [&](const std::vector<double>& u_old, std::vector<double>& u, double t1, double theta,
                         double dt) {
    // F_i = a(m_i) (u_{i+1} - u_i), m_i the face mean; dflux_l/r = dF_i/du_i, dF_i/du_{i+1}.
    for (std::size_t i = 0; i + 1 < n_nodes; ++i) {
      const double m = 0.5 * (u[i] + u[i + 1]);
      const double a = coef(m), da = dcoef(m), du = u[i + 1] - u[i];
      flux[i] = a * du;
      dflux_l[i] = 0.5 * da * du - a;
      dflux_r[i] = 0.5 * da * du + a;
    }
    for (std::size_t i = 0; i < n_nodes; ++i) {
      const double r = spec.source(xs[i], t1, u[i]);
      const double dr = dsource(xs[i], t1, u[i]);
      if (i == 0 && !spec.left.is_impedance()) {
        res[0] = u[0] - spec.left.data(t1);
        lower[0] = upper[0] = 0.0;
        diag[0] = 1.0;
      } else if (i == last && !spec.right.is_impedance()) {
        res[last] = u[last] - spec.right.data(t1);
        lower[last] = upper[last] = 0.0;
        diag[last] = 1.0;
      } else if (i == 0) {
        const auto& bc = spec.left;
        res[0] = (u[0] - u_old[0]) / dt - explicit_part[0] -
                 theta * (2.0 * flux[0] * idx2 + 2.0 * (bc.data(t1) - bc.gamma * u[0]) / dx + r);
        lower[0] = 0.0;
        diag[0] = 1.0 / dt - theta * (2.0 * idx2 * dflux_l[0] - 2.0 * bc.gamma / dx + dr);
        upper[0] = -theta * 2.0 * idx2 * dflux_r[0];
      } else if (i == last) {
        const auto& bc = spec.right;
        res[last] = (u[last] - u_old[last]) / dt - explicit_part[last] -
                    theta * (-2.0 * flux[last - 1] * idx2 + 2.0 * (bc.data(t1) - bc.gamma * u[last]) / dx + r);
        upper[last] = 0.0;
        lower[last] = theta * 2.0 * idx2 * dflux_l[last - 1];
        diag[last] = 1.0 / dt + theta * (2.0 * idx2 * dflux_r[last - 1] + 2.0 * bc.gamma / dx - dr);
      } else {
        res[i] = (u[i] - u_old[i]) / dt - explicit_part[i] - theta * ((flux[i] - flux[i - 1]) * idx2 + r);
        lower[i] = theta * idx2 * dflux_l[i - 1];
        diag[i] = 1.0 / dt - theta * ((dflux_l[i] - dflux_r[i - 1]) * idx2 + dr);
        upper[i] = -theta * idx2 * dflux_r[i];
      }
      res[i] = -res[i];
    }
    const auto delta = solve_tridiagonal(lower, diag, upper, res);
    double change = 0.0;
    for (std::size_t i = 0; i < n_nodes; ++i) {
      u[i] += delta[i];
      change = std::max(change, std::abs(delta[i]));
    }
    return change;
  };

  // One theta-step from (t0, u_old) to t1; returns the nonlinear iteration count.
  auto advance = [&](std::vector<double>& u_old, double t0, double t1, double theta, std::size_t step) {
    const double dt = t1 - t0;

    // Explicit (old level) contribution, weighted by 1 - theta.
    for (std::size_t i = 0; i + 1 < n_nodes; ++i) face[i] = coef(0.5 * (u_old[i] + u_old[i + 1]));
    for (std::size_t i = 0; i < n_nodes; ++i) {
      if (theta == 1.0) {
        explicit_part[i] = 0.0;
        continue;
      }
      const double r = spec.source(xs[i], t0, u_old[i]);
      double div;
      if (i == 0) {
        div = 2.0 * face[0] * (u_old[1] - u_old[0]) * idx2;
        if (spec.left.is_impedance())
          div += 2.0 * (spec.left.data(t0) - spec.left.gamma * u_old[0]) / dx;
      } else if (i == last) {
        div = -2.0 * face[last - 1] * (u_old[last] - u_old[last - 1]) * idx2;
        if (spec.right.is_impedance())
          div += 2.0 * (spec.right.data(t0) - spec.right.gamma * u_old[last]) / dx;
      } else {
        div = (face[i] * (u_old[i + 1] - u_old[i]) - face[i - 1] * (u_old[i] - u_old[i - 1])) * idx2;
      }
      explicit_part[i] = (1.0 - theta) * (div + r);
    }

    std::vector<double> u_star(u_old);
    double change = 0.0;
    int iter = 0;
    bool converged = false;
    while (iter < cfg.picard_max_iter) {
      ++iter;
      for (std::size_t i = 0; i + 1 < n_nodes; ++i) face[i] = coef(0.5 * (u_star[i] + u_star[i + 1]));
      for (std::size_t i = 0; i < n_nodes; ++i) src[i] = spec.source(xs[i], t1, u_star[i]);

      for (std::size_t i = 1; i < last; ++i) {
        lower[i] = -theta * face[i - 1] * idx2;
        upper[i] = -theta * face[i] * idx2;
        diag[i] = 1.0 / dt + theta * (face[i - 1] + face[i]) * idx2;
        rhs[i] = u_old[i] / dt + explicit_part[i] + theta * src[i];
      }
      if (spec.left.is_impedance()) {
        lower[0] = 0.0;
        upper[0] = -theta * 2.0 * face[0] * idx2;
        diag[0] = 1.0 / dt + theta * (2.0 * face[0] * idx2 + 2.0 * spec.left.gamma / dx);
        rhs[0] = u_old[0] / dt + explicit_part[0] + theta * (2.0 * spec.left.data(t1) / dx + src[0]);
      } else {
        lower[0] = upper[0] = 0.0;
        diag[0] = 1.0;
        rhs[0] = spec.left.data(t1);
      }
      if (spec.right.is_impedance()) {
        upper[last] = 0.0;
        lower[last] = -theta * 2.0 * face[last - 1] * idx2;
        diag[last] = 1.0 / dt + theta * (2.0 * face[last - 1] * idx2 + 2.0 * spec.right.gamma / dx);
        rhs[last] = u_old[last] / dt + explicit_part[last] + theta * (2.0 * spec.right.data(t1) / dx + src[last]);
      } else {
        lower[last] = upper[last] = 0.0;
        diag[last] = 1.0;
        rhs[last] = spec.right.data(t1);
      }

      std::vector<double> u_new = solve_tridiagonal(lower, diag, upper, rhs);
      change = 0.0;
      double scale = 1.0;
      for (std::size_t i = 0; i < n_nodes; ++i) {
        if (!std::isfinite(u_new[i]))
          throw Error(ErrorCode::BlowUp,
                      "non-finite value at step " + std::to_string(step) + ", node " + std::to_string(i));
        change = std::max(change, std::abs(u_new[i] - u_star[i]));
        scale = std::max(scale, std::abs(u_new[i]));
      }
      u_star = std::move(u_new);
      if (change < cfg.picard_tol * scale) {
        converged = true;
        break;
      }
    }
    if (!converged && cfg.newton_fallback) {
      u_star = u_old;
      for (int k = 0; k < cfg.newton_max_iter && !converged; ++k) {
        ++iter;
        const double nchange = newton_step(u_old, u_star, t1, theta, dt);
        double scale = 1.0;
        for (std::size_t i = 0; i < n_nodes; ++i) {
          if (!std::isfinite(u_star[i]))
            throw Error(ErrorCode::BlowUp,
                        "non-finite value at step " + std::to_string(step) + ", node " + std::to_string(i));
          scale = std::max(scale, std::abs(u_star[i]));
        }
        converged = nchange < cfg.picard_tol * scale;
      }
      if (!converged) change = std::numeric_limits<double>::quiet_NaN();
    }
    if (!converged)
      throw Error(ErrorCode::NonConvergence, "nonlinear iteration did not converge at step " + std::to_string(step) +
                                                 " (last change " + std::to_string(change) + " after " +
                                                 std::to_string(iter) + " iterations)");
    u_old = std::move(u_star);
    return iter;
  };

  for (std::size_t n = 0; n < spec.times.n_steps; ++n) {
    const double t0 = spec.times.time(n);
    const double t1 = spec.times.time(n + 1);
    int iters = 0;
    if (n < cfg.startup_steps && cfg.theta < 1.0) {
      const double tm = 0.5 * (t0 + t1);
      iters += advance(u_old, t0, tm, 1.0, n + 1);
      iters += advance(u_old, tm, t1, 1.0, n + 1);
    } else {
      iters = advance(u_old, t0, t1, cfg.theta, n + 1);
    }
    sol.picard_iterations.push_back(iters);
    std::copy(u_old.begin(), u_old.end(), sol.field.level(n + 1).begin());
    detail::record_boundary(spec, cfg, u_old, t1, sol);
  }
  return sol;
}

/// Second-order backward difference of u in time at t = T, per node.
inline std::vector<double> time_derivative_at_final(const ForwardSolution& sol) {
  const TimeGrid& tg = sol.field.times();
  require(tg.n_steps >= 2, ErrorCode::InvalidArgument, "time_derivative_at_final: need at least 2 steps");
  const std::size_t N = tg.n_steps;
  const double dt = tg.dt();
  const auto uN = sol.field.level(N);
  const auto u1 = sol.field.level(N - 1);
  const auto u2 = sol.field.level(N - 2);
  std::vector<double> d(uN.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = (3.0 * uN[i] - 4.0 * u1[i] + u2[i]) / (2.0 * dt);
  return d;
}

/// Re-solves the forward problem with the observed time trace imposed as
/// Dirichlet data at the sensor end x0; the opposite end keeps its
/// condition from `spec`. The normal derivative at x0 is available from the
/// returned solution's boundary trace.
inline ForwardSolution solve_forward_dirichlet_from_trace(const ProblemSpec& spec, std::span<const double> trace_times,
                                                          std::span<const double> trace_values, double x0,
                                                          const SolverConfig& cfg = {}) {
  const Side side = boundary_side(spec.grid, x0);
  require(trace_times.size() == trace_values.size() && trace_times.size() >= 2, ErrorCode::TraceMismatch,
          "trace has inconsistent or too few samples");
  const double tol = 1e-9 * spec.times.t_final;
  require(trace_times.front() <= tol && trace_times.back() >= spec.times.t_final - tol, ErrorCode::TraceMismatch,
          "trace covers [" + std::to_string(trace_times.front()) + ", " + std::to_string(trace_times.back()) +
              "], solve needs [0, " + std::to_string(spec.times.t_final) + "]");
  for (std::size_t i = 1; i < trace_times.size(); ++i)
    require(trace_times[i] > trace_times[i - 1], ErrorCode::TraceMismatch, "trace times not increasing");

  ProblemSpec dspec = spec;
  // noisy traces need not agree with u0 at the sensor
  (side == Side::Left ? dspec.u0.front() : dspec.u0.back()) = trace_values.front();
  std::vector<double> ts(trace_times.begin(), trace_times.end());
  std::vector<double> vs(trace_values.begin(), trace_values.end());
  dspec.boundary(side) =
      BoundaryCondition::dirichlet([ts = std::move(ts), vs = std::move(vs)](double t) { return linear_interpolate(ts, vs, t); });
  return solve_forward(dspec, cfg);
}

inline ForwardSolution solve_forward_dirichlet_from_trace(const ProblemSpec& spec, const ObservationRecord& trace,
                                                          const SolverConfig& cfg = {}) {
  require(trace.kind == ObservationKind::TimeTrace && trace.x0.has_value(), ErrorCode::TraceMismatch,
          "record is not a time trace");
  return solve_forward_dirichlet_from_trace(spec, trace.coordinates, trace.smoothed, *trace.x0, cfg);
}

}  // namespace nlcoef
