#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "nlcoef/data_pipeline.hpp"
#include "nlcoef/forward_solver.hpp"
#include "nlcoef/iteration.hpp"
#include "nlcoef/recon_common.hpp"

namespace nlcoef {

/// Reconstruction of a from g(x) = u(x, T). The coefficient inside `spec`
/// is replaced by each iterate; the observation must live on the spatial
/// grid of `spec`.
struct FinalTimeProblem {
  ProblemSpec spec;
  ObservationRecord observation;
  Anchor anchor;
  Side flux_side = Side::Left;  // impedance end the 1-D formula is anchored at
  RangeInterval J;
  CoefficientLayout layout;
  double kappa = 1e-8;  // lower bound for |g'|
  double range_tol = 0.02;
  std::optional<RangeInterval> solution_range;  // defaults to the range of u0

  static FinalTimeProblem make(ProblemSpec spec, ObservationRecord obs, CoefficientLayout layout = {},
                               std::optional<double> user_anchor = std::nullopt) {
    require(obs.kind == ObservationKind::FinalTime, ErrorCode::InvalidArgument,
            "FinalTimeProblem: observation is not final-time data");
    const std::size_t n = spec.grid.n_nodes();
    require(obs.coordinates.size() == n && obs.smoothed.size() == n && obs.d1.size() == n && obs.d2.size() == n,
            ErrorCode::InvalidArgument, "FinalTimeProblem: observation must be smoothed on the spatial grid");
    for (std::size_t i = 0; i < n; ++i)
      require(std::abs(obs.coordinates[i] - spec.grid.node(i)) <= 1e-9 * (1.0 + std::abs(spec.grid.node(i))),
              ErrorCode::InvalidArgument, "FinalTimeProblem: observation grid differs from the spatial grid");
    require(spec.left.is_impedance() || spec.right.is_impedance(), ErrorCode::MissingAnchor,
            "FinalTimeProblem: the 1-D update needs an impedance boundary");

    FinalTimeProblem p;
    p.flux_side = spec.left.is_impedance() ? Side::Left : Side::Right;
    const BoundaryCondition& bc = spec.boundary(p.flux_side);
    const std::size_t ib = p.flux_side == Side::Left ? 0 : n - 1;
    const double g_b = obs.smoothed[ib];
    const double dn = p.flux_side == Side::Left ? -obs.d1[ib] : obs.d1[ib];
    const double T = spec.times.t_final;
    if (std::abs(dn) >= p.kappa && !user_anchor) {
      p.anchor = {(bc.data(T) - bc.gamma * g_b) / dn, g_b, AnchorSource::BoundaryFlux};
    } else {
      require(user_anchor.has_value(), ErrorCode::MissingAnchor,
              "FinalTimeProblem: normal derivative of g vanishes at the flux boundary; supply the anchor value");
      p.anchor = {*user_anchor, g_b, AnchorSource::UserSupplied};
    }
    require(std::isfinite(p.anchor.value), ErrorCode::MissingAnchor, "FinalTimeProblem: anchor not finite");
    p.J = obs.range();
    require(p.J.valid(), ErrorCode::DegenerateGradient, "FinalTimeProblem: final-time data are constant");
    p.spec = std::move(spec);
    p.observation = std::move(obs);
    p.layout = std::move(layout);
    return p;
  }
};

namespace detail {

inline void check_final_gradient(const FinalTimeProblem& p) {
  const auto& gx = p.observation.d1;
  for (std::size_t i = 0; i < gx.size(); ++i)
    require(std::abs(gx[i]) >= p.kappa, ErrorCode::DegenerateGradient,
            "|g'| = " + std::to_string(std::abs(gx[i])) + " below kappa at x = " + std::to_string(p.spec.grid.node(i)));
}

// D_t u(x, T; a_k) - r(x, T, g(x)) on the spatial grid.
inline std::vector<double> final_time_rhs(const FinalTimeProblem& p, const CoefficientFn& a_k,
                                          const SolverConfig& cfg) {
  const auto sol = solve_forward(p.spec.with_coefficient(as_scalar(a_k)), cfg);
  auto rhs = time_derivative_at_final(sol);
  const double T = p.spec.times.t_final;
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= p.spec.source(p.spec.grid.node(i), T, p.observation.smoothed[i]);
  return rhs;
}

}  // namespace detail

/// One step of the 1-D final-time update: integrates the projected PDE
/// from the flux boundary, a_{k+1}(g(x)) g'(x) = (flux term) + int (u_t - r),
/// and re-indexes the result from x to tau = g(x).
inline CoefficientFn update_1d(const FinalTimeProblem& p, const CoefficientFn& a_k, const SolverConfig& cfg = {}) {
  detail::check_final_gradient(p);
  const auto rhs = detail::final_time_rhs(p, a_k, cfg);
  const auto x = p.spec.grid.nodes();
  const auto F = cumulative_trapezoid(x, rhs);
  const auto& g = p.observation.smoothed;
  const auto& gx = p.observation.d1;
  const double T = p.spec.times.t_final;
  const std::size_t n = x.size();
  std::vector<double> vals(n);
  if (p.flux_side == Side::Left) {
    const double flux0 = p.spec.left.gamma * g.front() - p.spec.left.data(T);
    for (std::size_t i = 0; i < n; ++i) vals[i] = (flux0 + F[i]) / gx[i];
  } else {
    const double flux1 = p.spec.right.data(T) - p.spec.right.gamma * g.back();
    for (std::size_t i = 0; i < n; ++i) vals[i] = (flux1 - (F[n - 1] - F[i])) / gx[i];
  }
  return coefficient_from_scatter(g, std::move(vals), p.J, p.layout);
}

/// Solution of a' |grad g|^2 + a lap g = rhs along an observation curve,
/// anchored at a(g_vals[0]) = a0, on the image points g_vals.
inline CoefficientFn update_curve(const CurveSamples& c, double a0, const CoefficientLayout& layout = {},
                                  double kappa = 1e-8, std::optional<RangeInterval> J = std::nullopt) {
  c.validate(kappa);
  const std::size_t n = c.size();
  std::vector<double> p(n), f(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = c.laplacian_g[i] / c.grad_norm_sq[i];
    f[i] = c.rhs_vals[i] / c.grad_norm_sq[i];
  }
  auto vals = solve_linear_ode(c.g_vals, p, f, a0);
  return coefficient_from_scatter(c.g_vals, std::move(vals), J.value_or(value_range(c.g_vals)), layout);
}

/// The 1-D interval as an observation curve, oriented so that the anchor
/// end comes first.
inline CurveSamples curve_from_final_time(const FinalTimeProblem& p, const CoefficientFn& a_k,
                                          const SolverConfig& cfg = {}) {
  CurveSamples c;
  c.rhs_vals = detail::final_time_rhs(p, a_k, cfg);
  c.sigma = p.spec.grid.nodes();
  c.g_vals = p.observation.smoothed;
  c.laplacian_g = p.observation.d2;
  for (double d : p.observation.d1) c.grad_norm_sq.push_back(d * d);
  if (p.flux_side == Side::Right) {
    for (auto* v : {&c.sigma, &c.g_vals, &c.grad_norm_sq, &c.laplacian_g, &c.rhs_vals})
      std::reverse(v->begin(), v->end());
  }
  return c;
}

inline void check_final_time_range(const FinalTimeProblem& p) {
  const RangeInterval sol = p.solution_range.value_or(value_range(p.spec.u0));
  require_range(p.J, sol, p.range_tol, p.observation.noise_level);
}

/// Fixed-point iteration a_{k+1} = update_1d(a_k) after the range check.
inline IterationTrace iterate_final_time(const FinalTimeProblem& p, const CoefficientFn& a0,
                                         const IterationSettings& settings = {}, const SolverConfig& cfg = {}) {
  check_final_time_range(p);
  return run_fixed_point(
      a0, [&](const CoefficientFn& a) { return update_1d(p, a, cfg); }, p.J, settings);
}

}  // namespace nlcoef
