#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlcoef/data_pipeline.hpp"
#include "nlcoef/forward_solver.hpp"
#include "nlcoef/iteration.hpp"
#include "nlcoef/recon_common.hpp"

namespace nlcoef {

enum class TraceScheme { A, B, C };

inline const char* to_string(TraceScheme s) {
  switch (s) {
    case TraceScheme::A: return "A";
    case TraceScheme::B: return "B";
    case TraceScheme::C: return "C";
  }
  return "?";
}

/// Reconstruction of a from h(t) = u(x0, t) at a boundary node x0 carrying
/// an impedance condition. The observation must live on the time grid of
/// `spec`.
struct TimeTraceProblem {
  ProblemSpec spec;
  ObservationRecord observation;
  double x0 = 1.0;
  Side side = Side::Right;
  std::optional<Anchor> anchor;  // needed by schemes A and B
  RangeInterval J;
  CoefficientLayout layout;
  double kappa_u = 1e-8;     // lower bound for |u_x(x0, t)|, t > 0
  double flux_floor = 1e-8;  // lower bound for |du/dnu(x0, t)|, t > 0
  double range_tol = 0.02;
  std::optional<RangeInterval> solution_range;  // defaults to the range of u0

  static TimeTraceProblem make(ProblemSpec spec, ObservationRecord obs, CoefficientLayout layout = {},
                               std::optional<double> user_anchor = std::nullopt, double flux_floor = 1e-8) {
    require(obs.kind == ObservationKind::TimeTrace && obs.x0.has_value(), ErrorCode::InvalidArgument,
            "TimeTraceProblem: observation is not a time trace");
    const std::size_t nt = spec.times.n_levels();
    require(obs.coordinates.size() == nt && obs.smoothed.size() == nt && obs.d1.size() == nt,
            ErrorCode::TraceMismatch, "TimeTraceProblem: observation must be smoothed on the time grid");
    for (std::size_t n = 0; n < nt; ++n)
      require(std::abs(obs.coordinates[n] - spec.times.time(n)) <= 1e-9 * (1.0 + spec.times.t_final),
              ErrorCode::TraceMismatch, "TimeTraceProblem: observation times differ from the time grid");
    invert_trace(obs);

    TimeTraceProblem p;
    p.x0 = *obs.x0;
    p.side = boundary_side(spec.grid, p.x0);
    const BoundaryCondition& bc = spec.boundary(p.side);
    require(bc.is_impedance(), ErrorCode::BadSensor, "TimeTraceProblem: sensor end must carry an impedance condition");
    p.flux_floor = flux_floor;
    const double h0 = obs.smoothed.front();
    const double dn0 = detail::outward_normal_derivative(spec.u0, spec.grid.dx(), p.side);
    if (user_anchor) {
      p.anchor = Anchor{*user_anchor, h0, AnchorSource::UserSupplied};
    } else if (std::abs(dn0) >= flux_floor) {
      p.anchor = Anchor{(bc.data(0.0) - bc.gamma * h0) / dn0, h0, AnchorSource::BoundaryFlux};
    }
    p.J = obs.range();
    p.spec = std::move(spec);
    p.observation = std::move(obs);
    p.layout = std::move(layout);
    return p;
  }

  const Anchor& require_anchor() const {
    require(anchor.has_value(), ErrorCode::MissingAnchor,
            "du/dnu vanishes at the sensor at t = 0; schemes A and B need a user-supplied anchor value");
    return *anchor;
  }
};

/// First and second x-derivatives of u at a boundary node by one-sided
/// second-order stencils.
struct SensorDerivatives {
  std::vector<double> ux;
  std::vector<double> uxx;
  std::vector<double> normal;  // du/dnu, outward
};

inline SensorDerivatives sensor_derivatives(const ForwardSolution& sol, Side side) {
  const SpaceTimeField& f = sol.field;
  const double dx = f.grid().dx();
  SensorDerivatives d;
  for (std::size_t n = 0; n < f.times().n_levels(); ++n) {
    const auto u = f.level(n);
    const double ux = side == Side::Left ? stencil::first_forward(u, dx) : stencil::first_backward(u, dx);
    d.ux.push_back(ux);
    d.uxx.push_back(side == Side::Left ? stencil::second_forward(u, dx) : stencil::second_backward(u, dx));
    d.normal.push_back(side == Side::Left ? -ux : ux);
  }
  return d;
}

// Low-level kernels on explicit arrays over the trace samples n = 0..N
// (tau_n = h(t_n)). Node 0 is excluded from the division whenever its
// gradient vanishes (u0 flat at the sensor); it then borrows the integrand
// of node 1.

/// a' + (lap u / |grad u|^2) a = (h' - r) / |grad u|^2, a(tau_0) = a0.
inline std::vector<double> scheme_a_values(std::span<const double> tau, std::span<const double> times,
                                           std::span<const double> ux, std::span<const double> uxx,
                                           std::span<const double> rhs, double a0, double kappa) {
  const std::size_t n = tau.size();
  std::vector<double> p(n), f(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double g2 = ux[k] * ux[k];
    if (k == 0 && g2 < kappa * kappa) continue;
    require(g2 >= kappa * kappa, ErrorCode::DegenerateGradient,
            "|grad u_k| below kappa at the sensor, t = " + std::to_string(times[k]));
    p[k] = uxx[k] / g2;
    f[k] = rhs[k] / g2;
  }
  if (ux[0] * ux[0] < kappa * kappa) p[0] = p[1], f[0] = f[1];
  return solve_linear_ode(tau, p, f, a0);
}

/// a = a0 + int [((gamma sigma - b)/dnu u) lap u + h' - r] / |grad u|^2 dsigma.
inline std::vector<double> scheme_b_values(std::span<const double> tau, std::span<const double> times,
                                           std::span<const double> ux, std::span<const double> uxx,
                                           std::span<const double> dnu, std::span<const double> flux_data,
                                           double gamma, std::span<const double> rhs, double a0, double kappa,
                                           double flux_floor) {
  const std::size_t n = tau.size();
  std::vector<double> f(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double g2 = ux[k] * ux[k];
    if (k == 0 && (g2 < kappa * kappa || std::abs(dnu[k]) < flux_floor)) continue;
    require(g2 >= kappa * kappa, ErrorCode::DegenerateGradient,
            "|grad u_k| below kappa at the sensor, t = " + std::to_string(times[k]));
    require(std::abs(dnu[k]) >= flux_floor, ErrorCode::DegenerateFlux,
            "du_k/dnu below flux_floor at the sensor, t = " + std::to_string(times[k]));
    f[k] = ((gamma * tau[k] - flux_data[k]) / dnu[k] * uxx[k] + rhs[k]) / g2;
  }
  if (ux[0] * ux[0] < kappa * kappa || std::abs(dnu[0]) < flux_floor) f[0] = f[1];
  auto F = cumulative_trapezoid(tau, f);
  for (double& v : F) v += a0;
  return F;
}

/// a(tau_n) = (b(x0, t_n) - gamma tau_n) / dnu u^D(x0, t_n). Returns the
/// indices that were evaluated (node 0 is dropped if its flux vanishes).
inline std::pair<std::vector<std::size_t>, std::vector<double>> scheme_c_values(std::span<const double> tau,
                                                                                std::span<const double> times,
                                                                                std::span<const double> dnu,
                                                                                std::span<const double> flux_data,
                                                                                double gamma, double flux_floor) {
  std::vector<std::size_t> idx;
  std::vector<double> vals;
  for (std::size_t k = 0; k < tau.size(); ++k) {
    if (k == 0 && std::abs(dnu[k]) < flux_floor) continue;
    require(std::abs(dnu[k]) >= flux_floor, ErrorCode::DegenerateFlux,
            "du^D/dnu = " + std::to_string(dnu[k]) + " below flux_floor at the sensor, t = " + std::to_string(times[k]));
    idx.push_back(k);
    vals.push_back((flux_data[k] - gamma * tau[k]) / dnu[k]);
  }
  return {std::move(idx), std::move(vals)};
}

namespace detail {

inline std::vector<double> trace_rhs(const TimeTraceProblem& p) {
  const auto& h = p.observation.smoothed;
  std::vector<double> rhs(h.size());
  for (std::size_t n = 0; n < h.size(); ++n)
    rhs[n] = p.observation.d1[n] - p.spec.source(p.x0, p.spec.times.time(n), h[n]);
  return rhs;
}

inline std::vector<double> sensor_flux_data(const TimeTraceProblem& p) {
  std::vector<double> b(p.spec.times.n_levels());
  for (std::size_t n = 0; n < b.size(); ++n) b[n] = p.spec.boundary(p.side).data(p.spec.times.time(n));
  return b;
}

}  // namespace detail

inline CoefficientFn update_scheme_A(const TimeTraceProblem& p, const CoefficientFn& a_k, const SolverConfig& cfg = {}) {
  invert_trace(p.observation);
  const Anchor& anchor = p.require_anchor();
  const auto sol = solve_forward(p.spec.with_coefficient(as_scalar(a_k)), cfg);
  const auto d = sensor_derivatives(sol, p.side);
  auto vals = scheme_a_values(p.observation.smoothed, p.observation.coordinates, d.ux, d.uxx, detail::trace_rhs(p),
                              anchor.value, p.kappa_u);
  return coefficient_from_scatter(p.observation.smoothed, std::move(vals), p.J, p.layout);
}

inline CoefficientFn update_scheme_B(const TimeTraceProblem& p, const CoefficientFn& a_k, const SolverConfig& cfg = {}) {
  invert_trace(p.observation);
  const Anchor& anchor = p.require_anchor();
  const auto sol = solve_forward(p.spec.with_coefficient(as_scalar(a_k)), cfg);
  const auto d = sensor_derivatives(sol, p.side);
  auto vals = scheme_b_values(p.observation.smoothed, p.observation.coordinates, d.ux, d.uxx, d.normal,
                              detail::sensor_flux_data(p), p.spec.boundary(p.side).gamma, detail::trace_rhs(p),
                              anchor.value, p.kappa_u, p.flux_floor);
  return coefficient_from_scatter(p.observation.smoothed, std::move(vals), p.J, p.layout);
}

/// Boundary-flux quotient on the Dirichlet re-solve u^D_k (h imposed at x0,
/// the other end keeps its original condition).
inline CoefficientFn update_scheme_C(const TimeTraceProblem& p, const CoefficientFn& a_k, const SolverConfig& cfg = {}) {
  invert_trace(p.observation);
  const auto sol = solve_forward_dirichlet_from_trace(p.spec.with_coefficient(as_scalar(a_k)), p.observation, cfg);
  const auto& dnu = sol.boundary(p.side).normal_derivative;
  auto [idx, vals] = scheme_c_values(p.observation.smoothed, p.observation.coordinates, dnu, detail::sensor_flux_data(p),
                                     p.spec.boundary(p.side).gamma, p.flux_floor);
  for (double v : vals) require(std::isfinite(v), ErrorCode::DegenerateFlux, "scheme C produced a non-finite value");
  std::vector<double> tau;
  for (std::size_t k : idx) tau.push_back(p.observation.smoothed[k]);
  return coefficient_from_scatter(std::move(tau), std::move(vals), p.J, p.layout);
}

inline CoefficientFn update_time_trace(const TimeTraceProblem& p, TraceScheme s, const CoefficientFn& a_k,
                                       const SolverConfig& cfg = {}) {
  switch (s) {
    case TraceScheme::A: return update_scheme_A(p, a_k, cfg);
    case TraceScheme::B: return update_scheme_B(p, a_k, cfg);
    case TraceScheme::C: return update_scheme_C(p, a_k, cfg);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown scheme");
}

inline void check_time_trace_range(const TimeTraceProblem& p) {
  const RangeInterval sol = p.solution_range.value_or(value_range(p.spec.u0));
  require_range(p.J, sol, p.range_tol, p.observation.noise_level);
}

inline IterationTrace iterate_time_trace(const TimeTraceProblem& p, TraceScheme s, const CoefficientFn& a0,
                                         const IterationSettings& settings = {}, const SolverConfig& cfg = {}) {
  check_time_trace_range(p);
  return run_fixed_point(
      a0, [&](const CoefficientFn& a) { return update_time_trace(p, s, a, cfg); }, p.J, settings);
}

}  // namespace nlcoef
