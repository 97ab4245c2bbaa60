#pragma once

// Reference experiments shared by the reconstruction tests.

#include <cmath>

#include "nlcoef/data_pipeline.hpp"
#include "nlcoef/forward_solver.hpp"

namespace nlcoef::testing {

inline double reference_truth(double u) { return 1.0 + u * u / 2.0 + 0.3 * std::sin(2.0 * u); }

// Final-time design: both ends impedance with gamma = 0, u0 = 1, heat drawn
// at x = 0 and supplied at x = 1 through q(t) = q0 (1 - e^{-t / tr}).
inline ProblemSpec final_time_design(std::size_t n_cells, std::size_t n_steps, ScalarFn a, double q0 = 3.6,
                                     double tr = 0.5) {
  ProblemSpec p;
  p.grid = SpatialGrid(0.0, 1.0, n_cells);
  p.times = TimeGrid(1.0, n_steps);
  p.coefficient = std::move(a);
  auto q = [=](double t) { return q0 * (1.0 - std::exp(-t / tr)); };
  p.left = BoundaryCondition::impedance(0.0, [=](double t) { return -q(t); });
  p.right = BoundaryCondition::impedance(0.0, q);
  p.u0.assign(p.grid.n_nodes(), 1.0);
  return p;
}

// Time-trace design: u = 0 at x = 0, flux b(t) = b0 a(b0) + q0 (1 - e^{-(t/tr)^2})
// into x = 1, starting from the near-steady profile u0 = b0 x.
inline ProblemSpec time_trace_design(std::size_t n_cells, std::size_t n_steps, ScalarFn a, double q0 = 3.0,
                                     double tr = 0.5, double b0 = 0.02) {
  ProblemSpec p;
  p.grid = SpatialGrid(0.0, 1.0, n_cells);
  p.times = TimeGrid(1.0, n_steps);
  const double flux0 = b0 * a(b0);
  p.coefficient = std::move(a);
  p.left = BoundaryCondition::dirichlet([](double) { return 0.0; });
  p.right = BoundaryCondition::impedance(0.0, [=](double t) { return flux0 + q0 * (1.0 - std::exp(-(t / tr) * (t / tr))); });
  p.u0.resize(p.grid.n_nodes());
  for (std::size_t i = 0; i < p.u0.size(); ++i) p.u0[i] = b0 * p.grid.node(i);
  return p;
}

// Noise-free record sampled at every node of a twice finer solve.
inline ObservationRecord exact_record(const ProblemSpec& fine, const ProblemSpec& work, ObservationKind kind,
                                      std::optional<double> x0 = std::nullopt) {
  const auto sol = solve_forward(fine);
  const std::size_t n =
      kind == ObservationKind::FinalTime ? work.grid.n_nodes() : work.times.n_levels();
  const auto raw = sample_observation(sol, kind, n, x0);
  const auto coords = kind == ObservationKind::FinalTime ? work.grid.nodes() : work.times.times();
  return build_record(kind, raw, raw, coords, 0.0, {}, x0);
}

}  // namespace nlcoef::testing
