#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "nlcoef/final_time.hpp"
#include "nlcoef/time_trace.hpp"
#include "reference.hpp"

using namespace nlcoef;
using nlcoef::testing::exact_record;
using nlcoef::testing::final_time_design;
using nlcoef::testing::reference_truth;
using nlcoef::testing::time_trace_design;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::InvalidArgument;
}

const ScalarFn kTruth = reference_truth;

FinalTimeProblem reference_final_time(std::size_t n, ScalarFn truth = kTruth) {
  const auto fine = final_time_design(2 * n, 2 * n, truth);
  const auto work = final_time_design(n, n, truth);
  return FinalTimeProblem::make(work, exact_record(fine, work, ObservationKind::FinalTime));
}

TimeTraceProblem reference_time_trace(std::size_t n, ScalarFn truth = kTruth) {
  const auto fine = time_trace_design(2 * n, 2 * n, truth);
  const auto work = time_trace_design(n, n, truth);
  CoefficientLayout layout;
  layout.a_le = truth;
  layout.a_ri = truth;
  layout.blend_width = 0.1;
  return TimeTraceProblem::make(work, exact_record(fine, work, ObservationKind::TimeTrace, 1.0), layout);
}

double sup_error(const CoefficientFn& a, const ScalarFn& truth, const RangeInterval& J) {
  return difference_norms(as_scalar(a), truth, J).linf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Shared kernels

TEST(SolveLinearOde, ConstantCoefficientsMatchClosedForm) {
  // a' + a = 2, a(0) = a0  ->  a0 e^{-tau} + 2 (1 - e^{-tau})
  const std::size_t n = 101;
  std::vector<double> tau(n), p(n, 1.0), f(n, 2.0);
  for (std::size_t i = 0; i < n; ++i) tau[i] = static_cast<double>(i) / 100.0;
  for (double a0 : {0.0, 0.5, 3.0}) {
    const auto a = solve_linear_ode(tau, p, f, a0);
    for (std::size_t i = 0; i < n; ++i) {
      const double e = std::exp(-tau[i]);
      // global error ~ dtau^2 / 12 * |f - a| * tau
      EXPECT_NEAR(a[i], a0 * e + 2.0 * (1.0 - e), 2e-5) << tau[i];
    }
  }
}

TEST(SolveLinearOde, ZeroDecayIsTrapezoidIntegral) {
  const std::vector<double> tau{0.0, 0.25, 0.5, 0.75, 1.0}, p(5, 0.0), f{1.0, 2.0, 3.0, 4.0, 5.0};
  const auto a = solve_linear_ode(tau, p, f, 1.0);
  const std::vector<double> expect{1.0, 1.375, 2.0, 2.875, 4.0};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(a[i], expect[i]);
  const auto F = cumulative_trapezoid(tau, f);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(F[i] + 1.0, expect[i]);
}

TEST(CoefficientFromScatter, ReversesDecreasingDataAndClampsOutsideHull) {
  const RangeInterval J{0.0, 1.0};
  CoefficientLayout layout;
  layout.n_knots = 11;
  const auto a = coefficient_from_scatter({0.9, 0.5, 0.1}, {1.9, 1.5, 1.1}, J, layout);
  EXPECT_NEAR(a(0.5), 1.5, 1e-14);
  EXPECT_NEAR(a(0.3), 1.3, 1e-12);
  EXPECT_NEAR(a(0.0), 1.1, 1e-14);
  EXPECT_NEAR(a(1.0), 1.9, 1e-14);
  // unset exterior: constant continuation
  EXPECT_NEAR(a(-1.0), 1.1, 1e-14);
  EXPECT_NEAR(a(2.0), 1.9, 1e-14);
}

TEST(CoefficientFromScatter, RejectsNonMonotoneImagePoints) {
  const RangeInterval J{0.0, 1.0};
  EXPECT_EQ(code_of([&] { coefficient_from_scatter({0.0, 0.5, 0.5, 1.0}, {1, 1, 1, 1}, J, {}); }),
            ErrorCode::NonMonotone);
  EXPECT_EQ(code_of([&] { coefficient_from_scatter({0.0, 0.6, 0.4, 1.0}, {1, 1, 1, 1}, J, {}); }),
            ErrorCode::NonMonotone);
}

TEST(RangeGuard, ToleranceAndViolation) {
  const RangeInterval J{0.0, 2.0};
  EXPECT_DOUBLE_EQ(range_tolerance(J, 0.02, 0.0), 0.04);
  EXPECT_DOUBLE_EQ(range_tolerance(J, 0.02, 1.0), 0.06);
  EXPECT_NO_THROW(require_range(J, {-0.03, 2.0}, 0.02, 0.0));
  EXPECT_EQ(code_of([&] { require_range(J, {0.0, 2.05}, 0.02, 0.0); }), ErrorCode::RangeViolation);
}

// ---------------------------------------------------------------------------
// Iteration driver

TEST(Norms, ConstantOnInterval) {
  const RangeInterval J{0.0, 2.0};
  const auto e = function_norms(constant_fn(3.0), J);
  EXPECT_NEAR(e.linf, 3.0, 1e-15);
  EXPECT_NEAR(e.l2, 3.0 * std::sqrt(2.0), 1e-13);
  const auto d = difference_norms([](double t) { return t; }, constant_fn(0.0), J);
  EXPECT_NEAR(d.linf, 2.0, 1e-15);
  EXPECT_NEAR(d.l2, std::sqrt(8.0 / 3.0), 1e-6);
}

TEST(RunFixedPoint, HalvingMapConvergesAndRecordsRatios) {
  const RangeInterval J{0.0, 1.0};
  CoefficientLayout layout;
  layout.n_knots = 5;
  const ScalarFn truth = constant_fn(2.0);
  const auto a0 = layout.constant(1.0, J);
  const UpdateFn halve = [&](const CoefficientFn& a) {
    std::vector<double> v = a.values();
    for (double& x : v) x = 0.5 * (x + 2.0);
    return layout.build(J, v);
  };
  IterationSettings s;
  s.n_iters = 40;
  s.truth = truth;
  const auto trace = run_fixed_point(a0, halve, J, s);
  EXPECT_DOUBLE_EQ(trace.stop_tol, 1e-6);
  EXPECT_EQ(trace.termination, Termination::Converged);
  // increments 2^-(k+1) fall below 1e-6 at k = 19
  EXPECT_EQ(trace.n_updates(), 20u);
  for (double q : trace.linf_ratios()) EXPECT_NEAR(q, 0.5, 1e-8);
  EXPECT_NEAR(trace.relative_l2(0), 0.5, 1e-12);
  EXPECT_EQ(trace.iterates.size(), trace.errors.size());
  EXPECT_EQ(trace.seconds.size(), trace.n_updates());
}

TEST(RunFixedPoint, FixedIterationCountWithoutTruth) {
  const RangeInterval J{0.0, 1.0};
  CoefficientLayout layout;
  const auto a0 = layout.constant(1.0, J);
  IterationSettings s;
  s.n_iters = 3;
  const auto trace = run_fixed_point(a0, [](const CoefficientFn& a) { return a; }, J, s);
  EXPECT_FALSE(trace.has_errors());
  EXPECT_EQ(trace.termination, Termination::Converged);
  EXPECT_EQ(trace.n_updates(), 1u);
  s.stop_on_convergence = false;
  const auto full = run_fixed_point(a0, [](const CoefficientFn& a) { return a; }, J, s);
  EXPECT_EQ(full.termination, Termination::MaxIterations);
  EXPECT_EQ(full.n_updates(), 3u);
}

// ---------------------------------------------------------------------------
// Final-time reconstruction

TEST(FinalTime, AnchorFromBoundaryFlux) {
  const auto p = reference_final_time(200);
  EXPECT_EQ(p.anchor.source, AnchorSource::BoundaryFlux);
  EXPECT_EQ(p.flux_side, Side::Left);
  EXPECT_NEAR(p.anchor.tau, p.observation.smoothed.front(), 0.0);
  EXPECT_NEAR(p.anchor.value, reference_truth(p.anchor.tau), 5e-4);
}

TEST(FinalTime, IdentityCoefficientIsStationary) {
  const ScalarFn one = constant_fn(1.0);
  double prev = 1.0;
  for (std::size_t n : {100u, 200u}) {
    const auto p = reference_final_time(n, one);
    const auto a1 = update_1d(p, p.layout.constant(1.0, p.J));
    const double err = sup_error(a1, one, p.J);
    EXPECT_LT(err, 1e-3) << n;
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(FinalTime, ReferenceTruthIsStationaryUnderRefinement) {
  double prev = 1.0;
  for (std::size_t n : {100u, 200u, 400u}) {
    const auto p = reference_final_time(n);
    const double err = sup_error(update_1d(p, p.layout.sample(kTruth, p.J)), kTruth, p.J);
    EXPECT_LT(err, 5e-3) << n;
    EXPECT_LT(err, prev) << n;
    prev = err;
  }
}

TEST(FinalTime, OneStepReducesError) {
  const auto p = reference_final_time(100);
  const auto a0 = p.layout.constant(1.0, p.J);
  const auto a1 = update_1d(p, a0);
  const auto a2 = update_1d(p, a1);
  const double e0 = sup_error(a0, kTruth, p.J), e1 = sup_error(a1, kTruth, p.J), e2 = sup_error(a2, kTruth, p.J);
  EXPECT_LT(e1, e0);
  EXPECT_LT(e2 / e1, 1.0);
  EXPECT_LT(e1 / e0, 0.1);
}

TEST(FinalTime, CurveUpdateAgreesWithIntervalUpdate) {
  const auto p = reference_final_time(200);
  const auto a0 = p.layout.constant(1.0, p.J);
  const auto direct = update_1d(p, a0);
  const auto curve = update_curve(curve_from_final_time(p, a0), p.anchor.value, p.layout, p.kappa, p.J);
  EXPECT_LT(difference_norms(as_scalar(direct), as_scalar(curve), p.J).linf, 5e-3);
}

TEST(FinalTime, CurveClosedForm) {
  // |grad g|^2 = 1, lap g = 1, rhs = 2:  a' + a = 2
  CurveSamples c;
  for (int i = 0; i <= 100; ++i) {
    c.sigma.push_back(i / 100.0);
    c.g_vals.push_back(i / 100.0);
  }
  c.grad_norm_sq.assign(101, 1.0);
  c.laplacian_g.assign(101, 1.0);
  c.rhs_vals.assign(101, 2.0);
  const auto a = update_curve(c, 0.5);
  // global trapezoid error ~ dtau^2 / 12 * |a''| * tau
  for (double t : {0.0, 0.3, 0.77, 1.0}) EXPECT_NEAR(a(t), 0.5 * std::exp(-t) + 2.0 * (1.0 - std::exp(-t)), 2e-5) << t;
  // lap g = 0, rhs = 0: a stays at the anchor
  c.laplacian_g.assign(101, 0.0);
  c.rhs_vals.assign(101, 0.0);
  const auto flat = update_curve(c, 1.7);
  for (double t : {0.0, 0.5, 1.0}) EXPECT_NEAR(flat(t), 1.7, 1e-15);
}

namespace {

// Hand-made final-time record with g on a 40-cell grid.
ObservationRecord handmade_g(const ProblemSpec& p, const std::function<double(double)>& g) {
  std::vector<Sample> s;
  for (double x : p.grid.nodes()) s.push_back({x, g(x)});
  return build_record(ObservationKind::FinalTime, s, s, p.grid.nodes(), 0.0, FilterSettings{0.0});
}

ProblemSpec insulated_constant(double c) {
  ProblemSpec p;
  p.grid = SpatialGrid(0.0, 1.0, 40);
  p.times = TimeGrid(1.0, 20);
  p.coefficient = constant_fn(1.0);
  p.left = BoundaryCondition::impedance(0.0, [](double) { return 0.0; });
  p.right = BoundaryCondition::impedance(0.0, [](double) { return 0.0; });
  p.u0.assign(41, c);
  return p;
}

}  // namespace

TEST(FinalTime, ZeroNumeratorClampsToFloor) {
  // steady solve, zero flux, r = 0: every quotient is 0 / g'
  const auto spec = insulated_constant(1.0);
  const auto p = FinalTimeProblem::make(spec, handmade_g(spec, [](double x) { return 1.0 + x; }));
  const auto a1 = update_1d(p, p.layout.constant(1.0, p.J));
  EXPECT_EQ(a1.clamped_count(), a1.n_knots());
  EXPECT_DOUBLE_EQ(a1(1.5), CoefficientFn::kDefaultFloor);
}

TEST(FinalTime, GuardsRaise) {
  auto spec = insulated_constant(1.0);
  // vanishing normal derivative of g without an anchor value
  EXPECT_EQ(code_of([&] { FinalTimeProblem::make(spec, handmade_g(spec, [](double x) { return 1.0 + x * x; })); }),
            ErrorCode::MissingAnchor);
  const auto user =
      FinalTimeProblem::make(spec, handmade_g(spec, [](double x) { return 1.0 + x * x; }), {}, 1.25);
  EXPECT_EQ(user.anchor.source, AnchorSource::UserSupplied);
  EXPECT_DOUBLE_EQ(user.anchor.value, 1.25);

  // g' = 0 at a node
  const auto flat = FinalTimeProblem::make(spec, handmade_g(spec, [](double x) { return (x - 0.5) * (x - 0.5); }), {}, 1.0);
  EXPECT_EQ(code_of([&] { update_1d(flat, flat.layout.constant(1.0, flat.J)); }), ErrorCode::DegenerateGradient);
  // g not monotone, g' never zero on a node
  const auto fold =
      FinalTimeProblem::make(spec, handmade_g(spec, [](double x) { return (x - 0.51) * (x - 0.51); }), {}, 1.0);
  EXPECT_EQ(code_of([&] { update_1d(fold, fold.layout.constant(1.0, fold.J)); }), ErrorCode::NonMonotone);

  // no impedance end
  auto dir = spec;
  dir.left = BoundaryCondition::dirichlet([](double) { return 1.0; });
  dir.right = BoundaryCondition::dirichlet([](double) { return 1.0; });
  EXPECT_EQ(code_of([&] { FinalTimeProblem::make(dir, handmade_g(dir, [](double x) { return 1.0 + x; })); }),
            ErrorCode::MissingAnchor);

  // solution range outside J
  auto wide = FinalTimeProblem::make(spec, handmade_g(spec, [](double x) { return 1.0 + x; }));
  wide.solution_range = RangeInterval{1.0, 2.5};
  EXPECT_EQ(code_of([&] { iterate_final_time(wide, wide.layout.constant(1.0, wide.J)); }),
            ErrorCode::RangeViolation);
}

TEST(FinalTime, RightSideAnchorWhenLeftIsDirichlet) {
  const auto fine = time_trace_design(400, 400, kTruth);
  const auto work = time_trace_design(200, 200, kTruth);
  CoefficientLayout layout;
  layout.a_le = kTruth;
  layout.a_ri = kTruth;
  layout.blend_width = 0.1;
  const auto p = FinalTimeProblem::make(work, exact_record(fine, work, ObservationKind::FinalTime), layout);
  EXPECT_EQ(p.flux_side, Side::Right);
  EXPECT_NEAR(p.anchor.value, reference_truth(p.anchor.tau), 1e-3);
  EXPECT_LT(sup_error(update_1d(p, p.layout.sample(kTruth, p.J)), kTruth, p.J), 5e-3);
}

// ---------------------------------------------------------------------------
// Time-trace kernels

TEST(TraceKernels, SchemeAFiveNodeQuadrature) {
  // lap u = 0, |u_x| = 1: a = a0 + trapezoid of (h' - r)
  const std::vector<double> tau{0.0, 0.25, 0.5, 0.75, 1.0}, t{0.0, 0.1, 0.2, 0.3, 0.4}, ux(5, 1.0), uxx(5, 0.0),
      rhs{1.0, 2.0, 3.0, 4.0, 5.0};
  const auto a = scheme_a_values(tau, t, ux, uxx, rhs, 0.5, 1e-8);
  const std::vector<double> expect{0.5, 0.875, 1.5, 2.375, 3.5};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(a[i], expect[i]);
  // |u_x| = 2 divides the forcing by 4
  const std::vector<double> ux2(5, 2.0);
  const auto a2 = scheme_a_values(tau, t, ux2, uxx, rhs, 0.5, 1e-8);
  EXPECT_DOUBLE_EQ(a2[4], 0.5 + 3.0 / 4.0);
}

TEST(TraceKernels, SchemeADegenerateStartBorrowsNextNode) {
  const std::vector<double> tau{0.0, 0.5, 1.0}, t{0.0, 0.5, 1.0}, ux{0.0, 1.0, 1.0}, uxx(3, 0.0), rhs{9.0, 1.0, 1.0};
  const auto a = scheme_a_values(tau, t, ux, uxx, rhs, 1.0, 1e-8);
  EXPECT_DOUBLE_EQ(a[2], 2.0);
  const std::vector<double> bad{1.0, 0.0, 1.0};
  EXPECT_EQ(code_of([&] { scheme_a_values(tau, t, bad, uxx, rhs, 1.0, 1e-8); }), ErrorCode::DegenerateGradient);
}

TEST(TraceKernels, SchemeBZeroIntegrandKeepsAnchor) {
  const std::vector<double> tau{0.1, 0.2, 0.3, 0.4}, t{0.0, 0.1, 0.2, 0.3}, ux(4, 1.0), uxx(4, 0.0), dnu(4, 1.0),
      b(4, 1.0), rhs(4, 0.0);
  const auto a = scheme_b_values(tau, t, ux, uxx, dnu, b, 0.0, rhs, 1.3, 1e-8, 1e-8);
  for (double v : a) EXPECT_DOUBLE_EQ(v, 1.3);
}

TEST(TraceKernels, SchemeCSteadyLinearState) {
  // u = x, a = 1, gamma = 0, b = 1: quotient 1 / 1
  const std::vector<double> tau(3, 1.0), t{0.0, 0.5, 1.0}, dnu(3, 1.0), b(3, 1.0);
  const auto [idx, vals] = scheme_c_values(tau, t, dnu, b, 0.0, 1e-8);
  ASSERT_EQ(vals.size(), 3u);
  for (double v : vals) EXPECT_DOUBLE_EQ(v, 1.0);
  // gamma term: (b - gamma tau) / dnu
  const auto [i2, v2] = scheme_c_values(tau, t, dnu, b, 0.25, 1e-8);
  EXPECT_DOUBLE_EQ(v2[1], 0.75);
}

TEST(TraceKernels, SchemeCZeroFlux) {
  const std::vector<double> tau{0.0, 0.5, 1.0}, t{0.0, 0.5, 1.0}, b(3, 1.0);
  const std::vector<double> start{0.0, 1.0, 1.0};
  const auto [idx, vals] = scheme_c_values(tau, t, start, b, 0.0, 1e-8);
  EXPECT_EQ(idx, (std::vector<std::size_t>{1, 2}));
  const std::vector<double> late{1.0, 0.0, 1.0};
  EXPECT_EQ(code_of([&] { scheme_c_values(tau, t, late, b, 0.0, 1e-8); }), ErrorCode::DegenerateFlux);
}

TEST(SensorDerivatives, QuadraticProfile) {
  ProblemSpec p;
  p.grid = SpatialGrid(0.0, 1.0, 20);
  p.times = TimeGrid(1.0, 2);
  p.coefficient = constant_fn(1.0);
  // steady: u = 1 + x - x^2 / 2 with r = 1, u_x(1) = 0
  p.source = [](double, double, double) { return 1.0; };
  p.left = BoundaryCondition::dirichlet([](double) { return 1.0; });
  p.right = BoundaryCondition::impedance(0.0, [](double) { return 0.0; });
  p.u0.resize(21);
  for (std::size_t i = 0; i <= 20; ++i) {
    const double x = p.grid.node(i);
    p.u0[i] = 1.0 + x - 0.5 * x * x;
  }
  const auto d = sensor_derivatives(solve_forward(p), Side::Left);
  for (std::size_t n = 0; n < 3; ++n) {
    EXPECT_NEAR(d.ux[n], 1.0, 1e-10);
    EXPECT_NEAR(d.uxx[n], -1.0, 1e-8);
    EXPECT_NEAR(d.normal[n], -1.0, 1e-10);
  }
}

// ---------------------------------------------------------------------------
// Time-trace reconstruction

TEST(TimeTrace, AnchorFromInitialFlux) {
  const auto p = reference_time_trace(100);
  ASSERT_TRUE(p.anchor.has_value());
  EXPECT_EQ(p.anchor->source, AnchorSource::BoundaryFlux);
  EXPECT_EQ(p.side, Side::Right);
  EXPECT_NEAR(p.anchor->value, reference_truth(p.anchor->tau), 1e-4);
}

TEST(TimeTrace, IdentityCoefficientIsStationaryForEachScheme) {
  const ScalarFn one = constant_fn(1.0);
  const auto p = reference_time_trace(100, one);
  for (auto s : {TraceScheme::A, TraceScheme::B, TraceScheme::C}) {
    const auto a1 = update_time_trace(p, s, p.layout.constant(1.0, p.J));
    EXPECT_LT(sup_error(a1, one, p.J), 2e-2) << to_string(s);
  }
}

TEST(TimeTrace, ReferenceTruthIsStationaryUnderRefinement) {
  for (auto s : {TraceScheme::A, TraceScheme::B, TraceScheme::C}) {
    double prev = 1.0;
    for (std::size_t n : {100u, 200u, 400u}) {
      const auto p = reference_time_trace(n);
      const double err = sup_error(update_time_trace(p, s, p.layout.sample(kTruth, p.J)), kTruth, p.J);
      if (n == 400) EXPECT_LT(err, 5e-3) << to_string(s);
      EXPECT_LT(err, prev) << to_string(s) << " n=" << n;
      prev = err;
    }
  }
}

TEST(TimeTrace, SchemeCOneStepReducesError) {
  const auto p = reference_time_trace(100);
  const auto a0 = p.layout.constant(1.0, p.J);
  const auto a1 = update_scheme_C(p, a0);
  EXPECT_LT(sup_error(a1, kTruth, p.J), sup_error(a0, kTruth, p.J));
}

TEST(TimeTrace, GuardsRaise) {
  const auto fine = time_trace_design(100, 100, kTruth);
  const auto work = time_trace_design(50, 50, kTruth);
  // sensor on the Dirichlet end
  const auto sol = solve_forward(fine);
  auto left_raw = sample_observation(sol, ObservationKind::TimeTrace, 51, 0.0);
  for (std::size_t n = 0; n < left_raw.size(); ++n) left_raw[n].value += 1e-3 * static_cast<double>(n);
  const auto left = build_record(ObservationKind::TimeTrace, left_raw, left_raw, work.times.times(), 0.0, {}, 0.0);
  EXPECT_EQ(code_of([&] { TimeTraceProblem::make(work, left); }), ErrorCode::BadSensor);
  // time grid mismatch
  const auto rec = exact_record(fine, work, ObservationKind::TimeTrace, 1.0);
  auto other = work;
  other.times = TimeGrid(1.0, 40);
  EXPECT_EQ(code_of([&] { TimeTraceProblem::make(other, rec); }), ErrorCode::TraceMismatch);
  // range outside J
  auto p = TimeTraceProblem::make(work, rec);
  p.solution_range = RangeInterval{-0.5, 1.0};
  EXPECT_EQ(code_of([&] { iterate_time_trace(p, TraceScheme::C, p.layout.constant(1.0, p.J)); }),
            ErrorCode::RangeViolation);
}

TEST(TimeTrace, FlatInitialProfileNeedsAnchorForSchemesAAndB) {
  ProblemSpec p;
  p.grid = SpatialGrid(0.0, 1.0, 50);
  p.times = TimeGrid(1.0, 50);
  p.coefficient = constant_fn(1.0);
  p.left = BoundaryCondition::impedance(0.0, [](double) { return 0.0; });
  p.right = BoundaryCondition::impedance(0.0, [](double t) { return t; });
  p.u0.assign(51, 0.0);
  const auto rec = exact_record(p, p, ObservationKind::TimeTrace, 1.0);
  const auto prob = TimeTraceProblem::make(p, rec);
  EXPECT_FALSE(prob.anchor.has_value());
  const auto a0 = prob.layout.constant(1.0, prob.J);
  EXPECT_EQ(code_of([&] { update_scheme_A(prob, a0); }), ErrorCode::MissingAnchor);
  EXPECT_EQ(code_of([&] { update_scheme_B(prob, a0); }), ErrorCode::MissingAnchor);
  EXPECT_NO_THROW(update_scheme_C(prob, a0));
  const auto user = TimeTraceProblem::make(p, rec, {}, 1.0);
  EXPECT_EQ(user.anchor->source, AnchorSource::UserSupplied);
  EXPECT_NO_THROW(update_scheme_A(user, a0));
}
