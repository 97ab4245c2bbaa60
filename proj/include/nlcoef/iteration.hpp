#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nlcoef/coefficient.hpp"
#include "nlcoef/error.hpp"
#include "nlcoef/observation.hpp"

namespace nlcoef {

struct ErrorNorms {
  double l2 = 0.0;
  double linf = 0.0;
};

/// Uniform evaluation grid of n points on J.
inline std::vector<double> evaluation_grid(const RangeInterval& J, std::size_t n) {
  require(n >= 2, ErrorCode::InvalidArgument, "evaluation_grid: need at least 2 points");
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = i + 1 == n ? J.u_hi : J.u_lo + J.width() * static_cast<double>(i) / static_cast<double>(n - 1);
  return t;
}

/// L2(J) (trapezoid) and sup norms of f - g over n uniform points.
inline ErrorNorms difference_norms(const ScalarFn& f, const ScalarFn& g, const RangeInterval& J,
                                   std::size_t n = 1001) {
  const auto t = evaluation_grid(J, n);
  const double h = J.width() / static_cast<double>(n - 1);
  ErrorNorms e;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = f(t[i]) - g(t[i]);
    e.linf = std::max(e.linf, std::abs(d));
    e.l2 += (i == 0 || i + 1 == n ? 0.5 : 1.0) * h * d * d;
  }
  e.l2 = std::sqrt(e.l2);
  return e;
}

inline ErrorNorms function_norms(const ScalarFn& f, const RangeInterval& J, std::size_t n = 1001) {
  return difference_norms(f, constant_fn(0.0), J, n);
}

inline ScalarFn as_scalar(const CoefficientFn& a) {
  return [a](double tau) { return a(tau); };
}

enum class Termination { MaxIterations, Converged };

inline const char* to_string(Termination t) { return t == Termination::Converged ? "converged" : "max-iterations"; }

struct IterationSettings {
  std::size_t n_iters = 15;
  std::optional<double> stop_tol;  // default 1e-6 * |a_0|_inf on J
  bool stop_on_convergence = true;
  std::optional<ScalarFn> truth;  // enables error norms
  std::size_t n_eval = 1001;

  double resolved_stop_tol(const CoefficientFn& a0, const RangeInterval& J) const {
    return stop_tol ? *stop_tol : 1e-6 * function_norms(as_scalar(a0), J, n_eval).linf;
  }
};

/// Iterates a_0, a_1 = U(a_0), ... and what was measured along the way.
/// errors[k] refers to iterates[k]; increments[k] = |a_{k+1} - a_k|_inf and
/// seconds[k] is the wall-clock time of the update producing a_{k+1}.
struct IterationTrace {
  RangeInterval J;
  std::vector<CoefficientFn> iterates;
  std::vector<ErrorNorms> errors;
  std::vector<double> increments;
  std::vector<double> seconds;
  double stop_tol = 0.0;
  double truth_l2 = 0.0;
  Termination termination = Termination::MaxIterations;

  std::size_t n_updates() const { return increments.size(); }
  const CoefficientFn& final_iterate() const { return iterates.back(); }
  bool has_errors() const { return !errors.empty(); }

  /// q_k = |a_{k+1} - a_act|_inf / |a_k - a_act|_inf.
  std::vector<double> linf_ratios() const {
    std::vector<double> q;
    for (std::size_t k = 0; k + 1 < errors.size(); ++k) q.push_back(errors[k + 1].linf / errors[k].linf);
    return q;
  }

  double relative_l2(std::size_t k) const {
    require(k < errors.size() && truth_l2 > 0.0, ErrorCode::InvalidArgument, "relative_l2: no error for iterate");
    return errors[k].l2 / truth_l2;
  }
};

using UpdateFn = std::function<CoefficientFn(const CoefficientFn&)>;

/// Generic fixed-point driver. Errors from the update propagate.
inline IterationTrace run_fixed_point(const CoefficientFn& a0, const UpdateFn& update, const RangeInterval& J,
                                      const IterationSettings& settings) {
  IterationTrace trace;
  trace.J = J;
  trace.stop_tol = settings.resolved_stop_tol(a0, J);
  trace.iterates.push_back(a0);
  auto record_error = [&](const CoefficientFn& a) {
    if (settings.truth) trace.errors.push_back(difference_norms(as_scalar(a), *settings.truth, J, settings.n_eval));
  };
  if (settings.truth) trace.truth_l2 = function_norms(*settings.truth, J, settings.n_eval).l2;
  record_error(a0);
  for (std::size_t k = 0; k < settings.n_iters; ++k) {
    const auto start = std::chrono::steady_clock::now();
    CoefficientFn next = update(trace.iterates.back());
    trace.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    trace.increments.push_back(
        difference_norms(as_scalar(next), as_scalar(trace.iterates.back()), J, settings.n_eval).linf);
    record_error(next);
    trace.iterates.push_back(std::move(next));
    if (settings.stop_on_convergence && trace.increments.back() < trace.stop_tol) {
      trace.termination = Termination::Converged;
      break;
    }
  }
  return trace;
}

}  // namespace nlcoef
