#pragma once

#include <algorithm>
#include <charconv>
#include <string_view>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "nlcoef/banded.hpp"
#include "nlcoef/error.hpp"
#include "nlcoef/forward_solver.hpp"
#include "nlcoef/interpolation.hpp"
#include "nlcoef/observation.hpp"
#include "nlcoef/stencils.hpp"

namespace nlcoef {

// ---------------------------------------------------------------------------
// Sampling and noise

/// Uniformly indexed subsamples of u(., T) (FinalTime) or u(x0, .)
/// (TimeTrace). Sample j takes node/level round(j * M / (n - 1)) where M is
/// the number of cells or steps.
inline std::vector<Sample> sample_observation(const ForwardSolution& sol, ObservationKind kind, std::size_t n_samples,
                                              std::optional<double> x0 = std::nullopt) {
  require(n_samples >= 4, ErrorCode::InvalidArgument, "sample_observation: need at least 4 samples");
  const auto& f = sol.field;
  std::vector<Sample> out;
  out.reserve(n_samples);
  if (kind == ObservationKind::FinalTime) {
    const std::size_t M = f.grid().n_cells;
    require(n_samples <= M + 1, ErrorCode::InvalidArgument, "sample_observation: more samples than nodes");
    const std::size_t N = f.times().n_steps;
    for (std::size_t j = 0; j < n_samples; ++j) {
      const auto i = static_cast<std::size_t>(std::llround(static_cast<double>(j * M) / static_cast<double>(n_samples - 1)));
      out.push_back({f.grid().node(i), f(i, N)});
    }
  } else {
    require(x0.has_value(), ErrorCode::BadSensor, "sample_observation: time trace needs a sensor location");
    const std::size_t i = node_index(f.grid(), *x0);
    const std::size_t M = f.times().n_steps;
    require(n_samples <= M + 1, ErrorCode::InvalidArgument, "sample_observation: more samples than time levels");
    for (std::size_t j = 0; j < n_samples; ++j) {
      const auto n = static_cast<std::size_t>(std::llround(static_cast<double>(j * M) / static_cast<double>(n_samples - 1)));
      out.push_back({f.times().time(n), f(i, n)});
    }
  }
  return out;
}

enum class NoiseModel { UniformRelative, GaussianAdditive };

namespace detail {

// Platform-independent uniform draw on [0, 1) from the raw 64-bit engine.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Perturbs sample values. UniformRelative: v_j (1 + (level/100) xi_j) with
/// xi_j uniform on [-1, 1). GaussianAdditive: v_j + (level/100) max|v| z_j
/// with z_j standard normal (Box-Muller). Deterministic given the seed.
inline std::vector<Sample> add_noise(std::vector<Sample> samples, double level, std::uint64_t seed,
                                     NoiseModel model = NoiseModel::UniformRelative) {
  require(level >= 0.0, ErrorCode::InvalidArgument, "add_noise: level must be >= 0");
  if (level == 0.0) return samples;
  std::mt19937_64 rng(seed);
  const double rel = level / 100.0;
  if (model == NoiseModel::UniformRelative) {
    for (auto& s : samples) s.value *= 1.0 + rel * (2.0 * detail::unit_uniform(rng) - 1.0);
    return samples;
  }
  double scale = 0.0;
  for (const auto& s : samples) scale = std::max(scale, std::abs(s.value));
  for (auto& s : samples) {
    const double u1 = 1.0 - detail::unit_uniform(rng);  // (0, 1]
    const double u2 = detail::unit_uniform(rng);
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
    s.value += rel * scale * z;
  }
  return samples;
}

/// RMS of the noise add_noise injects at `level` into `samples`.
inline double noise_rms_estimate(std::span<const double> values, double level, NoiseModel model) {
  if (values.empty() || level <= 0.0) return 0.0;
  const double rel = level / 100.0;
  if (model == NoiseModel::UniformRelative) {
    double ms = 0.0;
    for (double v : values) ms += v * v;
    return rel * std::sqrt(ms / static_cast<double>(values.size()) / 3.0);
  }
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  return rel * scale;
}

// ---------------------------------------------------------------------------
// Tikhonov smoothing

namespace detail {

// (I + beta D_k^T D_k) with D_k the k-th scaled difference operator
// (rows (v_{j+1} - v_j)/h or (v_{j-1} - 2 v_j + v_{j+1})/h^2).
inline SymmetricBandMatrix smoothing_matrix(std::size_t n, double spacing, double beta, int order) {
  SymmetricBandMatrix A(n, static_cast<std::size_t>(order));
  for (std::size_t i = 0; i < n; ++i) A.add(i, i, 1.0);
  if (beta == 0.0) return A;
  if (order == 1) {
    const double w = beta / (spacing * spacing);
    for (std::size_t j = 0; j + 1 < n; ++j) {
      A.add(j, j, w);
      A.add(j + 1, j + 1, w);
      A.add(j, j + 1, -w);
    }
  } else {
    const double w = beta / (spacing * spacing * spacing * spacing);
    const double c[3] = {1.0, -2.0, 1.0};
    for (std::size_t j = 1; j + 1 < n; ++j)
      for (int p = 0; p < 3; ++p)
        for (int q = p; q < 3; ++q) {
          const double v = w * c[p] * c[q];
          const std::size_t ip = j - 1 + static_cast<std::size_t>(p);
          const std::size_t iq = j - 1 + static_cast<std::size_t>(q);
          A.add(ip, iq, v);
        }
  }
  return A;
}

inline std::vector<double> smooth(std::span<const double> y, double spacing, double beta, int order) {
  require(beta >= 0.0, ErrorCode::InvalidArgument, "smoothing weight must be >= 0");
  require(spacing > 0.0, ErrorCode::InvalidArgument, "smoothing spacing must be positive");
  require(y.size() >= static_cast<std::size_t>(order) + 1, ErrorCode::InvalidArgument, "too few points to smooth");
  if (beta == 0.0) return {y.begin(), y.end()};
  return smoothing_matrix(y.size(), spacing, beta, order).solve(y);
}

}  // namespace detail

/// H1 filter: minimizer of sum (v - y)^2 h + beta sum ((v_{j+1} - v_j)/h)^2 h,
/// i.e. the solution of (I + beta D1^T D1) v = y with free ends.
inline std::vector<double> smooth_h1(std::span<const double> y, double spacing, double beta) {
  return detail::smooth(y, spacing, beta, 1);
}

/// H2 filter: as smooth_h1 with the second-difference penalty; affine data
/// pass through unchanged.
inline std::vector<double> smooth_h2(std::span<const double> y, double spacing, double beta) {
  return detail::smooth(y, spacing, beta, 2);
}

inline double rms_difference(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

/// Discrepancy principle: the smallest beta whose residual RMS reaches
/// target_rms (bisection in log10 beta over [1e-30, 1e10]). Returns 0 for a
/// non-positive target.
inline double discrepancy_weight(std::span<const double> y, double spacing, int order, double target_rms) {
  if (target_rms <= 0.0) return 0.0;
  auto residual = [&](double log_beta) {
    return rms_difference(detail::smooth(y, spacing, std::pow(10.0, log_beta), order), y);
  };
  // cap beta / h^(2k) at 1e12 so the Cholesky factorisation stays well conditioned
  double hi = 12.0 + 2.0 * order * std::log10(spacing), lo = hi - 40.0;
  if (residual(hi) <= target_rms) return std::pow(10.0, hi);
  if (residual(lo) >= target_rms) return std::pow(10.0, lo);
  for (int k = 0; k < 60; ++k) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid) < target_rms ? lo : hi) = mid;
  }
  return std::pow(10.0, hi);
}

// ---------------------------------------------------------------------------
// Record assembly

struct FilterSettings {
  std::optional<double> weight;  // nullopt: discrepancy principle
  NoiseModel noise_model = NoiseModel::UniformRelative;
};

/// Interpolates noisy samples onto the uniform working grid (not-a-knot cubic
/// spline for final-time data, monotone cubic for time traces), smooths
/// them (H2 for g, H1 for h) and attaches derivative estimates.
inline ObservationRecord build_record(ObservationKind kind, std::vector<Sample> clean, std::vector<Sample> noisy,
                                      std::vector<double> working_grid, double noise_level,
                                      const FilterSettings& filter = {}, std::optional<double> x0 = std::nullopt) {
  require(noisy.size() >= 4, ErrorCode::InvalidArgument, "build_record: need at least 4 samples");
  require(working_grid.size() >= 4, ErrorCode::InvalidArgument, "build_record: working grid too small");
  if (kind == ObservationKind::TimeTrace)
    require(x0.has_value(), ErrorCode::BadSensor, "build_record: time trace needs a sensor location");
  ObservationRecord rec;
  rec.kind = kind;
  rec.raw_samples = std::move(clean);
  rec.noisy_samples = std::move(noisy);
  rec.x0 = x0;
  rec.noise_level = noise_level;
  rec.coordinates = std::move(working_grid);

  std::vector<double> xs, ys;
  for (const auto& s : rec.noisy_samples) {
    xs.push_back(s.coordinate);
    ys.push_back(s.value);
  }
  const double tol = 1e-9 * (rec.coordinates.back() - rec.coordinates.front());
  require(xs.front() <= rec.coordinates.front() + tol && xs.back() >= rec.coordinates.back() - tol,
          ErrorCode::InvalidArgument, "build_record: samples do not cover the working grid");
  std::vector<double> interp(rec.coordinates.size());
  if (kind == ObservationKind::FinalTime) {
    const CubicSpline spline(xs, ys);
    for (std::size_t i = 0; i < interp.size(); ++i) interp[i] = spline(rec.coordinates[i]);
  } else {
    const MonotoneCubic mc(xs, ys);
    for (std::size_t i = 0; i < interp.size(); ++i) interp[i] = mc(rec.coordinates[i]);
  }

  const int order = kind == ObservationKind::FinalTime ? 2 : 1;
  const double h = rec.spacing();
  rec.filter_weight = filter.weight.has_value()
                          ? *filter.weight
                          : discrepancy_weight(interp, h, order, noise_rms_estimate(ys, noise_level, filter.noise_model));
  rec.smoothed = detail::smooth(interp, h, rec.filter_weight, order);
  rec.d1 = stencil::first_derivative(rec.smoothed, h);
  if (kind == ObservationKind::FinalTime) rec.d2 = stencil::second_derivative(rec.smoothed, h);
  return rec;
}

/// (g', g'') of a smoothed final-time record.
inline std::pair<std::vector<double>, std::vector<double>> differentiate_g(const ObservationRecord& rec) {
  require(rec.kind == ObservationKind::FinalTime, ErrorCode::InvalidArgument, "differentiate_g: not final-time data");
  const double h = rec.spacing();
  return {stencil::first_derivative(rec.smoothed, h), stencil::second_derivative(rec.smoothed, h)};
}

// ---------------------------------------------------------------------------
// Trace inversion and range check

/// Piecewise-linear inverse of a strictly monotone time trace.
class TraceInverse {
public:
  TraceInverse(std::vector<double> times, std::vector<double> values) : t_(std::move(times)), h_(std::move(values)) {
    require(t_.size() == h_.size() && t_.size() >= 2, ErrorCode::InvalidArgument, "TraceInverse: bad sizes");
    constexpr double kMinStep = 1e-14;
    increasing_ = h_[1] > h_[0];
    for (std::size_t i = 1; i < h_.size(); ++i) {
      const double step = increasing_ ? h_[i] - h_[i - 1] : h_[i - 1] - h_[i];
      require(step >= kMinStep, ErrorCode::NonMonotone,
              "trace not strictly monotone at index " + std::to_string(i) + " (t = " + std::to_string(t_[i]) + ")");
    }
    if (!increasing_) {
      std::reverse(t_.begin(), t_.end());
      std::reverse(h_.begin(), h_.end());
    }
  }

  double operator()(double sigma) const { return linear_interpolate(h_, t_, sigma); }

  bool increasing() const { return increasing_; }
  RangeInterval range() const { return {h_.front(), h_.back()}; }

private:
  std::vector<double> t_, h_;
  bool increasing_ = true;
};

inline TraceInverse invert_trace(const ObservationRecord& rec) {
  require(rec.kind == ObservationKind::TimeTrace, ErrorCode::InvalidArgument, "invert_trace: not a time trace");
  return {rec.coordinates, rec.smoothed};
}

struct RangeCheck {
  bool contained;
  double margin;  // negative when violated
};

/// Whether the data range contains sol_range, and by how much.
inline RangeCheck check_range(const RangeInterval& data_range, const RangeInterval& sol_range) {
  const double margin = std::min(sol_range.u_lo - data_range.u_lo, data_range.u_hi - sol_range.u_hi);
  return {margin >= 0.0, margin};
}

inline RangeCheck check_range(const ObservationRecord& rec, const RangeInterval& sol_range) {
  return check_range(rec.range(), sol_range);
}

// ---------------------------------------------------------------------------
// CSV ingestion

/// Reads (coordinate, value) pairs from a two-column CSV with a header row.
inline std::vector<Sample> read_observation_csv(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::IoError, "cannot open " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::IoError, path + ": missing header row");
  std::vector<Sample> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto comma = line.find(',');
    require(comma != std::string::npos, ErrorCode::IoError, path + ":" + std::to_string(lineno) + ": expected 2 columns");
    auto parse = [&](std::string_view field) {
      while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
      while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      require(ec == std::errc() && ptr == field.data() + field.size(), ErrorCode::IoError,
              path + ":" + std::to_string(lineno) + ": not a number: '" + std::string(field) + "'");
      return v;
    };
    const std::string_view sv(line);
    out.push_back({parse(sv.substr(0, comma)), parse(sv.substr(comma + 1))});
  }
  for (std::size_t i = 1; i < out.size(); ++i)
    require(out[i].coordinate > out[i - 1].coordinate, ErrorCode::IoError,
            path + ": coordinates must be strictly increasing");
  return out;
}

}  // namespace nlcoef
