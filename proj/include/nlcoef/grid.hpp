#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "nlcoef/error.hpp"

namespace nlcoef {

/// Uniform node grid on [x_lo, x_hi] with n_cells cells.
struct SpatialGrid {
  double x_lo = 0.0;
  double x_hi = 1.0;
  std::size_t n_cells = 400;

  SpatialGrid() = default;
  SpatialGrid(double lo, double hi, std::size_t cells) : x_lo(lo), x_hi(hi), n_cells(cells) {
    validate();
  }

  void validate() const {
    require(x_lo < x_hi, ErrorCode::InvalidArgument, "SpatialGrid: x_lo must be < x_hi");
    require(n_cells >= 1, ErrorCode::InvalidArgument, "SpatialGrid: n_cells must be positive");
  }

  double dx() const { return (x_hi - x_lo) / static_cast<double>(n_cells); }
  std::size_t n_nodes() const { return n_cells + 1; }
  double node(std::size_t i) const {
    return i == n_cells ? x_hi : x_lo + static_cast<double>(i) * dx();
  }
  std::vector<double> nodes() const {
    std::vector<double> xs(n_nodes());
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = node(i);
    return xs;
  }
};

/// Uniform time levels t_n = n * dt on [0, t_final].
struct TimeGrid {
  double t_final = 1.0;
  std::size_t n_steps = 400;

  TimeGrid() = default;
  TimeGrid(double t, std::size_t steps) : t_final(t), n_steps(steps) { validate(); }

  void validate() const {
    require(t_final > 0.0, ErrorCode::InvalidArgument, "TimeGrid: t_final must be positive");
    require(n_steps >= 1, ErrorCode::InvalidArgument, "TimeGrid: n_steps must be positive");
  }

  double dt() const { return t_final / static_cast<double>(n_steps); }
  std::size_t n_levels() const { return n_steps + 1; }
  double time(std::size_t n) const {
    return n == n_steps ? t_final : static_cast<double>(n) * dt();
  }
  std::vector<double> times() const {
    std::vector<double> ts(n_levels());
    for (std::size_t n = 0; n < ts.size(); ++n) ts[n] = time(n);
    return ts;
  }
};

/// Solution values u(x_i, t_n) on a tensor grid. Stored time-major so that
/// each time level is a contiguous span.
class SpaceTimeField {
public:
  SpaceTimeField() = default;
  SpaceTimeField(SpatialGrid grid, TimeGrid times)
      : grid_(grid), times_(times), values_(grid.n_nodes() * times.n_levels(), 0.0) {}

  const SpatialGrid& grid() const { return grid_; }
  const TimeGrid& times() const { return times_; }

  double operator()(std::size_t i, std::size_t n) const { return values_[n * grid_.n_nodes() + i]; }
  double& operator()(std::size_t i, std::size_t n) { return values_[n * grid_.n_nodes() + i]; }

  std::span<const double> level(std::size_t n) const {
    return {values_.data() + n * grid_.n_nodes(), grid_.n_nodes()};
  }
  std::span<double> level(std::size_t n) {
    return {values_.data() + n * grid_.n_nodes(), grid_.n_nodes()};
  }

  /// Time series u(x_i, .) at a fixed node.
  std::vector<double> trace(std::size_t i) const {
    std::vector<double> out(times_.n_levels());
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = (*this)(i, n);
    return out;
  }

  bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  double min() const {
    double m = values_.empty() ? 0.0 : values_.front();
    for (double v : values_) m = std::min(m, v);
    return m;
  }
  double max() const {
    double m = values_.empty() ? 0.0 : values_.front();
    for (double v : values_) m = std::max(m, v);
    return m;
  }

private:
  SpatialGrid grid_;
  TimeGrid times_;
  std::vector<double> values_;
};

}  // namespace nlcoef
