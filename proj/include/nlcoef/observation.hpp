#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "nlcoef/error.hpp"

namespace nlcoef {

enum class ObservationKind { FinalTime, TimeTrace };

struct Sample {
  double coordinate;
  double value;
};

/// Value interval J = [u_lo, u_hi].
struct RangeInterval {
  double u_lo = 0.0;
  double u_hi = 1.0;

  double width() const { return u_hi - u_lo; }
  bool valid() const { return u_lo < u_hi; }
};

/// Observation data through the pipeline: samples as taken, after noise,
/// and smoothed on the working grid together with derivative estimates.
/// For FinalTime, coordinates are x; for TimeTrace, t at sensor x0.
struct ObservationRecord {
  ObservationKind kind = ObservationKind::FinalTime;
  std::vector<Sample> raw_samples;
  std::vector<Sample> noisy_samples;
  std::optional<double> x0;
  double noise_level = 0.0;  // percent
  double filter_weight = 0.0;
  std::vector<double> coordinates;  // uniform working grid
  std::vector<double> smoothed;
  std::vector<double> d1;  // g' or h'
  std::vector<double> d2;  // g'' (FinalTime only)

  RangeInterval range() const {
    require(!smoothed.empty(), ErrorCode::InvalidArgument, "ObservationRecord: not smoothed");
    const auto [lo, hi] = std::minmax_element(smoothed.begin(), smoothed.end());
    return {*lo, *hi};
  }

  double spacing() const {
    require(coordinates.size() >= 2, ErrorCode::InvalidArgument, "ObservationRecord: no working grid");
    return (coordinates.back() - coordinates.front()) / static_cast<double>(coordinates.size() - 1);
  }
};

}  // namespace nlcoef
