#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "fastdata/core/point.hpp"
#include "fastdata/sketch/damped_reservoir.hpp"

namespace fastdata {

/// Percentile cutoff over a sample of scores.
struct ThresholdState {
  double target_percentile = 0.99;  // 1 - outlierPercentile
  std::optional<double> cutoff;
  bool warning = false;  // last refresh saw an empty sample

  /// Sets the cutoff to the nearest-rank target quantile of the scores.
  /// An empty sample keeps the previous cutoff and raises the warning.
  bool refresh(const std::vector<double>& scores) {
    if (scores.empty()) {
      warning = true;
      return false;
    }
    cutoff = nearest_rank_quantile(scores, target_percentile);
    warning = false;
    return true;
  }
};

/// Strict rule: a score equal to the cutoff is an inlier.
inline Label classify(double score, double cutoff) { return {score > cutoff, score}; }

/// True when the observed outlier fraction leaves the binomial 99% band
/// p +/- 2.576 sqrt(p (1 - p) / n). Needs at least min_n observations.
inline bool drift_detected(std::size_t outliers, std::size_t n, double p, std::size_t min_n = 100) {
  if (n < min_n || n == 0) return false;
  const double nn = static_cast<double>(n);
  const double half = 2.576 * std::sqrt(p * (1.0 - p) / nn);
  const double observed = static_cast<double>(outliers) / nn;
  return observed < p - half || observed > p + half;
}

}  // namespace fastdata
