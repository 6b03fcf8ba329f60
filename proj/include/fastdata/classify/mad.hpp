#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "fastdata/error.hpp"

namespace fastdata {

/// Exact median by selection; even-length samples average the two
/// middle values.
inline double median_of(std::vector<double> v) {
  if (v.empty()) throw DataError("median of an empty sample");
  const std::size_t n = v.size();
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), mid);
  return lower + (upper - lower) / 2.0;
}

/// Median / median-absolute-deviation model. No consistency constant is
/// applied: cutoffs are percentiles of the scores, so constant factors
/// cancel.
struct MadModel {
  double median = 0.0;
  double mad = 0.0;
  double fallback_scale = 1.0;
  bool degenerate = false;  // mad == 0; scores divide by fallback_scale

  double scale() const { return degenerate ? fallback_scale : mad; }
};

/// Trains on a nonempty sample. When the MAD is zero the scale falls back
/// to the median of the nonzero absolute deviations (or 1.0 if every
/// deviation is zero), unless an explicit fallback is given.
inline MadModel train_mad(std::span<const double> sample, double fallback_scale = 0.0) {
  if (sample.empty()) throw DataError("cannot train MAD on an empty sample");
  MadModel m;
  m.median = median_of(std::vector<double>(sample.begin(), sample.end()));
  std::vector<double> dev;
  dev.reserve(sample.size());
  for (double x : sample) dev.push_back(std::abs(x - m.median));
  m.mad = median_of(dev);
  if (m.mad == 0.0) {
    m.degenerate = true;
    if (fallback_scale > 0.0) {
      m.fallback_scale = fallback_scale;
    } else {
      std::erase(dev, 0.0);
      m.fallback_scale = dev.empty() ? 1.0 : median_of(std::move(dev));
    }
  }
  return m;
}

inline double score_mad(const MadModel& m, double x) { return std::abs(x - m.median) / m.scale(); }

}  // namespace fastdata
