#pragma once

#include <algorithm>
#include <vector>

#include "fastdata/core/point.hpp"

namespace fastdata {

/// Total order: outlier support descending, then risk ratio descending
/// (+inf first), then item ids lexicographically.
inline bool ranks_before(const ExplanationRecord& a, const ExplanationRecord& b) {
  if (a.outlier_support != b.outlier_support) return a.outlier_support > b.outlier_support;
  if (a.risk_ratio != b.risk_ratio) return a.risk_ratio > b.risk_ratio;
  return a.items < b.items;
}

inline void rank_explanations(std::vector<ExplanationRecord>& records) {
  std::sort(records.begin(), records.end(), ranks_before);
}

}  // namespace fastdata
