#pragma once

#include <algorithm>
#include <stdexcept>
#include <span>
#include <vector>

#include "fastdata/core/point.hpp"

namespace fastdata {

/// (ao / (ao + ai)) / (bo / (bo + bi)). ao = 0 gives 0 (including 0/0);
/// otherwise bo = 0 gives +inf.
inline double risk_ratio(double ao, double ai, double bo, double bi) {
  if (ao < 0.0 || ai < 0.0 || bo < 0.0 || bi < 0.0)
    throw std::invalid_argument("risk ratio counts must be nonnegative");
  if (ao == 0.0) return 0.0;
  if (bo == 0.0) return kInfinity;
  return (ao / (ao + ai)) / (bo / (bo + bi));
}

/// count >= s * total, with a relative slack so that thresholds computed
/// from decayed reals are not lost to rounding.
inline bool meets_support(double count, double total, double s) {
  return count > 0.0 && count >= s * total - 1e-9 * std::max(1.0, total);
}

inline double min_count_for(double total, double s) {
  return std::max(s * total - 1e-9 * std::max(1.0, total), 0.0);
}

inline ExplanationRecord make_record(std::vector<AttributeId> items, double ao, double ai, double bo,
                                     double bi) {
  ExplanationRecord r;
  r.items = std::move(items);
  r.ao = ao;
  r.ai = ai;
  r.bo = bo;
  r.bi = bi;
  r.outlier_support = ao + bo > 0.0 ? ao / (ao + bo) : 0.0;
  r.risk_ratio = risk_ratio(ao, ai, bo, bi);
  return r;
}

namespace detail {

inline const std::vector<AttributeId>& items_of(const Point& p) { return p.attributes; }
inline const std::vector<AttributeId>& items_of(const std::vector<AttributeId>& v) { return v; }
inline const std::vector<AttributeId>& items_of(const Point* p) { return p->attributes; }

/// Sorted, deduplicated, NULL-free item set of one point.
template <class Tx>
void normalize_into(const Tx& tx, std::vector<AttributeId>& out) {
  out.clear();
  for (AttributeId a : items_of(tx)) {
    if (a != kNullAttribute) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

}  // namespace detail

}  // namespace fastdata
