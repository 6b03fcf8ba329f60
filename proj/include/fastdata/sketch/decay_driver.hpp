#pragma once

#include <cmath>
#include <cstddef>
#include <optional>

#include "fastdata/core/query_spec.hpp"

namespace fastdata {

/// Turns a decay period into ticks. Tuple periods tick right after every
/// N-th observation. Time periods tick whenever a timestamp (or an
/// explicit clock advance) crosses the next boundary, once per boundary
/// crossed, so quiet intervals still decay. Boundaries are anchored at
/// the first timestamp seen.
class DecayDriver {
 public:
  explicit DecayDriver(DecayPeriod period) : period_(period) {}

  /// Ticks owed before a point with this timestamp is processed.
  std::size_t ticks_before(std::optional<double> timestamp) {
    if (period_.kind != DecayPeriod::Kind::Seconds || !timestamp) return 0;
    return advance_time(*timestamp);
  }

  /// Ticks owed after a point has been processed.
  std::size_t ticks_after() {
    if (period_.kind != DecayPeriod::Kind::Tuples) return 0;
    ++tuples_;
    const auto n = static_cast<std::size_t>(std::llround(period_.value));
    return (n > 0 && tuples_ % n == 0) ? 1 : 0;
  }

  std::size_t advance_time(double now) {
    if (period_.kind != DecayPeriod::Kind::Seconds) return 0;
    if (!next_boundary_) {
      next_boundary_ = now + period_.value;
      return 0;
    }
    std::size_t ticks = 0;
    while (now >= *next_boundary_) {
      ++ticks;
      *next_boundary_ += period_.value;
    }
    return ticks;
  }

  std::size_t tuples() const { return tuples_; }

 private:
  DecayPeriod period_;
  std::size_t tuples_ = 0;
  std::optional<double> next_boundary_;
};

}  // namespace fastdata
