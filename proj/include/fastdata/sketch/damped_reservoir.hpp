#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fastdata/error.hpp"
#include "fastdata/random.hpp"

namespace fastdata {

/// Nearest-rank q-quantile: the ceil(q * n)-th smallest value.
inline double nearest_rank_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DataError("quantile of an empty sample");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile level must be in (0, 1)");
  const double n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  auto nth = values.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(values.begin(), nth, values.end());
  return *nth;
}

/// Adaptable damped reservoir. Holds at most k items; every observation
/// adds its weight to the running total c_w, and once the reservoir is
/// full an item of weight w replaces a random slot with probability
/// min(1, k * w / c_w). decay() scales c_w only, so items observed after
/// a decay are favoured over the retained sample.
template <class T>
class DampedReservoir {
 public:
  DampedReservoir(std::size_t capacity, double retention, std::uint64_t seed)
      : capacity_(capacity), retention_(retention), rng_(seed) {
    if (capacity == 0) throw std::invalid_argument("reservoir capacity must be >= 1");
    if (!(retention > 0.0 && retention <= 1.0))
      throw std::invalid_argument("retention must be in (0, 1]");
    items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
  }

  void observe(const T& x, double w = 1.0) {
    if (!(w >= 0.0)) throw std::invalid_argument("reservoir weight must be >= 0");
    weight_ += w;
    if (items_.size() < capacity_) {
      items_.push_back(x);
      return;
    }
    if (w == 0.0) return;
    const double p = std::min(1.0, static_cast<double>(capacity_) * w / weight_);
    if (p >= 1.0 || rng_.uniform() < p) items_[rng_.index(capacity_)] = x;
  }

  void decay() { weight_ *= retention_; }

  const std::vector<T>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  std::size_t capacity() const { return capacity_; }
  double weight() const { return weight_; }
  double retention() const { return retention_; }

  void clear() {
    items_.clear();
    weight_ = 0.0;
  }

 private:
  std::size_t capacity_;
  double retention_;
  double weight_ = 0.0;
  std::vector<T> items_;
  Rng rng_;
};

inline double quantile(const DampedReservoir<double>& r, double q) {
  return nearest_rank_quantile(r.items(), q);
}

/// Classic uniform reservoir (Algorithm R).
template <class T>
class UniformReservoir {
 public:
  UniformReservoir(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {
    if (capacity == 0) throw std::invalid_argument("reservoir capacity must be >= 1");
  }

  void observe(const T& x) {
    ++seen_;
    if (items_.size() < capacity_) {
      items_.push_back(x);
    } else if (auto j = rng_.index(seen_); j < capacity_) {
      items_[j] = x;
    }
  }

  const std::vector<T>& items() const { return items_; }
  std::size_t seen() const { return seen_; }

  void clear() {
    items_.clear();
    seen_ = 0;
  }

 private:
  std::size_t capacity_;
  std::size_t seen_ = 0;
  std::vector<T> items_;
  Rng rng_;
};

/// Per-tuple exponentially biased reservoir: every arrival is kept and,
/// once full, overwrites a random slot, so an item survives n later
/// arrivals with probability (1 - 1/k)^n regardless of wall-clock time.
template <class T>
class TupleDecayReservoir {
 public:
  TupleDecayReservoir(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {
    if (capacity == 0) throw std::invalid_argument("reservoir capacity must be >= 1");
  }

  void observe(const T& x) {
    if (items_.size() < capacity_) {
      items_.push_back(x);
    } else {
      items_[rng_.index(capacity_)] = x;
    }
  }

  const std::vector<T>& items() const { return items_; }

 private:
  std::size_t capacity_;
  std::vector<T> items_;
  Rng rng_;
};

}  // namespace fastdata
