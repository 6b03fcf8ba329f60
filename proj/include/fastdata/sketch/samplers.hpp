#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "fastdata/core/query_spec.hpp"
#include "fastdata/sketch/damped_reservoir.hpp"

namespace fastdata {

/// Streaming sample behind one of the SamplerPolicy choices. observe()
/// is called per arrival and tick() at every decay boundary.
template <class T>
class Sampler {
 public:
  Sampler(SamplerPolicy policy, std::size_t capacity, std::size_t period_capacity,
          double retention, std::uint64_t seed)
      : policy_(policy),
        adr_(capacity, policy == SamplerPolicy::Uniform ? 1.0 : retention, seed) {
    if (policy == SamplerPolicy::AdrPerPeriod)
      period_.emplace(period_capacity ? period_capacity : 1, Rng::mix(seed, 7));
    if (policy == SamplerPolicy::TupleDecay) tuple_.emplace(capacity, Rng::mix(seed, 8));
  }

  void observe(const T& x) {
    switch (policy_) {
      case SamplerPolicy::Adr:
      case SamplerPolicy::Uniform:
        adr_.observe(x);
        break;
      case SamplerPolicy::AdrPerPeriod:
        period_->observe(x);
        break;
      case SamplerPolicy::TupleDecay:
        tuple_->observe(x);
        break;
    }
  }

  /// Decay boundary. The per-period policy decays the reservoir, then
  /// folds the period's uniform sample in with unit weights.
  void tick() {
    switch (policy_) {
      case SamplerPolicy::Adr:
      case SamplerPolicy::Uniform:
        adr_.decay();
        break;
      case SamplerPolicy::AdrPerPeriod:
        adr_.decay();
        for (const auto& x : period_->items()) adr_.observe(x);
        period_->clear();
        break;
      case SamplerPolicy::TupleDecay:
        break;
    }
  }

  /// Current sample. Before the first fold the per-period policy serves
  /// the open period's sample.
  const std::vector<T>& sample() const {
    switch (policy_) {
      case SamplerPolicy::AdrPerPeriod:
        return adr_.empty() ? period_->items() : adr_.items();
      case SamplerPolicy::TupleDecay:
        return tuple_->items();
      default:
        return adr_.items();
    }
  }

  SamplerPolicy policy() const { return policy_; }
  const DampedReservoir<T>& reservoir() const { return adr_; }

 private:
  SamplerPolicy policy_;
  DampedReservoir<T> adr_;
  std::optional<UniformReservoir<T>> period_;
  std::optional<TupleDecayReservoir<T>> tuple_;
};

/// Inserts the mean of each sub-period into a damped reservoir as one
/// observation weighted by the sub-period's arrival count.
class TimeAveragedSampler {
 public:
  TimeAveragedSampler(std::size_t capacity, double retention, std::uint64_t seed)
      : adr_(capacity, retention, seed) {}

  void observe(double x) {
    sum_ += x;
    ++count_;
  }

  void close_subperiod() {
    if (count_ == 0) return;
    adr_.observe(sum_ / static_cast<double>(count_), static_cast<double>(count_));
    sum_ = 0.0;
    count_ = 0;
  }

  void tick() {
    close_subperiod();
    adr_.decay();
  }

  const DampedReservoir<double>& reservoir() const { return adr_; }

 private:
  DampedReservoir<double> adr_;
  double sum_ = 0.0;
  std::size_t count_ = 0;
};

}  // namespace fastdata
