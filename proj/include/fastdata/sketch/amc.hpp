#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fastdata {

struct AmcPolicy {
  std::size_t every_n = 0;     // maintain every n observations (0: off)
  std::size_t size_bound = 0;  // maintain when |C| exceeds this (0: 2 * stable size)
  bool on_decay = true;        // maintain after every decay
};

/// Amortized maintenance counter: a decayed heavy-hitters sketch that
/// grows freely between maintenance passes and prunes back to the
/// stable size in one batch.
///
/// An unseen item enters with the carry weight w (an upper bound on the
/// count of anything not currently tracked). Maintenance keeps the
/// stableSize largest entries (ties keep the earliest inserted) and sets
/// w to the larger of its decayed previous value and the largest count
/// just removed; w decays together with the counts.
template <class Key, class Hash = std::hash<Key>>
class AmortizedMaintenanceCounter {
 public:
  explicit AmortizedMaintenanceCounter(std::size_t stable_size, AmcPolicy policy = {})
      : stable_size_(stable_size), policy_(policy) {
    if (stable_size == 0) throw std::invalid_argument("AMC stable size must be >= 1");
    if (policy_.size_bound == 0) policy_.size_bound = 2 * stable_size;
  }

  void observe(const Key& i, double c = 1.0) {
    if (!(c >= 0.0)) throw std::invalid_argument("AMC count must be >= 0");
    total_ += c;
    auto [it, inserted] = counts_.try_emplace(i, Entry{carry_, next_seq_});
    if (inserted) ++next_seq_;
    it->second.count += c;
    ++observations_;
    if ((policy_.every_n && observations_ % policy_.every_n == 0) ||
        counts_.size() > policy_.size_bound) {
      maintain();
    }
  }

  void maintain() {
    ++maintenance_runs_;
    if (counts_.size() <= stable_size_) return;
    std::vector<std::pair<const Key*, Entry>> all;
    all.reserve(counts_.size());
    for (const auto& [k, e] : counts_) all.emplace_back(&k, e);
    auto keep_first = [](const auto& a, const auto& b) {
      if (a.second.count != b.second.count) return a.second.count > b.second.count;
      return a.second.seq < b.second.seq;
    };
    auto cut = all.begin() + static_cast<std::ptrdiff_t>(stable_size_);
    std::nth_element(all.begin(), cut, all.end(), keep_first);
    double removed_max = 0.0;
    std::vector<Key> doomed;
    doomed.reserve(all.size() - stable_size_);
    for (auto it = cut; it != all.end(); ++it) {
      removed_max = std::max(removed_max, it->second.count);
      doomed.push_back(*it->first);
    }
    for (const auto& k : doomed) counts_.erase(k);
    carry_ = std::max(carry_, removed_max);
    max_carry_ = std::max(max_carry_, carry_);
  }

  /// Multiplies every count, the carry weight and the total by r.
  void decay(double r) {
    if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("retention must be in (0, 1]");
    for (auto& [k, e] : counts_) e.count *= r;
    carry_ *= r;
    total_ *= r;
    if (policy_.on_decay) maintain();
  }

  /// C[i] when tracked, else the carry weight.
  double estimate(const Key& i) const {
    auto it = counts_.find(i);
    return it == counts_.end() ? carry_ : it->second.count;
  }

  bool contains(const Key& i) const { return counts_.count(i) != 0; }

  /// Tracked items whose count reaches minFraction of the decayed total,
  /// by count descending (ties by insertion order).
  std::vector<std::pair<Key, double>> frequent(double min_fraction) const {
    const double bar = min_fraction * total_;
    std::vector<std::pair<std::pair<Key, double>, std::uint64_t>> hits;
    for (const auto& [k, e] : counts_) {
      if (e.count >= bar) hits.push_back({{k, e.count}, e.seq});
    }
    std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
      if (a.first.second != b.first.second) return a.first.second > b.first.second;
      return a.second < b.second;
    });
    std::vector<std::pair<Key, double>> out;
    out.reserve(hits.size());
    for (auto& h : hits) out.push_back(std::move(h.first));
    return out;
  }

  template <class F>
  void for_each(F&& f) const {
    for (const auto& [k, e] : counts_) f(k, e.count);
  }

  double carry() const { return carry_; }
  double max_carry() const { return max_carry_; }
  double total_weight() const { return total_; }
  std::size_t size() const { return counts_.size(); }
  std::size_t stable_size() const { return stable_size_; }
  double epsilon() const { return 1.0 / static_cast<double>(stable_size_); }
  std::size_t maintenance_runs() const { return maintenance_runs_; }

 private:
  struct Entry {
    double count = 0.0;
    std::uint64_t seq = 0;
  };

  std::size_t stable_size_;
  AmcPolicy policy_;
  std::unordered_map<Key, Entry, Hash> counts_;
  double carry_ = 0.0;
  double max_carry_ = 0.0;
  double total_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t observations_ = 0;
  std::size_t maintenance_runs_ = 0;
};

}  // namespace fastdata
