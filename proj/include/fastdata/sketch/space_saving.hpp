#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fastdata {

/// Undecayed SpaceSaving with m counters kept in a binary min-heap
/// ordered by (count, insertion sequence). A new item takes over the
/// minimum entry, inheriting its count as error.
template <class Key, class Hash = std::hash<Key>>
class SpaceSaving {
 public:
  struct Entry {
    Key key;
    double count;
    double error;
    std::uint64_t seq;
  };

  explicit SpaceSaving(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("SpaceSaving capacity must be >= 1");
    heap_.reserve(capacity);
  }

  void observe(const Key& i, double c = 1.0) {
    total_ += c;
    if (auto it = pos_.find(i); it != pos_.end()) {
      heap_[it->second].count += c;
      sift_down(it->second);
      return;
    }
    if (heap_.size() < capacity_) {
      heap_.push_back({i, c, 0.0, seq_++});
      pos_[i] = heap_.size() - 1;
      sift_up(heap_.size() - 1);
      return;
    }
    Entry& min = heap_[0];
    pos_.erase(min.key);
    const double inherited = min.count;
    min = {i, inherited + c, inherited, seq_++};
    pos_[i] = 0;
    sift_down(0);
  }

  /// Upper-bound estimate: the counter value, or the minimum counter for
  /// untracked items once the table is full.
  double estimate(const Key& i) const {
    if (auto it = pos_.find(i); it != pos_.end()) return heap_[it->second].count;
    return heap_.size() < capacity_ ? 0.0 : heap_[0].count;
  }

  bool contains(const Key& i) const { return pos_.count(i) != 0; }
  const std::vector<Entry>& entries() const { return heap_; }
  double total_weight() const { return total_; }
  std::size_t size() const { return heap_.size(); }

 private:
  static bool less(const Entry& a, const Entry& b) {
    return a.count != b.count ? a.count < b.count : a.seq < b.seq;
  }

  void swap_at(std::size_t a, std::size_t b) {
    std::swap(heap_[a], heap_[b]);
    pos_[heap_[a].key] = a;
    pos_[heap_[b].key] = b;
  }

  void sift_up(std::size_t i) {
    while (i > 0) {
      const std::size_t parent = (i - 1) / 2;
      if (!less(heap_[i], heap_[parent])) break;
      swap_at(i, parent);
      i = parent;
    }
  }

  void sift_down(std::size_t i) {
    const std::size_t n = heap_.size();
    for (;;) {
      std::size_t smallest = i;
      const std::size_t l = 2 * i + 1, r = l + 1;
      if (l < n && less(heap_[l], heap_[smallest])) smallest = l;
      if (r < n && less(heap_[r], heap_[smallest])) smallest = r;
      if (smallest == i) return;
      swap_at(i, smallest);
      i = smallest;
    }
  }

  std::size_t capacity_;
  std::vector<Entry> heap_;
  std::unordered_map<Key, std::size_t, Hash> pos_;
  double total_ = 0.0;
  std::uint64_t seq_ = 0;
};

}  // namespace fastdata
