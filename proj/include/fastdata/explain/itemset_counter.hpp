#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fastdata/core/point.hpp"

namespace fastdata {

/// Trie over a fixed set of candidate itemsets. count() adds a
/// transaction's weight to every candidate contained in it, visiting only
/// trie nodes that are subsets of the transaction.
class ItemsetCounter {
 public:
  explicit ItemsetCounter(const std::vector<std::vector<AttributeId>>& candidates)
      : counts_(candidates.size(), 0.0) {
    nodes_.push_back({});
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      std::int32_t cur = 0;
      for (AttributeId a : candidates[c]) {
        if (a >= 0 && static_cast<std::size_t>(a) >= universe_.size()) universe_.resize(static_cast<std::size_t>(a) + 1, false);
        if (a >= 0) universe_[static_cast<std::size_t>(a)] = true;
        auto& kids = nodes_[static_cast<std::size_t>(cur)].children;
        auto it = std::lower_bound(kids.begin(), kids.end(), a,
                                   [](const auto& k, AttributeId v) { return k.first < v; });
        if (it != kids.end() && it->first == a) {
          cur = it->second;
        } else {
          const auto idx = static_cast<std::int32_t>(nodes_.size());
          kids.insert(it, {a, idx});
          nodes_.push_back({});
          cur = idx;
        }
      }
      nodes_[static_cast<std::size_t>(cur)].candidate = static_cast<std::int32_t>(c);
    }
  }

  /// tx must be sorted ascending and duplicate-free.
  void count(std::span<const AttributeId> tx, double weight = 1.0) {
    buf_.clear();
    for (AttributeId a : tx) {
      if (a >= 0 && static_cast<std::size_t>(a) < universe_.size() && universe_[static_cast<std::size_t>(a)])
        buf_.push_back(a);
    }
    if (!buf_.empty()) visit(0, 0, weight);
  }

  const std::vector<double>& counts() const { return counts_; }
  std::size_t visits() const { return visits_; }

 private:
  struct Node {
    std::vector<std::pair<AttributeId, std::int32_t>> children;  // sorted by item
    std::int32_t candidate = -1;
  };

  void visit(std::int32_t node, std::size_t start, double weight) {
    const auto& kids = nodes_[static_cast<std::size_t>(node)].children;
    if (kids.empty()) return;
    auto lo = kids.begin();
    for (std::size_t j = start; j < buf_.size() && lo != kids.end(); ++j) {
      lo = std::lower_bound(lo, kids.end(), buf_[j],
                            [](const auto& k, AttributeId v) { return k.first < v; });
      if (lo == kids.end()) break;
      if (lo->first != buf_[j]) continue;
      ++visits_;
      const auto child = lo->second;
      if (auto c = nodes_[static_cast<std::size_t>(child)].candidate; c >= 0)
        counts_[static_cast<std::size_t>(c)] += weight;
      visit(child, j + 1, weight);
      ++lo;
    }
  }

  std::vector<Node> nodes_;
  std::vector<double> counts_;
  std::vector<bool> universe_;
  std::vector<AttributeId> buf_;
  std::size_t visits_ = 0;
};

}  // namespace fastdata
