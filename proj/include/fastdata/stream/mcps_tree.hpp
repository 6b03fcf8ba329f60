#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "fastdata/core/point.hpp"

namespace fastdata {

/// Decayed prefix tree over the currently frequent items. Paths follow
/// the rank map (rank 0 = most frequent); items without a rank sort after
/// ranked ones, by id.
class MCpsTree {
 public:
  using RankMap = std::unordered_map<AttributeId, std::int32_t>;

  struct Path {
    std::vector<AttributeId> items;  // in tree order
    double count;                    // transactions ending at this node
  };

  MCpsTree() { nodes_.push_back({kNullAttribute, -1, 0.0, {}}); }

  void set_ranks(RankMap ranks) { ranks_ = std::move(ranks); }
  const RankMap& ranks() const { return ranks_; }

  /// Inserts one transaction (any order; duplicates must already be gone).
  void insert(std::span<const AttributeId> items, double weight = 1.0) {
    if (items.empty() || !(weight > 0.0)) return;
    buf_.assign(items.begin(), items.end());
    std::sort(buf_.begin(), buf_.end(), [&](AttributeId a, AttributeId b) { return before(a, b); });
    std::int32_t cur = 0;
    for (AttributeId a : buf_) {
      cur = child(cur, a);
      nodes_[static_cast<std::size_t>(cur)].count += weight;
    }
  }

  void decay(double r) {
    for (auto& n : nodes_) n.count *= r;
  }

  /// Every node with positive own count (its count minus its children's),
  /// as a root path. Together these reproduce the inserted transactions.
  std::vector<Path> paths() const {
    std::vector<Path> out;
    std::vector<AttributeId> stack;
    walk(0, stack, out);
    return out;
  }

  /// Rebuilds the tree from its own paths, dropping items outside
  /// `eligible` and ordering paths by `ranks`.
  void restructure(const std::unordered_set<AttributeId>& eligible, RankMap ranks) {
    auto old = paths();
    nodes_.clear();
    nodes_.push_back({kNullAttribute, -1, 0.0, {}});
    ranks_ = std::move(ranks);
    std::vector<AttributeId> kept;
    for (const auto& p : old) {
      kept.clear();
      for (AttributeId a : p.items)
        if (eligible.count(a)) kept.push_back(a);
      insert(kept, p.count);
    }
  }

  bool contains(AttributeId a) const {
    for (std::size_t i = 1; i < nodes_.size(); ++i)
      if (nodes_[i].item == a) return true;
    return false;
  }

  /// Sum of all node counts.
  double total_mass() const {
    double s = 0.0;
    for (std::size_t i = 1; i < nodes_.size(); ++i) s += nodes_[i].count;
    return s;
  }

  std::size_t node_count() const { return nodes_.size() - 1; }

  /// Checks that every path follows the rank order and every node count
  /// covers its children (up to rounding).
  bool audit() const {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      double kids = 0.0;
      for (const auto& [item, c] : nodes_[i].children) {
        const auto& k = nodes_[static_cast<std::size_t>(c)];
        kids += k.count;
        if (i != 0 && !before(nodes_[i].item, k.item)) return false;
      }
      if (i != 0 && kids > nodes_[i].count * (1 + 1e-9) + 1e-12) return false;
    }
    return true;
  }

  /// Order-sensitive digest of the tree contents.
  std::size_t fingerprint() const {
    std::size_t h = nodes_.size();
    auto mix = [&](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    for (const auto& n : nodes_) {
      mix(std::hash<AttributeId>{}(n.item));
      mix(std::hash<double>{}(n.count));
      mix(static_cast<std::size_t>(n.parent + 1));
    }
    return h;
  }

 private:
  struct Node {
    AttributeId item;
    std::int32_t parent;
    double count;
    std::vector<std::pair<AttributeId, std::int32_t>> children;
  };

  bool before(AttributeId a, AttributeId b) const {
    auto ra = ranks_.find(a), rb = ranks_.find(b);
    const auto big = std::numeric_limits<std::int32_t>::max();
    const std::int32_t ka = ra == ranks_.end() ? big : ra->second;
    const std::int32_t kb = rb == ranks_.end() ? big : rb->second;
    return ka != kb ? ka < kb : a < b;
  }

  std::int32_t child(std::int32_t parent, AttributeId a) {
    for (const auto& [item, idx] : nodes_[static_cast<std::size_t>(parent)].children)
      if (item == a) return idx;
    const auto idx = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({a, parent, 0.0, {}});
    nodes_[static_cast<std::size_t>(parent)].children.emplace_back(a, idx);
    return idx;
  }

  void walk(std::int32_t i, std::vector<AttributeId>& stack, std::vector<Path>& out) const {
    const auto& n = nodes_[static_cast<std::size_t>(i)];
    double own = n.count;
    for (const auto& [item, c] : n.children) {
      own -= nodes_[static_cast<std::size_t>(c)].count;
      stack.push_back(item);
      walk(c, stack, out);
      stack.pop_back();
    }
    if (i != 0 && own > 1e-12 * std::max(1.0, n.count)) out.push_back({stack, own});
  }

  std::vector<Node> nodes_;
  RankMap ranks_;
  std::vector<AttributeId> buf_;
};

}  // namespace fastdata
