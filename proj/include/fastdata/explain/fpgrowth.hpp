#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fastdata/core/point.hpp"

namespace fastdata {

using Itemset = std::vector<AttributeId>;

struct FrequentItemset {
  Itemset items;  // ascending ids
  double count;
};

struct FpStats {
  std::size_t nodes = 0;             // nodes created over all trees
  std::size_t conditional_trees = 0;
};

/// Weighted transactions in compressed-row form.
class TransactionSet {
 public:
  void add(std::span<const AttributeId> items, double weight = 1.0) {
    items_.insert(items_.end(), items.begin(), items.end());
    offsets_.push_back(items_.size());
    weights_.push_back(weight);
  }

  std::size_t size() const { return weights_.size(); }
  std::span<const AttributeId> operator[](std::size_t i) const {
    return {items_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  double weight(std::size_t i) const { return weights_[i]; }
  void reserve(std::size_t n, std::size_t items) {
    offsets_.reserve(n + 1);
    weights_.reserve(n);
    items_.reserve(items);
  }

 private:
  std::vector<AttributeId> items_;
  std::vector<std::size_t> offsets_{0};
  std::vector<double> weights_;
};

/// Prefix tree over rank-encoded transactions (rank 0 = most frequent).
/// Built by sorting the transactions lexicographically and walking them
/// in order, so each node's children never need a lookup structure.
class FpTree {
 public:
  struct Node {
    std::int32_t rank;
    std::int32_t parent;  // -1: child of the root
    double count;
  };

  /// paths: ascending rank sequences with weights.
  FpTree(const std::vector<std::int32_t>& flat, const std::vector<std::size_t>& offsets,
         const std::vector<double>& weights, std::size_t n_ranks)
      : header_(n_ranks) {
    const std::size_t n = weights.size();
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    auto path = [&](std::uint32_t t) {
      return std::span<const std::int32_t>(flat.data() + offsets[t], offsets[t + 1] - offsets[t]);
    };
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      auto pa = path(a), pb = path(b);
      return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
    });
    std::vector<std::int32_t> stack;
    std::span<const std::int32_t> prev;
    for (auto t : order) {
      auto p = path(t);
      const double w = weights[t];
      if (p.empty() || !(w > 0.0)) continue;
      std::size_t common = 0;
      while (common < p.size() && common < prev.size() && p[common] == prev[common]) ++common;
      stack.resize(common);
      for (auto idx : stack) nodes_[static_cast<std::size_t>(idx)].count += w;
      for (std::size_t j = common; j < p.size(); ++j) {
        const auto idx = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back({p[j], stack.empty() ? -1 : stack.back(), w});
        header_[static_cast<std::size_t>(p[j])].push_back(idx);
        stack.push_back(idx);
      }
      prev = p;
    }
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<std::int32_t>& header(std::size_t rank) const { return header_[rank]; }
  std::size_t ranks() const { return header_.size(); }

 private:
  std::vector<Node> nodes_;
  std::vector<std::vector<std::int32_t>> header_;
};

namespace detail {

struct FpMiner {
  double min_count;
  const std::vector<AttributeId>& rank_to_item;
  std::vector<FrequentItemset>& out;
  FpStats& stats;

  // suffix holds ranks; tree ranks index rank_to_item.
  void mine(const FpTree& tree, std::vector<std::int32_t>& suffix) {
    stats.nodes += tree.nodes().size();
    for (std::size_t r = tree.ranks(); r-- > 0;) {
      const auto& hdr = tree.header(r);
      if (hdr.empty()) continue;
      double support = 0.0;
      for (auto idx : hdr) support += tree.nodes()[static_cast<std::size_t>(idx)].count;
      if (support < min_count) continue;
      suffix.push_back(static_cast<std::int32_t>(r));
      Itemset items;
      items.reserve(suffix.size());
      for (auto s : suffix) items.push_back(rank_to_item[static_cast<std::size_t>(s)]);
      std::sort(items.begin(), items.end());
      out.push_back({std::move(items), support});

      // Conditional pattern base: prefix paths of every node of rank r.
      std::vector<double> item_support(r, 0.0);
      for (auto idx : hdr) {
        const auto& node = tree.nodes()[static_cast<std::size_t>(idx)];
        for (auto p = node.parent; p >= 0; p = tree.nodes()[static_cast<std::size_t>(p)].parent)
          item_support[static_cast<std::size_t>(tree.nodes()[static_cast<std::size_t>(p)].rank)] += node.count;
      }
      bool any = false;
      for (double s : item_support) any = any || s >= min_count;
      if (any) {
        std::vector<std::int32_t> flat;
        std::vector<std::size_t> offsets{0};
        std::vector<double> weights;
        std::vector<std::int32_t> buf;
        for (auto idx : hdr) {
          const auto& node = tree.nodes()[static_cast<std::size_t>(idx)];
          buf.clear();
          for (auto p = node.parent; p >= 0; p = tree.nodes()[static_cast<std::size_t>(p)].parent) {
            const auto pr = tree.nodes()[static_cast<std::size_t>(p)].rank;
            if (item_support[static_cast<std::size_t>(pr)] >= min_count) buf.push_back(pr);
          }
          if (buf.empty()) continue;
          flat.insert(flat.end(), buf.rbegin(), buf.rend());
          offsets.push_back(flat.size());
          weights.push_back(node.count);
        }
        if (!weights.empty()) {
          ++stats.conditional_trees;
          FpTree cond(flat, offsets, weights, r);
          mine(cond, suffix);
        }
      }
      suffix.pop_back();
    }
  }
};

}  // namespace detail

/// Every itemset whose total transaction weight reaches min_count, with
/// exact weights. Transactions must be sorted and duplicate-free.
inline std::vector<FrequentItemset> fpgrowth(const TransactionSet& tx, double min_count,
                                             FpStats* stats = nullptr) {
  FpStats local;
  FpStats& st = stats ? *stats : local;
  std::unordered_map<AttributeId, double> support;
  for (std::size_t t = 0; t < tx.size(); ++t)
    for (AttributeId a : tx[t]) support[a] += tx.weight(t);

  std::vector<std::pair<AttributeId, double>> frequent;
  for (const auto& [a, s] : support)
    if (s >= min_count && s > 0.0) frequent.emplace_back(a, s);
  std::sort(frequent.begin(), frequent.end(), [](const auto& x, const auto& y) {
    return x.second != y.second ? x.second > y.second : x.first < y.first;
  });
  std::vector<AttributeId> rank_to_item;
  std::unordered_map<AttributeId, std::int32_t> item_to_rank;
  for (const auto& [a, s] : frequent) {
    item_to_rank[a] = static_cast<std::int32_t>(rank_to_item.size());
    rank_to_item.push_back(a);
  }

  std::vector<std::int32_t> flat;
  std::vector<std::size_t> offsets{0};
  std::vector<double> weights;
  offsets.reserve(tx.size() + 1);
  weights.reserve(tx.size());
  std::vector<std::int32_t> buf;
  for (std::size_t t = 0; t < tx.size(); ++t) {
    buf.clear();
    for (AttributeId a : tx[t]) {
      if (auto it = item_to_rank.find(a); it != item_to_rank.end()) buf.push_back(it->second);
    }
    if (buf.empty()) continue;
    std::sort(buf.begin(), buf.end());
    flat.insert(flat.end(), buf.begin(), buf.end());
    offsets.push_back(flat.size());
    weights.push_back(tx.weight(t));
  }

  std::vector<FrequentItemset> out;
  if (weights.empty()) return out;
  FpTree tree(flat, offsets, weights, rank_to_item.size());
  // Release the encoded copy before mining.
  std::vector<std::int32_t>().swap(flat);
  std::vector<std::int32_t> suffix;
  detail::FpMiner miner{min_count, rank_to_item, out, st};
  miner.mine(tree, suffix);
  return out;
}

}  // namespace fastdata
