#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "fastdata/explain/batch.hpp"
#include "fastdata/explain/fpgrowth.hpp"
#include "fastdata/explain/itemset_counter.hpp"
#include "fastdata/explain/risk_ratio.hpp"
#include "fastdata/sketch/amc.hpp"
#include "fastdata/stream/mcps_tree.hpp"

namespace fastdata {

inline constexpr const char* kFlagInlierUpperBound = "inlier-count-upper-bound";
inline constexpr const char* kFlagInlierLowerConfidence = "inlier-count-lower-confidence";

struct SingletonStats {
  double ao = 0, ai = 0, bo = 0, bi = 0;
  double risk_ratio = 0;
  double outlier_support = 0;
};

/// Streaming counterpart of explain_batch. Single attributes are counted
/// by one AMC per class; combinations live in one M-CPS-tree per class,
/// holding only items that were frequent among outliers at the last
/// window boundary. Until the first boundary both trees take every item.
class StreamingSummarizer {
 public:
  StreamingSummarizer(std::size_t stable_size, double min_support, AmcPolicy policy = {})
      : outlier_amc_(stable_size, policy), inlier_amc_(stable_size, policy), min_support_(min_support) {}

  void observe(bool outlier, std::span<const AttributeId> attrs, double weight = 1.0) {
    buf_.clear();
    for (AttributeId a : attrs)
      if (a != kNullAttribute) buf_.push_back(a);
    std::sort(buf_.begin(), buf_.end());
    buf_.erase(std::unique(buf_.begin(), buf_.end()), buf_.end());

    auto& amc = outlier ? outlier_amc_ : inlier_amc_;
    for (AttributeId a : buf_) amc.observe(a, weight);
    (outlier ? outlier_weight_ : inlier_weight_) += weight;

    if (windows_ > 0) {
      std::erase_if(buf_, [&](AttributeId a) { return !eligible_.count(a); });
    }
    (outlier ? outlier_tree_ : inlier_tree_).insert(buf_, weight);
  }

  /// Window boundary: decay everything by r, refresh the eligible set from
  /// the outlier AMC and rebuild both trees in the new rank order. Items
  /// that just became eligible start at their AMC estimates.
  void advance_window(double r) {
    outlier_amc_.decay(r);
    inlier_amc_.decay(r);
    outlier_weight_ *= r;
    inlier_weight_ *= r;
    outlier_tree_.decay(r);
    inlier_tree_.decay(r);

    std::unordered_set<AttributeId> next;
    std::vector<std::pair<AttributeId, double>> ranked;
    outlier_amc_.for_each([&](AttributeId a, double c) {
      if (meets_support(c, outlier_weight_, min_support_)) {
        next.insert(a);
        ranked.emplace_back(a, c);
      }
    });
    std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
      return x.second != y.second ? x.second > y.second : x.first < y.first;
    });
    MCpsTree::RankMap ranks;
    for (std::size_t i = 0; i < ranked.size(); ++i) ranks[ranked[i].first] = static_cast<std::int32_t>(i);

    outlier_tree_.restructure(next, ranks);
    inlier_tree_.restructure(next, ranks);
    if (windows_ > 0) {
      for (AttributeId a : next) {
        if (eligible_.count(a)) continue;
        const AttributeId one[] = {a};
        outlier_tree_.insert(one, outlier_amc_.estimate(a));
        inlier_tree_.insert(one, inlier_amc_.estimate(a));
      }
    }
    eligible_ = std::move(next);
    ++windows_;
  }

  /// Explanations for the current state; does not modify it.
  BatchExplanation emit(const ExplainOptions& o) const {
    BatchExplanation res;
    if (!(outlier_weight_ > 0.0)) {
      res.warnings.push_back("no outliers: nothing to explain");
      return res;
    }
    const double wo = outlier_weight_, wi = inlier_weight_;
    std::size_t single_tests = 0;
    std::vector<bool> keep;
    std::vector<std::pair<AttributeId, double>> singles;
    outlier_amc_.for_each([&](AttributeId a, double c) { singles.emplace_back(a, c); });
    std::sort(singles.begin(), singles.end());
    for (const auto& [a, ao] : singles) {
      if (!meets_support(ao, wo, o.min_support)) continue;
      ++single_tests;
      const double ai = inlier_amc_.estimate(a);
      auto rec = make_record({a}, ao, ai, std::max(0.0, wo - ao), std::max(0.0, wi - ai));
      if (!(rec.risk_ratio >= o.min_risk_ratio)) continue;
      if (!inlier_amc_.contains(a) && inlier_amc_.carry() > 0.0) rec.flags.emplace_back(kFlagInlierUpperBound);
      if (static_cast<std::size_t>(a) >= keep.size()) keep.resize(static_cast<std::size_t>(a) + 1, false);
      keep[static_cast<std::size_t>(a)] = true;
      res.records.push_back(std::move(rec));
    }

    TransactionSet tx;
    std::vector<AttributeId> items;
    for (const auto& p : outlier_tree_.paths()) {
      items.clear();
      for (AttributeId a : p.items)
        if (static_cast<std::size_t>(a) < keep.size() && keep[static_cast<std::size_t>(a)]) items.push_back(a);
      if (items.size() < 2) continue;
      std::sort(items.begin(), items.end());
      tx.add(items, p.count);
    }
    std::vector<Itemset> candidates;
    std::vector<double> candidate_ao;
    if (tx.size() > 0) {
      for (auto& f : fpgrowth(tx, min_count_for(wo, o.min_support))) {
        if (f.items.size() < 2) continue;
        candidates.push_back(std::move(f.items));
        candidate_ao.push_back(f.count);
      }
    }
    detail::ComboCounts cc;
    if (!candidates.empty()) {
      ItemsetCounter counter(candidates);
      for (const auto& p : inlier_tree_.paths()) {
        items = p.items;
        std::sort(items.begin(), items.end());
        counter.count(items, p.count);
      }
      for (std::size_t i = 0; i < candidates.size(); ++i)
        cc.counts.emplace(candidates[i], std::make_pair(candidate_ao[i], counter.counts()[i]));
    }
    const std::size_t first_combo = res.records.size();
    detail::emit_combinations(cc, wo, wi, o, res.records);
    for (std::size_t i = first_combo; i < res.records.size(); ++i) {
      auto& r = res.records[i];
      if (r.ai == 0.0) r.flags.emplace_back(kFlagInlierLowerConfidence);
    }
    res.stats.candidates = candidates.size();
    res.num_tests = single_tests + candidates.size();
    for (auto& r : res.records) r.num_tests = std::max<std::size_t>(1, res.num_tests);
    return res;
  }

  /// Counts and risk ratio of one item regardless of thresholds.
  SingletonStats singleton_stats(AttributeId a) const {
    SingletonStats s;
    s.ao = outlier_amc_.estimate(a);
    s.ai = inlier_amc_.estimate(a);
    s.bo = std::max(0.0, outlier_weight_ - s.ao);
    s.bi = std::max(0.0, inlier_weight_ - s.ai);
    s.risk_ratio = risk_ratio(s.ao, s.ai, s.bo, s.bi);
    s.outlier_support = outlier_weight_ > 0.0 ? s.ao / outlier_weight_ : 0.0;
    return s;
  }

  std::size_t fingerprint() const {
    std::size_t h = outlier_tree_.fingerprint() * 31 + inlier_tree_.fingerprint();
    h = h * 31 + std::hash<double>{}(outlier_weight_);
    h = h * 31 + std::hash<double>{}(inlier_weight_);
    h = h * 31 + outlier_amc_.size() * 7 + inlier_amc_.size();
    return h;
  }

  double outlier_weight() const { return outlier_weight_; }
  double inlier_weight() const { return inlier_weight_; }
  std::size_t windows() const { return windows_; }
  const std::unordered_set<AttributeId>& eligible() const { return eligible_; }
  const MCpsTree& outlier_tree() const { return outlier_tree_; }
  const MCpsTree& inlier_tree() const { return inlier_tree_; }
  const AmortizedMaintenanceCounter<AttributeId>& outlier_amc() const { return outlier_amc_; }
  const AmortizedMaintenanceCounter<AttributeId>& inlier_amc() const { return inlier_amc_; }

 private:
  AmortizedMaintenanceCounter<AttributeId> outlier_amc_;
  AmortizedMaintenanceCounter<AttributeId> inlier_amc_;
  MCpsTree outlier_tree_;
  MCpsTree inlier_tree_;
  double min_support_;
  double outlier_weight_ = 0.0;
  double inlier_weight_ = 0.0;
  std::size_t windows_ = 0;
  std::unordered_set<AttributeId> eligible_;
  std::vector<AttributeId> buf_;
};

}  // namespace fastdata
