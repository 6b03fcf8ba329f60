#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fastdata/core/point.hpp"
#include "fastdata/explain/fpgrowth.hpp"
#include "fastdata/explain/itemset_counter.hpp"
#include "fastdata/explain/risk_ratio.hpp"

namespace fastdata {

struct ExplainOptions {
  double min_support = 0.001;
  double min_risk_ratio = 3.0;
  bool strict_subsets = false;  // also require every sub-combination to pass the ratio
};

struct ExplainStats {
  std::size_t inlier_expansions = 0;  // work units spent on inlier itemsets
  std::size_t outlier_fp_nodes = 0;
  std::size_t candidates = 0;         // combinations counted in the inliers
};

struct BatchExplanation {
  std::vector<ExplanationRecord> records;  // unranked
  std::size_t num_tests = 0;
  ExplainStats stats;
  std::vector<std::string> warnings;
};

/// Per-item counts among outliers and inliers.
struct AttributeCounts {
  std::unordered_map<AttributeId, double> ao;
  std::unordered_map<AttributeId, double> ai;
  double outlier_total = 0.0;
  double inlier_total = 0.0;

  double outliers_with(AttributeId a) const {
    auto it = ao.find(a);
    return it == ao.end() ? 0.0 : it->second;
  }
  double inliers_with(AttributeId a) const {
    auto it = ai.find(a);
    return it == ai.end() ? 0.0 : it->second;
  }
};

template <class Tx>
AttributeCounts count_single_attributes(std::span<const Tx> outliers, std::span<const Tx> inliers) {
  AttributeCounts c;
  std::vector<AttributeId> buf;
  for (const auto& t : outliers) {
    detail::normalize_into(t, buf);
    for (auto a : buf) c.ao[a] += 1.0;
  }
  for (const auto& t : inliers) {
    detail::normalize_into(t, buf);
    for (auto a : buf) c.ai[a] += 1.0;
  }
  c.outlier_total = static_cast<double>(outliers.size());
  c.inlier_total = static_cast<double>(inliers.size());
  return c;
}

namespace detail {

/// Items passing both single-attribute filters, and the number of
/// single-attribute ratio tests (items with enough support).
inline std::vector<AttributeId> stage_one(const AttributeCounts& c, const ExplainOptions& o,
                                          std::size_t* tests) {
  std::vector<AttributeId> keep;
  *tests = 0;
  for (const auto& [a, ao] : c.ao) {
    if (!meets_support(ao, c.outlier_total, o.min_support)) continue;
    ++*tests;
    const double ai = c.inliers_with(a);
    if (risk_ratio(ao, ai, c.outlier_total - ao, c.inlier_total - ai) >= o.min_risk_ratio)
      keep.push_back(a);
  }
  std::sort(keep.begin(), keep.end());
  return keep;
}

inline ExplanationRecord single_record(const AttributeCounts& c, AttributeId a) {
  const double ao = c.outliers_with(a), ai = c.inliers_with(a);
  return make_record({a}, ao, ai, c.outlier_total - ao, c.inlier_total - ai);
}

struct ComboCounts {
  std::map<Itemset, std::pair<double, double>> counts;  // itemset -> (ao, ai)
};

/// Applies the combination filters shared by every explainer: ratio on
/// the full itemset and, in strict mode, on every sub-combination of
/// size >= 2.
inline void emit_combinations(const ComboCounts& cc, double n_out, double n_in,
                              const ExplainOptions& o, std::vector<ExplanationRecord>& out) {
  for (const auto& [items, c] : cc.counts) {
    auto rec = make_record(items, c.first, c.second, std::max(0.0, n_out - c.first),
                           std::max(0.0, n_in - c.second));
    if (!(rec.risk_ratio >= o.min_risk_ratio)) continue;
    if (o.strict_subsets && items.size() > 2) {
      bool ok = true;
      const std::size_t m = items.size();
      for (std::uint64_t mask = 1; ok && mask + 1 < (std::uint64_t{1} << m); ++mask) {
        if (std::popcount(mask) < 2) continue;
        Itemset sub;
        for (std::size_t j = 0; j < m; ++j)
          if (mask >> j & 1) sub.push_back(items[j]);
        auto it = cc.counts.find(sub);
        if (it == cc.counts.end()) {
          ok = false;
          break;
        }
        const auto& s = it->second;
        ok = risk_ratio(s.first, s.second, std::max(0.0, n_out - s.first),
                        std::max(0.0, n_in - s.second)) >= o.min_risk_ratio;
      }
      if (!ok) continue;
    }
    out.push_back(std::move(rec));
  }
}

}  // namespace detail

/// Cardinality-aware explanation. Stage 1 keeps single attribute values
/// with enough outlier support and risk ratio; stage 2 mines the outlier
/// transactions, restricted to those values, for combinations with
/// enough support; stage 3 counts only those combinations in the inliers
/// and keeps the ones whose risk ratio passes.
template <class Tx>
BatchExplanation explain_batch(std::span<const Tx> outliers, std::span<const Tx> inliers,
                               const ExplainOptions& o) {
  BatchExplanation res;
  if (outliers.empty()) {
    res.warnings.push_back("no outliers: nothing to explain");
    return res;
  }
  const AttributeCounts c = count_single_attributes(outliers, inliers);
  std::size_t single_tests = 0;
  const auto survivors = detail::stage_one(c, o, &single_tests);
  for (auto a : survivors) res.records.push_back(detail::single_record(c, a));

  // Stage 2: outlier transactions restricted to survivors.
  std::vector<bool> keep;
  for (auto a : survivors) {
    if (static_cast<std::size_t>(a) >= keep.size()) keep.resize(static_cast<std::size_t>(a) + 1, false);
    keep[static_cast<std::size_t>(a)] = true;
  }
  auto is_kept = [&](AttributeId a) { return a >= 0 && static_cast<std::size_t>(a) < keep.size() && keep[static_cast<std::size_t>(a)]; };
  TransactionSet tx;
  std::vector<AttributeId> buf, filtered;
  for (const auto& t : outliers) {
    detail::normalize_into(t, buf);
    filtered.clear();
    for (auto a : buf)
      if (is_kept(a)) filtered.push_back(a);
    if (filtered.size() >= 2) tx.add(filtered);
  }
  FpStats fp;
  std::vector<FrequentItemset> frequent;
  if (tx.size() > 0) frequent = fpgrowth(tx, min_count_for(c.outlier_total, o.min_support), &fp);
  res.stats.outlier_fp_nodes = fp.nodes;

  std::vector<Itemset> candidates;
  std::vector<double> candidate_ao;
  for (auto& f : frequent) {
    if (f.items.size() < 2) continue;
    candidates.push_back(std::move(f.items));
    candidate_ao.push_back(f.count);
  }

  // Stage 3: one pass over the inliers, counting candidates only.
  detail::ComboCounts cc;
  if (!candidates.empty()) {
    ItemsetCounter counter(candidates);
    for (const auto& t : inliers) {
      detail::normalize_into(t, buf);
      counter.count(buf);
    }
    res.stats.inlier_expansions = counter.visits();
    for (std::size_t i = 0; i < candidates.size(); ++i)
      cc.counts.emplace(candidates[i], std::make_pair(candidate_ao[i], counter.counts()[i]));
  }
  res.stats.candidates = candidates.size();
  detail::emit_combinations(cc, c.outlier_total, c.inlier_total, o, res.records);
  res.num_tests = single_tests + candidates.size();
  for (auto& r : res.records) r.num_tests = std::max<std::size_t>(1, res.num_tests);
  return res;
}

/// Unoptimized baseline: mine the outliers and the inliers separately
/// with FP-growth, then join. Outlier combinations that are not frequent
/// among the inliers get an exact supplementary count so the output
/// matches explain_batch.
template <class Tx>
BatchExplanation explain_two_pass(std::span<const Tx> outliers, std::span<const Tx> inliers,
                                  const ExplainOptions& o) {
  BatchExplanation res;
  if (outliers.empty()) {
    res.warnings.push_back("no outliers: nothing to explain");
    return res;
  }
  const double n_out = static_cast<double>(outliers.size());
  const double n_in = static_cast<double>(inliers.size());
  std::vector<AttributeId> buf;
  TransactionSet out_tx, in_tx;
  for (const auto& t : outliers) {
    detail::normalize_into(t, buf);
    out_tx.add(buf);
  }
  for (const auto& t : inliers) {
    detail::normalize_into(t, buf);
    in_tx.add(buf);
  }
  FpStats out_stats, in_stats;
  auto out_sets = fpgrowth(out_tx, min_count_for(n_out, o.min_support), &out_stats);
  auto in_sets = inliers.empty() ? std::vector<FrequentItemset>{}
                                 : fpgrowth(in_tx, min_count_for(n_in, o.min_support), &in_stats);
  res.stats.outlier_fp_nodes = out_stats.nodes;
  res.stats.inlier_expansions = in_stats.nodes;

  std::map<Itemset, double> inlier_counts;
  for (auto& f : in_sets) inlier_counts.emplace(std::move(f.items), f.count);

  std::vector<Itemset> missing;
  for (const auto& f : out_sets) {
    if (!inlier_counts.count(f.items)) missing.push_back(f.items);
  }
  if (!missing.empty()) {
    ItemsetCounter counter(missing);
    for (std::size_t t = 0; t < in_tx.size(); ++t) counter.count(in_tx[t]);
    res.stats.inlier_expansions += counter.visits();
    for (std::size_t i = 0; i < missing.size(); ++i) inlier_counts.emplace(missing[i], counter.counts()[i]);
  }

  std::size_t single_tests = 0;
  std::vector<bool> survivor;
  for (const auto& f : out_sets) {
    if (f.items.size() != 1) continue;
    const AttributeId a = f.items[0];
    ++single_tests;
    const double ai = inlier_counts.at(f.items);
    auto rec = make_record(f.items, f.count, ai, n_out - f.count, n_in - ai);
    if (rec.risk_ratio >= o.min_risk_ratio) {
      if (static_cast<std::size_t>(a) >= survivor.size()) survivor.resize(static_cast<std::size_t>(a) + 1, false);
      survivor[static_cast<std::size_t>(a)] = true;
      res.records.push_back(std::move(rec));
    }
  }
  detail::ComboCounts cc;
  for (const auto& f : out_sets) {
    if (f.items.size() < 2) continue;
    const bool all = std::all_of(f.items.begin(), f.items.end(), [&](AttributeId a) {
      return static_cast<std::size_t>(a) < survivor.size() && survivor[static_cast<std::size_t>(a)];
    });
    if (all) cc.counts.emplace(f.items, std::make_pair(f.count, inlier_counts.at(f.items)));
  }
  res.stats.candidates = cc.counts.size();
  detail::emit_combinations(cc, n_out, n_in, o, res.records);
  res.num_tests = single_tests + cc.counts.size();
  for (auto& r : res.records) r.num_tests = std::max<std::size_t>(1, res.num_tests);
  return res;
}

}  // namespace fastdata
