#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "fastdata/error.hpp"
#include "fastdata/explain/batch.hpp"

namespace fastdata {

inline constexpr std::uint64_t kBruteForceLimit = std::uint64_t{1} << 20;

/// Reference explainer for small inputs: enumerates every combination of
/// values that co-occur in some outlier, counts it by direct subset tests
/// and applies the same filters as explain_batch.
template <class Tx>
BatchExplanation brute_force_explain(std::span<const Tx> outliers, std::span<const Tx> inliers,
                                     const ExplainOptions& o) {
  BatchExplanation res;
  if (outliers.empty()) {
    res.warnings.push_back("no outliers: nothing to explain");
    return res;
  }
  std::vector<std::vector<AttributeId>> out_sets, in_sets;
  std::vector<AttributeId> buf;
  std::uint64_t budget = 0;
  for (const auto& t : outliers) {
    detail::normalize_into(t, buf);
    if (buf.size() >= 20) throw CapacityError("brute-force explainer: transaction too wide");
    budget += std::uint64_t{1} << buf.size();
    if (budget > kBruteForceLimit) throw CapacityError("brute-force explainer: too many combinations");
    out_sets.push_back(buf);
  }
  for (const auto& t : inliers) {
    detail::normalize_into(t, buf);
    in_sets.push_back(buf);
  }
  const double n_out = static_cast<double>(out_sets.size());
  const double n_in = static_cast<double>(in_sets.size());

  std::map<Itemset, double> ao;
  for (const auto& t : out_sets) {
    const std::size_t m = t.size();
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << m); ++mask) {
      Itemset s;
      for (std::size_t j = 0; j < m; ++j)
        if (mask >> j & 1) s.push_back(t[j]);
      ao[s] += 1.0;
    }
  }
  auto inlier_count = [&](const Itemset& s) {
    double n = 0.0;
    for (const auto& t : in_sets)
      if (std::includes(t.begin(), t.end(), s.begin(), s.end())) n += 1.0;
    return n;
  };

  std::size_t tests = 0;
  std::map<AttributeId, bool> survives;
  for (const auto& [s, count] : ao) {
    if (s.size() != 1 || !meets_support(count, n_out, o.min_support)) continue;
    ++tests;
    const double ai = inlier_count(s);
    auto rec = make_record(s, count, ai, n_out - count, n_in - ai);
    survives[s[0]] = rec.risk_ratio >= o.min_risk_ratio;
    if (survives[s[0]]) res.records.push_back(std::move(rec));
  }
  detail::ComboCounts cc;
  for (const auto& [s, count] : ao) {
    if (s.size() < 2 || !meets_support(count, n_out, o.min_support)) continue;
    const bool all = std::all_of(s.begin(), s.end(), [&](AttributeId a) {
      auto it = survives.find(a);
      return it != survives.end() && it->second;
    });
    if (!all) continue;
    cc.counts.emplace(s, std::make_pair(count, inlier_count(s)));
  }
  detail::emit_combinations(cc, n_out, n_in, o, res.records);
  res.num_tests = tests + cc.counts.size();
  for (auto& r : res.records) r.num_tests = std::max<std::size_t>(1, res.num_tests);
  return res;
}

}  // namespace fastdata
