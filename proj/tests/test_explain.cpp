#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace fastdata;
using Tx = std::vector<AttributeId>;

namespace {

std::vector<FrequentItemset> sorted(std::vector<FrequentItemset> v) {
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.items < b.items; });
  return v;
}

// Every itemset of some transaction with count >= min_count, by enumeration.
std::map<Itemset, double> brute_frequent(const std::vector<Tx>& txs, double min_count) {
  std::map<Itemset, double> all;
  for (const auto& t : txs) {
    const std::size_t m = t.size();
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << m); ++mask) {
      Itemset s;
      for (std::size_t i = 0; i < m; ++i)
        if (mask >> i & 1) s.push_back(t[i]);
      all[s] += 1.0;
    }
  }
  std::erase_if(all, [&](const auto& kv) { return kv.second < min_count; });
  return all;
}

}  // namespace

TEST(RiskRatio, Formula) {
  EXPECT_NEAR(risk_ratio(500, 80191, 390, 10731), 0.1767, 5e-5);
  EXPECT_DOUBLE_EQ(risk_ratio(0, 0, 5, 5), 0.0);
  EXPECT_EQ(risk_ratio(5, 1, 0, 10), kInfinity);
  EXPECT_THROW(risk_ratio(-1, 1, 1, 1), std::invalid_argument);
  const auto r = make_record({1}, 30, 10, 70, 890);
  EXPECT_DOUBLE_EQ(r.outlier_support, 0.3);
  EXPECT_DOUBLE_EQ(r.risk_ratio, (30.0 / 40.0) / (70.0 / 960.0));
}

TEST(FpGrowth, SmallExample) {
  TransactionSet tx;
  tx.add(Tx{0, 1});
  tx.add(Tx{0, 1});
  tx.add(Tx{0, 2});
  const auto f = sorted(fpgrowth(tx, 2));
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[0].items, (Itemset{0}));
  EXPECT_DOUBLE_EQ(f[0].count, 3);
  EXPECT_EQ(f[1].items, (Itemset{0, 1}));
  EXPECT_DOUBLE_EQ(f[1].count, 2);
  EXPECT_EQ(f[2].items, (Itemset{1}));
  EXPECT_DOUBLE_EQ(f[2].count, 2);
}

TEST(FpGrowth, WeightedTransactions) {
  TransactionSet tx;
  tx.add(Tx{3, 4}, 0.5);
  tx.add(Tx{3}, 1.25);
  const auto f = sorted(fpgrowth(tx, 0.5));
  ASSERT_EQ(f.size(), 3u);
  EXPECT_DOUBLE_EQ(f[0].count, 1.75);
  EXPECT_DOUBLE_EQ(f[1].count, 0.5);
}

TEST(FpGrowth, MatchesEnumeration) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const auto inst = test::random_instance(seed, 8, 300);
    TransactionSet tx;
    for (const auto& t : inst.outliers) tx.add(t);
    const double min_count = std::max(1.0, std::floor(0.05 * static_cast<double>(inst.outliers.size())));
    const auto expect = brute_frequent(inst.outliers, min_count);
    const auto got = fpgrowth(tx, min_count);
    ASSERT_EQ(got.size(), expect.size()) << "seed " << seed;
    for (const auto& f : got) {
      auto it = expect.find(f.items);
      ASSERT_NE(it, expect.end());
      EXPECT_DOUBLE_EQ(f.count, it->second);
    }
  }
}

TEST(ItemsetCounter, CountsSubsetsOfTransactions) {
  ItemsetCounter c({{1}, {1, 3}, {2, 3}, {1, 2, 3}});
  c.count(Tx{1, 2, 3});
  c.count(Tx{1, 3}, 2.0);
  c.count(Tx{2});
  EXPECT_EQ(c.counts(), (std::vector<double>{3, 3, 1, 1}));
}

TEST(ExplainBatch, PlantedAttributeFound) {
  // Attribute 7 appears in 80% of outliers and 1% of inliers.
  std::vector<Tx> out, in;
  for (int i = 0; i < 100; ++i) out.push_back(i < 80 ? Tx{7} : Tx{1});
  for (int i = 0; i < 1000; ++i) in.push_back(i < 10 ? Tx{7, 1} : Tx{1, 2});
  const auto res = explain_batch<Tx>(out, in, {0.1, 3.0, false});
  auto recs = res.records;
  rank_explanations(recs);
  ASSERT_FALSE(recs.empty());
  EXPECT_EQ(recs[0].items, (Itemset{7}));
  EXPECT_DOUBLE_EQ(recs[0].ao, 80);
  EXPECT_DOUBLE_EQ(recs[0].ai, 10);
  EXPECT_DOUBLE_EQ(recs[0].bo, 20);
  EXPECT_DOUBLE_EQ(recs[0].bi, 990);
  for (const auto& r : recs) {
    EXPECT_GE(r.outlier_support, 0.1);
    EXPECT_GE(r.risk_ratio, 3.0);
  }
}

TEST(ExplainBatch, NoOutliersWarns) {
  std::vector<Tx> out, in{{1}};
  const auto res = explain_batch<Tx>(out, in, {});
  EXPECT_TRUE(res.records.empty());
  EXPECT_FALSE(res.warnings.empty());
}

TEST(ExplainBatch, NullAttributesNeverMined) {
  std::vector<Tx> out(10, Tx{kNullAttribute, 4}), in(100, Tx{kNullAttribute, 5});
  const auto res = explain_batch<Tx>(out, in, {0.1, 3.0, false});
  for (const auto& r : res.records)
    for (auto a : r.items) EXPECT_NE(a, kNullAttribute);
}

TEST(ExplainBatch, MatchesBruteForceAndTwoPass) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto inst = test::random_instance(seed);
    for (const ExplainOptions o : {ExplainOptions{0.05, 2.0, false}, ExplainOptions{0.2, 1.5, true}}) {
      const auto a = explain_batch<Tx>(inst.outliers, inst.inliers, o);
      const auto b = brute_force_explain<Tx>(inst.outliers, inst.inliers, o);
      const auto c = explain_two_pass<Tx>(inst.outliers, inst.inliers, o);
      ASSERT_TRUE(test::same_up_to(a.records, b.records)) << "seed " << seed;
      ASSERT_TRUE(test::same_up_to(a.records, c.records)) << "seed " << seed;
      EXPECT_EQ(a.num_tests, b.num_tests) << "seed " << seed;
    }
  }
}

TEST(ExplainBatch, StrictSubsetsPrunesCombinations) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto inst = test::random_instance(seed);
    const auto loose = explain_batch<Tx>(inst.outliers, inst.inliers, {0.05, 2.0, false});
    const auto strict = explain_batch<Tx>(inst.outliers, inst.inliers, {0.05, 2.0, true});
    EXPECT_LE(strict.records.size(), loose.records.size());
    const auto lk = test::keys_of(loose.records);
    for (const auto& k : test::keys_of(strict.records))
      EXPECT_TRUE(std::binary_search(lk.begin(), lk.end(), k));
  }
}

TEST(ExplainBatch, PointInputs) {
  std::vector<Point> out, in;
  for (int i = 0; i < 20; ++i) out.push_back(test::point({1}, {0, 1}));
  for (int i = 0; i < 200; ++i) in.push_back(test::point({1}, {i % 2 == 0 ? 2 : 0, 3}));
  const auto res = explain_batch<Point>(out, in, {0.1, 3.0, false});
  const auto keys = test::keys_of(res.records);
  ASSERT_FALSE(keys.empty());
  bool found = false;
  for (const auto& r : res.records) {
    if (r.items == Itemset{1}) {
      found = true;
      EXPECT_DOUBLE_EQ(r.ao, 20);
      EXPECT_DOUBLE_EQ(r.ai, 0);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Confidence, NormalQuantile) {
  EXPECT_NEAR(normal_quantile(0.975), 1.959963985, 1e-8);
  EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-12);
  EXPECT_NEAR(normal_quantile(0.01), -2.326347874, 1e-8);
  EXPECT_NEAR(critical_z(0.05, 100), 3.4807564, 1e-6);
  EXPECT_THROW(critical_z(0.05, 0), std::invalid_argument);
}

TEST(Confidence, IntervalOracleValues) {
  const auto ci = risk_ratio_interval(100, 900, 900, 98100, critical_z(0.05, 1));
  ASSERT_TRUE(ci.has_value());
  EXPECT_NEAR(ci->first, 9.033243, 5e-6);
  EXPECT_NEAR(ci->second, 13.394967, 5e-6);
  const auto b = risk_ratio_interval(100, 900, 900, 98100, critical_z(0.05, 100));
  EXPECT_NEAR(b->first, 7.752893, 5e-6);
  EXPECT_NEAR(b->second, 15.607077, 5e-6);
}

TEST(Confidence, BonferroniWidensMonotonically) {
  double lo = kInfinity, hi = 0;
  for (std::size_t k : {1, 2, 5, 10, 100, 1000}) {
    const auto ci = risk_ratio_interval(100, 900, 900, 98100, critical_z(0.05, k));
    EXPECT_LT(ci->first, lo);
    EXPECT_GT(ci->second, hi);
    lo = ci->first;
    hi = ci->second;
  }
}

TEST(Confidence, ZeroCountFlagsRecord) {
  auto r = make_record({1}, 10, 0, 5, 100);
  attach_interval(r, 0.05, 3);
  EXPECT_FALSE(r.ci.has_value());
  EXPECT_EQ(r.num_tests, 3u);
  ASSERT_EQ(r.flags.size(), 1u);
  EXPECT_EQ(r.flags[0], kFlagCiUndefined);
  attach_interval(r, 0.05, 3);
  EXPECT_EQ(r.flags.size(), 1u);
}

TEST(Ranking, SupportThenRatioThenItems) {
  std::vector<ExplanationRecord> v{make_record({3}, 10, 1, 90, 100), make_record({2}, 50, 10, 50, 100),
                                   make_record({1}, 50, 10, 50, 100), make_record({4}, 50, 0, 50, 100)};
  rank_explanations(v);
  EXPECT_EQ(v[0].items, (Itemset{4}));
  EXPECT_EQ(v[1].items, (Itemset{1}));
  EXPECT_EQ(v[2].items, (Itemset{2}));
  EXPECT_EQ(v[3].items, (Itemset{3}));
  for (std::size_t i = 1; i < v.size(); ++i) EXPECT_FALSE(ranks_before(v[i], v[i - 1]));
}
