#include <array>
#include <set>

#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace fastdata;

namespace {

bool has_field(const ValidationResult& v, const std::string& field) {
  return std::any_of(v.errors.begin(), v.errors.end(), [&](const FieldError& e) { return e.field == field; });
}

QuerySpec csv_spec() {
  QuerySpec s;
  s.source.kind = SourceKind::CsvFile;
  s.source.path = "x.csv";
  s.metric_columns = {"power"};
  s.attribute_columns = {"device"};
  return s;
}

}  // namespace

TEST(Dictionary, DenseIdsFromZero) {
  AttributeDictionary d;
  EXPECT_EQ(d.encode("device", "A1"), 0);
  EXPECT_EQ(d.encode("device", "A1"), 0);
  EXPECT_EQ(d.encode("os", "v9"), 1);
  EXPECT_EQ(d.decode(1), (AttributeDictionary::Entry{"os", "v9"}));
  EXPECT_EQ(d.find("os", "v8"), kNullAttribute);
}

TEST(Dictionary, NameAndValueAreSeparateKeys) {
  AttributeDictionary d;
  const auto a = d.encode("ab", "c");
  const auto b = d.encode("a", "bc");
  EXPECT_NE(a, b);
}

TEST(Dictionary, CapacityOverflowIsExplicit) {
  AttributeDictionary d(2);
  d.encode("a", "1");
  d.encode("a", "2");
  EXPECT_EQ(d.encode("a", "1"), 0);
  EXPECT_THROW(d.encode("a", "3"), CapacityError);
}

TEST(Dictionary, BijectionOnRandomPairs) {
  AttributeDictionary d;
  Rng rng(5);
  std::map<std::pair<std::string, std::string>, AttributeId> seen;
  for (int i = 0; i < 5000; ++i) {
    const std::string n = "c" + std::to_string(rng.index(5));
    const std::string v = std::to_string(rng.index(200));
    const auto id = d.encode(n, v);
    auto [it, fresh] = seen.try_emplace({n, v}, id);
    EXPECT_EQ(it->second, id);
  }
  ASSERT_EQ(d.size(), seen.size());
  std::set<AttributeId> ids;
  for (const auto& [pair, id] : seen) {
    ids.insert(id);
    EXPECT_EQ(d.decode(id), pair);
  }
  EXPECT_EQ(*ids.begin(), 0);
  EXPECT_EQ(static_cast<std::size_t>(*ids.rbegin()), d.size() - 1);
}

TEST(QuerySpecValidation, DefaultsMatchTheReferenceSettings) {
  const auto v = parse_query_spec({{"source", {{"kind", "csv"}, {"path", "x.csv"}}}, {"metricColumns", {"m"}}});
  ASSERT_TRUE(v.ok());
  EXPECT_DOUBLE_EQ(v.spec.min_support, 0.001);
  EXPECT_DOUBLE_EQ(v.spec.min_risk_ratio, 3.0);
  EXPECT_DOUBLE_EQ(v.spec.outlier_percentile, 0.01);
  EXPECT_EQ(v.spec.reservoir_size, 10000u);
  EXPECT_EQ(v.spec.amc_stable_size, 10000u);
  EXPECT_DOUBLE_EQ(v.spec.decay_rate, 0.01);
  EXPECT_EQ(v.spec.decay_period.kind, DecayPeriod::Kind::Tuples);
  EXPECT_DOUBLE_EQ(v.spec.decay_period.value, 100000);
  EXPECT_EQ(v.spec.mode, QueryMode::OneShot);
}

TEST(QuerySpecValidation, RangeErrorsNameTheField) {
  auto s = csv_spec();
  s.min_risk_ratio = -1;
  EXPECT_TRUE(has_field(validate_query_spec(s), "minRiskRatio"));
  s = csv_spec();
  s.decay_rate = 1.0;
  EXPECT_TRUE(has_field(validate_query_spec(s), "decayRate"));
  s = csv_spec();
  s.outlier_percentile = 1.0;
  EXPECT_TRUE(has_field(validate_query_spec(s), "outlierPercentile"));
  s = csv_spec();
  s.min_support = 0.0;
  EXPECT_TRUE(has_field(validate_query_spec(s), "minSupport"));
  s = csv_spec();
  s.decay_period.value = 0;
  EXPECT_TRUE(has_field(validate_query_spec(s), "decayPeriod"));
  s = csv_spec();
  s.transforms = {"fourier"};
  EXPECT_TRUE(has_field(validate_query_spec(s), "transforms"));
  EXPECT_THROW(validate_query_spec(s).value(), ConfigError);
}

TEST(QuerySpecValidation, ParseCollectsEveryProblem) {
  const auto v = parse_query_spec({{"source", {{"kind", "parquet"}}},
                                   {"minSupport", "lots"},
                                   {"mode", "batch"},
                                   {"randomSeed", -4}});
  EXPECT_TRUE(has_field(v, "source.kind"));
  EXPECT_TRUE(has_field(v, "minSupport"));
  EXPECT_TRUE(has_field(v, "mode"));
  EXPECT_TRUE(has_field(v, "randomSeed"));
  EXPECT_FALSE(parse_query_spec(nlohmann::json::array()).ok());
}

TEST(QuerySpecValidation, MeasurementNoiseOfOneIsRejected) {
  const auto v = parse_query_spec({{"source", {{"kind", "synthetic-devices"}, {"measurementNoise", 1.0}}}});
  EXPECT_TRUE(has_field(v, "source.measurementNoise"));
}

TEST(QuerySpecValidation, NormalizationIsIdempotent) {
  std::vector<QuerySpec> specs{csv_spec()};
  QuerySpec dev;
  dev.source.kind = SourceKind::SyntheticDevices;
  dev.random_seed = 9;
  specs.push_back(dev);
  QuerySpec cont;
  cont.source.kind = SourceKind::SyntheticContamination;
  cont.source.contamination.dims = 1;
  specs.push_back(cont);
  for (const auto& s : specs) {
    const auto once = validate_query_spec(s);
    ASSERT_TRUE(once.ok());
    const auto twice = validate_query_spec(once.spec);
    ASSERT_TRUE(twice.ok());
    EXPECT_EQ(once.spec, twice.spec);
  }
}

TEST(QuerySpecValidation, JsonRoundTrip) {
  auto s = csv_spec();
  s.mode = QueryMode::Streaming;
  s.decay_period = {DecayPeriod::Kind::Seconds, 2.5};
  s.rules = {"metric[0] > 100"};
  s.transforms = {"standardize"};
  s.sampler = SamplerPolicy::AdrPerPeriod;
  s.attribute_buckets["temp"] = {10, 20};
  s.random_seed = 1234567890123ULL;
  s.query_id = "q";
  const auto norm = validate_query_spec(s).value();
  const auto back = parse_query_spec(to_json(norm));
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back.spec, norm);
}

TEST(Typecheck, DefaultPipelineComposes) {
  const std::array stages{signature_of(OperatorKind::Ingestor), signature_of(OperatorKind::Transformer),
                          signature_of(OperatorKind::Classifier), signature_of(OperatorKind::Explainer)};
  EXPECT_FALSE(typecheck_pipeline(stages).has_value());
  static_assert(composes(std::span<const OperatorSignature>(
      std::array{signature_of(OperatorKind::Ingestor), signature_of(OperatorKind::Classifier),
                 signature_of(OperatorKind::Explainer)})));
}

TEST(Typecheck, ExplainerNeedsLabels) {
  const std::array stages{signature_of(OperatorKind::Ingestor), signature_of(OperatorKind::Explainer)};
  const auto err = typecheck_pipeline(stages);
  ASSERT_TRUE(err.has_value());
  EXPECT_EQ(err->boundary, 1u);
  EXPECT_NE(err->message.find("Explainer"), std::string::npos);
}

TEST(Typecheck, MustStartWithIngestor) {
  const std::array stages{signature_of(OperatorKind::Classifier), signature_of(OperatorKind::Explainer)};
  const auto err = typecheck_pipeline(stages);
  ASSERT_TRUE(err.has_value());
  EXPECT_EQ(err->boundary, 0u);
  EXPECT_TRUE(typecheck_pipeline({}).has_value());
}

TEST(Typecheck, MustEndWithExplanations) {
  const std::array stages{signature_of(OperatorKind::Ingestor), signature_of(OperatorKind::Classifier)};
  EXPECT_TRUE(typecheck_pipeline(stages).has_value());
}

TEST(Rng, ReplaysUnderSeed) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.next(), b.next());
    EXPECT_EQ(a.normal(), b.normal());
  }
  EXPECT_NE(Rng::mix(1, 2), Rng::mix(1, 3));
}
