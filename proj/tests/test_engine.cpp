#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace fastdata;

namespace {

QuerySpec device_spec(std::size_t n, std::uint64_t seed) {
  QuerySpec s;
  s.query_id = "devices";
  s.source.kind = SourceKind::SyntheticDevices;
  s.source.devices.n_points = n;
  s.random_seed = seed;
  return s;
}

std::set<std::string> explained_devices(const QueryReport& r) {
  std::set<std::string> out;
  for (const auto& e : r.explanations)
    if (e.attributes.size() == 1 && e.attributes[0].first == "device") out.insert(e.attributes[0].second);
  return out;
}

std::set<std::string> true_devices(const QuerySpec& s) {
  auto p = s.source.devices;
  p.seed = s.random_seed;
  std::set<std::string> out;
  for (auto d : outlier_devices(p)) out.insert(device_name(d));
  return out;
}

nlohmann::json without_timings(const QueryReport& r) {
  auto j = to_json(r);
  j.erase("timings");
  return j;
}

}  // namespace

TEST(Transforms, StandardizeMoments) {
  Rng rng(8);
  std::vector<std::vector<double>> x(20000);
  for (auto& v : x) v = {rng.normal(40, 10), rng.normal(-3, 0.5)};
  TransformChain chain({"standardize"});
  chain.fit(x);
  double m0 = 0, m1 = 0, s0 = 0, s1 = 0;
  const double n = static_cast<double>(x.size());
  for (const auto& v : x) {
    const auto y = chain.applied(v);
    m0 += y[0] / n;
    m1 += y[1] / n;
    s0 += y[0] * y[0] / n;
    s1 += y[1] * y[1] / n;
  }
  EXPECT_NEAR(m0, 0.0, 1e-9);
  EXPECT_NEAR(m1, 0.0, 1e-9);
  EXPECT_NEAR(std::sqrt(s0), 1.0, 1e-9);
  EXPECT_NEAR(std::sqrt(s1), 1.0, 1e-9);
}

TEST(Transforms, IdentityAndChaining) {
  Rng rng(9);
  std::vector<std::vector<double>> x(100);
  for (auto& v : x) v = {rng.normal(5, 2)};
  TransformChain id({"identity"});
  id.fit(x);
  EXPECT_EQ(id.applied(x[3]), x[3]);
  TransformChain a({"standardize", "identity"}), b({"standardize"});
  a.fit(x);
  b.fit(x);
  for (const auto& v : x) EXPECT_EQ(a.applied(v), b.applied(v));
  EXPECT_THROW(TransformChain({"fourier"}), ConfigError);
}

TEST(Pipeline, DefaultStagesTypecheck) {
  const auto spec = validate_query_spec(device_spec(10, 1)).value();
  EXPECT_FALSE(typecheck_pipeline(default_pipeline_stages(spec)).has_value());
}

TEST(OneShot, FindsTheOutlierDevices) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto spec = device_spec(100000, seed);
    const auto r = run_oneshot(spec);
    EXPECT_EQ(r.points_processed, 100000u);
    EXPECT_EQ(r.model, "mad");
    EXPECT_EQ(explained_devices(r), true_devices(spec)) << "seed " << seed;
    EXPECT_NEAR(static_cast<double>(r.outlier_count), 1000.0, 1.0);
  }
}

TEST(OneShot, SeveralOutlierDevices) {
  auto spec = device_spec(100000, 5);
  spec.source.devices.outlier_device_fraction = 0.03;
  spec.outlier_percentile = 0.03;
  EXPECT_EQ(explained_devices(run_oneshot(spec)), true_devices(spec));
}

TEST(OneShot, EmptySource) {
  const auto dir = test::scratch_dir("empty_source");
  test::write_file(dir / "empty.csv", "power,device\n");
  QuerySpec spec;
  spec.source.path = (dir / "empty.csv").string();
  spec.metric_columns = {"power"};
  spec.attribute_columns = {"device"};
  const auto r = run_oneshot(spec);
  EXPECT_EQ(r.points_processed, 0u);
  EXPECT_TRUE(r.explanations.empty());
  EXPECT_FALSE(r.cutoff.has_value());
  EXPECT_FALSE(r.warnings.empty());
}

TEST(OneShot, DeterministicUnderSeed) {
  auto spec = device_spec(50000, 4);
  spec.source.devices.label_noise = 0.1;
  const auto a = run_oneshot(spec), b = run_oneshot(spec);
  EXPECT_EQ(without_timings(a).dump(), without_timings(b).dump());
}

TEST(OneShot, MultiMetricUsesMcd) {
  QuerySpec spec;
  spec.source.kind = SourceKind::SyntheticContamination;
  spec.source.contamination.n_points = 20000;
  spec.source.contamination.contamination = 0.01;
  spec.random_seed = 3;
  const auto res = run_oneshot_detailed(spec);
  EXPECT_EQ(res.report.model, "mcd");
  const auto pts = contamination_points(validate_query_spec(spec).value().source.contamination);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) agree += res.labels[i].outlier == *pts[i].truth;
  EXPECT_EQ(agree, pts.size());
}

TEST(OneShot, RulesOrWithModel) {
  auto spec = device_spec(20000, 6);
  spec.rules = {"metric[0] > 45"};
  const auto res = run_oneshot_detailed(spec);
  auto plain = device_spec(20000, 6);
  const auto base = run_oneshot_detailed(plain);
  EXPECT_GE(res.report.outlier_count, base.report.outlier_count);
  spec.rules = {"metric[1] > 45"};
  EXPECT_THROW(run_oneshot(spec), ConfigError);
}

TEST(OneShot, InvalidSpecIsConfigError) {
  auto spec = device_spec(100, 1);
  spec.min_support = 2.0;
  EXPECT_THROW(run_oneshot(spec), ConfigError);
}

TEST(Streaming, EquivalentToOneShotWithoutDecay) {
  for (std::uint64_t seed : {1, 2}) {
    auto spec = device_spec(30000, seed);
    spec.source.devices.label_noise = 0.1;
    spec.source.batch_size = 30000;
    spec.decay_rate = 0.0;
    spec.decay_period = {DecayPeriod::Kind::Tuples, 1e9};
    spec.reservoir_size = 30000;
    const auto one = run_oneshot_detailed(spec);

    auto sspec = spec;
    sspec.mode = QueryMode::Streaming;
    StreamingPipeline pipe(sspec);
    auto src = open_source(pipe.spec().source, pipe.spec(), pipe.dictionary());
    while (auto b = src->next_batch()) pipe.process_batch(*b);
    EXPECT_EQ(pipe.outlier_count(), one.report.outlier_count);
    EXPECT_DOUBLE_EQ(*pipe.cutoff(), *one.report.cutoff);
    EXPECT_TRUE(test::same_up_to(pipe.explanation_records(), one.records, 1e-9)) << "seed " << seed;
  }
}

TEST(Streaming, EmissionIsPure) {
  auto spec = device_spec(60000, 3);
  spec.mode = QueryMode::Streaming;
  spec.decay_period = {DecayPeriod::Kind::Tuples, 20000};
  StreamingPipeline pipe(spec);
  auto src = open_source(pipe.spec().source, pipe.spec(), pipe.dictionary());
  while (auto b = src->next_batch()) pipe.process_batch(*b);
  const auto fp = pipe.summarizer().fingerprint();
  const auto a = pipe.emit(), b = pipe.emit();
  EXPECT_EQ(fp, pipe.summarizer().fingerprint());
  EXPECT_EQ(to_json(a)["explanations"], to_json(b)["explanations"]);
  EXPECT_EQ(pipe.ticks(), 3u);
  EXPECT_EQ(pipe.retrains(), 4u);
}

TEST(Streaming, ScheduledEmissionsLandOnBoundaries) {
  auto spec = device_spec(25000, 2);
  spec.mode = QueryMode::Streaming;
  spec.source.batch_size = 3000;
  spec.emit_every_tuples = 10000;
  const auto reports = run_streaming(spec);
  ASSERT_EQ(reports.size(), 3u);
  EXPECT_EQ(reports[0].points_processed, 10000u);
  EXPECT_EQ(reports[1].points_processed, 20000u);
  EXPECT_EQ(reports[2].points_processed, 25000u);
  EXPECT_EQ(reports[2].emission, 3u);
  EXPECT_EQ(explained_devices(reports.back()), true_devices(spec));
}

TEST(Streaming, ReplayDeterminism) {
  auto spec = device_spec(40000, 9);
  spec.mode = QueryMode::Streaming;
  spec.decay_period = {DecayPeriod::Kind::Tuples, 10000};
  spec.decay_rate = 0.2;
  const auto a = run_streaming(spec), b = run_streaming(spec);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(without_timings(a[i]), without_timings(b[i]));
}

TEST(Streaming, StationaryOutlierFraction) {
  auto spec = device_spec(400000, 12);
  spec.mode = QueryMode::Streaming;
  spec.source.batch_size = 10000;
  spec.decay_period = {DecayPeriod::Kind::Tuples, 100000};
  StreamingPipeline pipe(spec);
  auto src = open_source(pipe.spec().source, pipe.spec(), pipe.dictionary());
  std::size_t late_outliers = 0, late_points = 0;
  while (auto b = src->next_batch()) {
    const auto before = pipe.outlier_count();
    pipe.process_batch(*b);
    if (pipe.ticks() >= 1) {
      late_outliers += pipe.outlier_count() - before;
      late_points += b->size();
    }
  }
  const double p = spec.outlier_percentile;
  const double frac = static_cast<double>(late_outliers) / static_cast<double>(late_points);
  EXPECT_NEAR(frac, p, 2.576 * std::sqrt(p * (1 - p) / static_cast<double>(late_points)));
}

TEST(Streaming, RetrainOnUnchangedDataKeepsCutoff) {
  // Gaussian scores have no gap at the cutoff, so the quantile error is
  // governed by the score density there.
  QuerySpec spec;
  spec.source.path = "unused.csv";
  spec.metric_columns = {"m"};
  spec.mode = QueryMode::Streaming;
  spec.decay_period = {DecayPeriod::Kind::Tuples, 50000};
  StreamingPipeline pipe(spec);
  Rng rng(13);
  std::vector<double> cutoffs;
  for (int b = 0; b < 30; ++b) {
    std::vector<Point> batch;
    for (int i = 0; i < 10000; ++i) batch.push_back(test::point({rng.normal(10, 10)}, {}));
    const auto ticks = pipe.ticks();
    pipe.process_batch(batch);
    if (pipe.ticks() != ticks) cutoffs.push_back(*pipe.cutoff());
  }
  ASSERT_EQ(cutoffs.size(), 6u);
  // |z| has density 2 phi(2.576) at its 99th percentile.
  const double p = spec.outlier_percentile, q = 2.5758293035489;
  const double density = 2.0 * std::exp(-q * q / 2) / std::sqrt(2 * M_PI);
  const double se = std::sqrt(p * (1 - p) / static_cast<double>(spec.reservoir_size)) / density;
  for (std::size_t i = 1; i < cutoffs.size(); ++i)
    EXPECT_NEAR(cutoffs[i] / cutoffs[i - 1], 1.0, 4.0 * std::sqrt(2.0) * se / q) << "retrain " << i;
}

TEST(Streaming, ModelMedianFollowsShift) {
  AdaptivityOptions o;
  o.stream.base_rate = 10000;
  o.decay_rate = 0.9;
  const auto rows = adaptivity_run(o, SamplerPolicy::Adr);
  const double shift = AdaptivitySource::script.shift_at;
  bool checked = false;
  for (const auto& r : rows) {
    if (r.second < 140) EXPECT_NEAR(r.model_median, 10.0, 2.0) << "second " << r.second;
    if (r.second == shift + 1) {
      // Two ticks (shift + 1 and shift + 2) have passed since the shift.
      EXPECT_NEAR(r.model_median, 40.0, 2.0);
      checked = true;
    }
  }
  EXPECT_TRUE(checked);
}

TEST(Streaming, TimeDecayTicksDuringQuietPeriods) {
  QuerySpec spec;
  spec.source.path = "unused.csv";
  spec.metric_columns = {"m"};
  spec.mode = QueryMode::Streaming;
  spec.decay_period = {DecayPeriod::Kind::Seconds, 1.0};
  StreamingPipeline pipe(spec);
  std::vector<Point> batch;
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    auto p = test::point({rng.normal()}, {});
    p.timestamp = i * 0.01;
    batch.push_back(p);
  }
  pipe.process_batch(batch);
  EXPECT_EQ(pipe.ticks(), 0u);
  pipe.advance_time(5.5);
  EXPECT_EQ(pipe.ticks(), 5u);
}

TEST(Dynamic, RandomStageListsAgreeWithTypecheck) {
  Rng rng(31);
  std::vector<Point> pts;
  for (int i = 0; i < 300; ++i)
    pts.push_back(test::point({rng.normal(i % 50 == 0 ? 80 : 10, 5)}, {static_cast<AttributeId>(i % 50 == 0 ? 1 : i % 7 + 2)}));
  const OperatorKind kinds[] = {OperatorKind::Ingestor, OperatorKind::Transformer, OperatorKind::Classifier,
                                OperatorKind::Explainer};
  std::size_t accepted = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<DynamicStage> stages;
    std::vector<OperatorSignature> sigs;
    const std::size_t len = 1 + rng.index(5);
    for (std::size_t i = 0; i < len; ++i) {
      const auto k = kinds[rng.index(4)];
      switch (k) {
        case OperatorKind::Ingestor: stages.push_back(make_ingestor(pts)); break;
        case OperatorKind::Transformer: stages.push_back(make_transformer({"standardize"})); break;
        case OperatorKind::Classifier: stages.push_back(make_classifier(ClassifierKind::Mad, 0.02)); break;
        case OperatorKind::Explainer: stages.push_back(make_explainer({0.1, 3.0, false})); break;
      }
      sigs.push_back(stages.back().signature);
    }
    const bool ok = !typecheck_pipeline(sigs).has_value();
    EXPECT_EQ(ok, composes(sigs));
    if (ok) {
      ++accepted;
      EXPECT_NO_THROW(execute(stages));
    } else {
      EXPECT_THROW(execute(stages), ConfigError);
    }
  }
  EXPECT_GT(accepted, 0u);
}

TEST(Dynamic, DefaultPipelineFindsPlantedAttribute) {
  Rng rng(32);
  std::vector<Point> pts;
  for (int i = 0; i < 1000; ++i) {
    const bool bad = i % 50 == 0;
    pts.push_back(test::point({rng.normal(bad ? 80 : 10, 5)}, {static_cast<AttributeId>(bad ? 1 : 2 + i % 7)}));
  }
  const std::vector<DynamicStage> stages{make_ingestor(pts), make_transformer({"identity"}),
                                         make_classifier(ClassifierKind::Auto, 0.02), make_explainer({0.1, 3.0, false})};
  const auto recs = execute(stages);
  ASSERT_FALSE(recs.empty());
  EXPECT_EQ(recs[0].items, (std::vector<AttributeId>{1}));
}
