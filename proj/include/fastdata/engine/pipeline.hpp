#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <utility>
#include <vector>

#include "fastdata/classify/baselines.hpp"
#include "fastdata/classify/model.hpp"
#include "fastdata/classify/threshold.hpp"
#include "fastdata/core/dictionary.hpp"
#include "fastdata/core/operators.hpp"
#include "fastdata/core/query_spec.hpp"
#include "fastdata/engine/report.hpp"
#include "fastdata/engine/transforms.hpp"
#include "fastdata/error.hpp"
#include "fastdata/explain/batch.hpp"
#include "fastdata/explain/confidence.hpp"
#include "fastdata/explain/ranking.hpp"
#include "fastdata/ingest/open_source.hpp"
#include "fastdata/random.hpp"
#include "fastdata/sketch/decay_driver.hpp"
#include "fastdata/sketch/samplers.hpp"
#include "fastdata/stream/summarizer.hpp"

namespace fastdata {

/// Stage list of the default pipeline; checked once per query.
inline std::vector<OperatorSignature> default_pipeline_stages(const QuerySpec& spec) {
  std::vector<OperatorSignature> stages{signature_of(OperatorKind::Ingestor)};
  for (std::size_t i = 0; i < spec.transforms.size(); ++i) stages.push_back(signature_of(OperatorKind::Transformer));
  stages.push_back(signature_of(OperatorKind::Classifier));
  stages.push_back(signature_of(OperatorKind::Explainer));
  return stages;
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

inline AttributeDictionary make_dictionary(const QuerySpec& spec) {
  return spec.max_dictionary_size ? AttributeDictionary(spec.max_dictionary_size) : AttributeDictionary();
}

inline ExplainOptions explain_options(const QuerySpec& spec) {
  return {spec.min_support, spec.min_risk_ratio, spec.strict_subsets};
}

inline QuerySpec checked(const QuerySpec& spec) {
  QuerySpec s = validate_query_spec(spec).value();
  const auto stages = default_pipeline_stages(s);
  if (auto err = typecheck_pipeline(stages)) throw ConfigError(err->message);
  return s;
}

}  // namespace detail

/// Transform chain, scoring model and rules of one query. fit() replaces
/// all three only when the new model trains successfully.
class PointClassifier {
 public:
  explicit PointClassifier(const QuerySpec& spec)
      : names_(spec.transforms),
        kind_(spec.classifier),
        mcd_(spec.mcd),
        dims_(spec.metric_columns.size()),
        chain_(std::make_unique<TransformChain>(spec.transforms)) {
    for (const auto& r : spec.rules) rules_.push_back(parse_rule(r, dims_));
  }

  /// Fits on raw metric vectors. Throws DegenerateError and leaves the
  /// current model in place when the sample cannot support a model.
  void fit(const std::vector<std::vector<double>>& raw, std::uint64_t seed) {
    if (raw.empty()) throw DegenerateError("training sample is empty");
    auto chain = std::make_unique<TransformChain>(names_);
    chain->fit(raw);
    std::vector<std::vector<double>> x = raw;
    for (auto& v : x) {
      check_dims(v);
      chain->apply(v);
    }
    auto model = ScoringModel::train(kind_, x, mcd_, seed);
    chain_ = std::move(chain);
    model_.emplace(std::move(model));
    ++fits_;
  }

  bool trained() const { return model_.has_value(); }

  double score(const Point& p) {
    check_dims(p.metrics);
    if (chain_->empty()) return model_->score(p.metrics);
    buf_ = p.metrics;
    chain_->apply(buf_);
    return model_->score(buf_);
  }

  /// Outlier when the score exceeds the cutoff or any rule holds. The
  /// label keeps the model score.
  Label label(const Point& p, double cutoff) {
    Label l = classify(score(p), cutoff);
    for (const auto& r : rules_) l.outlier = l.outlier || r.holds(p.metrics);
    return l;
  }

  const ScoringModel& model() const { return *model_; }
  const TransformChain& transforms() const { return *chain_; }
  std::size_t fits() const { return fits_; }

  /// Nonempty when the trained model had to fall back on a default scale.
  std::string model_warning() const {
    if (model_) {
      if (const auto* m = std::get_if<MadModel>(&model_->variant()); m && m->degenerate)
        return "MAD is zero on the training sample; scores use a fallback scale";
      if (const auto* m = std::get_if<McdModel>(&model_->variant()); m && m->regularized)
        return "MCD scatter was ill-conditioned and has been regularized";
    }
    return {};
  }

 private:
  void check_dims(const std::vector<double>& m) const {
    if (m.size() != dims_)
      throw DataError("point has " + std::to_string(m.size()) + " metrics, query expects " + std::to_string(dims_));
  }

  std::vector<std::string> names_;
  ClassifierKind kind_;
  McdOptions mcd_;
  std::size_t dims_;
  std::unique_ptr<TransformChain> chain_;
  std::optional<ScoringModel> model_;
  std::vector<Rule> rules_;
  std::vector<double> buf_;
  std::size_t fits_ = 0;
};

struct OneShotResult {
  QueryReport report;
  std::vector<ExplanationRecord> records;  // ranked, with intervals
  std::vector<Label> labels;               // one per input point
  ExplainStats stats;
};

/// One-shot analysis of points already in memory. The spec must be
/// validated.
inline OneShotResult analyze_points(const QuerySpec& spec, const std::vector<Point>& points,
                                    const AttributeDictionary& dict, const IngestStats* ingest = nullptr) {
  OneShotResult out;
  QueryReport& rep = out.report;
  rep.query_id = spec.query_id;
  rep.mode = "oneshot";
  rep.config = to_json(spec);
  rep.seed = spec.random_seed;
  rep.points_processed = points.size();
  if (ingest) {
    rep.rows_skipped = ingest->rows_skipped;
    for (const auto& d : ingest->diagnostics) rep.warnings.push_back("skipped row: " + d);
  }
  if (points.empty()) {
    rep.warnings.push_back("source produced no points");
    return out;
  }

  auto t0 = detail::Clock::now();
  std::vector<std::vector<double>> sample;
  if (points.size() <= spec.training_cap) {
    sample.reserve(points.size());
    for (const auto& p : points) sample.push_back(p.metrics);
  } else {
    DampedReservoir<std::size_t> idx(std::min(spec.reservoir_size, spec.training_cap), 1.0,
                                     Rng::mix(spec.random_seed, 11));
    for (std::size_t i = 0; i < points.size(); ++i) idx.observe(i);
    for (std::size_t i : idx.items()) sample.push_back(points[i].metrics);
    rep.warnings.push_back("trained on a sample of " + std::to_string(sample.size()) + " points");
  }
  PointClassifier clf(spec);
  clf.fit(sample, Rng::mix(spec.random_seed, 12));
  sample = {};
  rep.model = clf.model().family();
  if (auto w = clf.model_warning(); !w.empty()) rep.warnings.push_back(w);
  rep.timings.train_ms = detail::ms_since(t0);

  t0 = detail::Clock::now();
  std::vector<double> scores;
  scores.reserve(points.size());
  for (const auto& p : points) scores.push_back(clf.score(p));
  const double cutoff = nearest_rank_quantile(scores, 1.0 - spec.outlier_percentile);
  rep.cutoff = cutoff;
  std::vector<const Point*> outliers, inliers;
  out.labels.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    Label l = classify(scores[i], cutoff);
    if (!spec.rules.empty() && !l.outlier) l = clf.label(points[i], cutoff);
    out.labels.push_back(l);
    (l.outlier ? outliers : inliers).push_back(&points[i]);
  }
  rep.outlier_count = outliers.size();
  rep.timings.score_ms = detail::ms_since(t0);

  t0 = detail::Clock::now();
  auto ex = explain_batch<const Point*>(outliers, inliers, detail::explain_options(spec));
  attach_intervals(ex.records, spec.ci_significance, ex.num_tests);
  rank_explanations(ex.records);
  rep.timings.explain_ms = detail::ms_since(t0);
  const auto table = dict.snapshot();
  for (const auto& r : ex.records) rep.explanations.push_back(decode_record(r, *table));
  rep.warnings.insert(rep.warnings.end(), ex.warnings.begin(), ex.warnings.end());
  out.records = std::move(ex.records);
  out.stats = ex.stats;
  return out;
}

/// Cooperative controls for long runs.
struct RunHooks {
  std::stop_token stop;
  std::function<void(std::size_t)> on_progress;         // points processed so far
  std::function<bool()> emit_requested;                 // polled between batches
  std::function<void(const QueryReport&)> on_emit;
};

inline OneShotResult run_oneshot_detailed(const QuerySpec& spec_in, const RunHooks& hooks = {}) {
  const QuerySpec spec = detail::checked(spec_in);
  AttributeDictionary dict = detail::make_dictionary(spec);
  auto source = open_source(spec.source, spec, dict);
  std::vector<Point> points;
  while (auto batch = source->next_batch()) {
    if (hooks.stop.stop_requested()) throw Cancelled("query cancelled");
    points.insert(points.end(), std::make_move_iterator(batch->begin()), std::make_move_iterator(batch->end()));
    if (hooks.on_progress) hooks.on_progress(points.size());
  }
  return analyze_points(spec, points, dict, &source->stats());
}

inline QueryReport run_oneshot(const QuerySpec& spec, const RunHooks& hooks = {}) {
  return run_oneshot_detailed(spec, hooks).report;
}

/// Exponentially weighted streaming execution. Points are scored by the
/// model current at the start of their batch; retraining and cutoff
/// changes happen only between batches.
class StreamingPipeline {
 public:
  explicit StreamingPipeline(const QuerySpec& spec)
      : spec_(detail::checked(spec)),
        dict_(detail::make_dictionary(spec_)),
        classifier_(spec_),
        input_(spec_.sampler, spec_.reservoir_size, spec_.period_sample_size, spec_.retention(),
               Rng::mix(spec_.random_seed, 21)),
        scores_(spec_.sampler, spec_.reservoir_size, spec_.period_sample_size, spec_.retention(),
                Rng::mix(spec_.random_seed, 22)),
        summarizer_(spec_.amc_stable_size, spec_.min_support),
        driver_(spec_.decay_period) {
    threshold_.target_percentile = 1.0 - spec_.outlier_percentile;
  }

  AttributeDictionary& dictionary() { return dict_; }
  const AttributeDictionary& dictionary() const { return dict_; }
  const QuerySpec& spec() const { return spec_; }

  void process_batch(std::span<const Point> batch) {
    if (batch.empty()) return;
    if (!classifier_.trained()) cold_start(batch);
    const auto t0 = detail::Clock::now();
    std::size_t batch_outliers = 0;
    for (const auto& p : batch) {
      for (auto n = driver_.ticks_before(p.timestamp); n > 0; --n) on_tick();
      input_.observe(p.metrics);
      const Label l = classifier_.label(p, *threshold_.cutoff);
      scores_.observe(l.score);
      summarizer_.observe(l.outlier, p.attributes);
      ++processed_;
      if (l.outlier) {
        ++outliers_;
        ++batch_outliers;
      }
      for (auto n = driver_.ticks_after(); n > 0; --n) on_tick();
    }
    score_ms_ += detail::ms_since(t0);
    end_of_batch(batch_outliers, batch.size());
  }

  /// Clock advance without data, so quiet intervals still decay.
  void advance_time(double now) {
    for (auto n = driver_.advance_time(now); n > 0; --n) on_tick();
    end_of_batch(0, 0);
  }

  /// Snapshot of the current explanations; does not change any state.
  QueryReport emit() const {
    const auto t0 = detail::Clock::now();
    QueryReport rep;
    rep.query_id = spec_.query_id;
    rep.mode = "streaming";
    rep.config = to_json(spec_);
    rep.seed = spec_.random_seed;
    rep.points_processed = processed_;
    rep.outlier_count = outliers_;
    rep.cutoff = threshold_.cutoff;
    rep.model = classifier_.trained() ? classifier_.model().family() : "";
    rep.warnings = warnings_;
    auto ex = summarizer_.emit(detail::explain_options(spec_));
    attach_intervals(ex.records, spec_.ci_significance, ex.num_tests);
    rank_explanations(ex.records);
    const auto table = dict_.snapshot();
    for (const auto& r : ex.records) rep.explanations.push_back(decode_record(r, *table));
    rep.warnings.insert(rep.warnings.end(), ex.warnings.begin(), ex.warnings.end());
    rep.timings = {train_ms_, score_ms_, detail::ms_since(t0)};
    return rep;
  }

  /// Ranked records with intervals, undecoded.
  std::vector<ExplanationRecord> explanation_records() const {
    auto ex = summarizer_.emit(detail::explain_options(spec_));
    attach_intervals(ex.records, spec_.ci_significance, ex.num_tests);
    rank_explanations(ex.records);
    return ex.records;
  }

  std::size_t points_processed() const { return processed_; }
  std::size_t outlier_count() const { return outliers_; }
  std::optional<double> cutoff() const { return threshold_.cutoff; }
  std::size_t ticks() const { return ticks_; }
  std::size_t retrains() const { return classifier_.fits(); }
  const PointClassifier& classifier() const { return classifier_; }
  const StreamingSummarizer& summarizer() const { return summarizer_; }
  const Sampler<std::vector<double>>& input_sampler() const { return input_; }
  const Sampler<double>& score_sampler() const { return scores_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  // Warm-up: model and cutoff come from the first batch alone.
  void cold_start(std::span<const Point> batch) {
    const auto t0 = detail::Clock::now();
    std::vector<std::vector<double>> raw;
    raw.reserve(batch.size());
    for (const auto& p : batch) raw.push_back(p.metrics);
    classifier_.fit(raw, Rng::mix(spec_.random_seed, 23));
    std::vector<double> s;
    s.reserve(batch.size());
    for (const auto& p : batch) s.push_back(classifier_.score(p));
    threshold_.refresh(s);
    note(classifier_.model_warning());
    train_ms_ += detail::ms_since(t0);
  }

  void on_tick() {
    input_.tick();
    scores_.tick();
    summarizer_.advance_window(spec_.retention());
    ++ticks_;
    pending_retrain_ = true;
  }

  void end_of_batch(std::size_t batch_outliers, std::size_t batch_size) {
    if (pending_retrain_) {
      pending_retrain_ = false;
      retrain();
    } else if (drift_detected(batch_outliers, batch_size, spec_.outlier_percentile)) {
      threshold_.refresh(scores_.sample());
    }
  }

  void retrain() {
    const auto t0 = detail::Clock::now();
    const auto& sample = input_.sample();
    bool fitted = false;
    if (sample.empty()) {
      note("retrain skipped: input sample is empty; keeping the previous model");
    } else {
      try {
        classifier_.fit(sample, Rng::mix(spec_.random_seed, 24 + ticks_));
        note(classifier_.model_warning());
        fitted = true;
      } catch (const DegenerateError& e) {
        note(std::string("retrain failed (") + e.what() + "); keeping the previous model");
      }
    }
    // Scores kept from older models are not comparable with the new one,
    // so a fresh model takes its cutoff from its own training sample.
    if (fitted) {
      std::vector<double> s;
      s.reserve(sample.size());
      Point p;
      for (const auto& m : sample) {
        p.metrics = m;
        s.push_back(classifier_.score(p));
      }
      threshold_.refresh(s);
    } else if (!threshold_.refresh(scores_.sample())) {
      note("score sample is empty; keeping the previous cutoff");
    }
    train_ms_ += detail::ms_since(t0);
  }

  void note(const std::string& w) {
    if (w.empty() || std::find(warnings_.begin(), warnings_.end(), w) != warnings_.end()) return;
    if (warnings_.size() < 32) warnings_.push_back(w);
  }

  QuerySpec spec_;
  AttributeDictionary dict_;
  PointClassifier classifier_;
  Sampler<std::vector<double>> input_;
  Sampler<double> scores_;
  ThresholdState threshold_;
  StreamingSummarizer summarizer_;
  DecayDriver driver_;
  bool pending_retrain_ = false;
  std::size_t processed_ = 0;
  std::size_t outliers_ = 0;
  std::size_t ticks_ = 0;
  double train_ms_ = 0.0;
  double score_ms_ = 0.0;
  std::vector<std::string> warnings_;
};

/// Runs a streaming query to the end of its source. Reports are emitted
/// after every emit_every_tuples points (batches are split to land on
/// the boundary), when hooks request one, and at end of stream.
inline std::vector<QueryReport> run_streaming(const QuerySpec& spec_in, const RunHooks& hooks = {}) {
  StreamingPipeline pipe(spec_in);
  const QuerySpec& spec = pipe.spec();
  auto source = open_source(spec.source, spec, pipe.dictionary());
  std::vector<QueryReport> reports;
  auto emit = [&] {
    QueryReport r = pipe.emit();
    r.emission = reports.size() + 1;
    r.rows_skipped = source->stats().rows_skipped;
    if (hooks.on_emit) hooks.on_emit(r);
    reports.push_back(std::move(r));
  };
  const std::size_t every = spec.emit_every_tuples;
  while (auto batch = source->next_batch()) {
    std::span<const Point> rest(*batch);
    while (!rest.empty()) {
      if (hooks.stop.stop_requested()) throw Cancelled("query cancelled");
      std::size_t take = rest.size();
      if (every) take = std::min(take, every - pipe.points_processed() % every);
      pipe.process_batch(rest.first(take));
      rest = rest.subspan(take);
      if (every && pipe.points_processed() % every == 0) emit();
      else if (hooks.emit_requested && hooks.emit_requested()) emit();
      if (hooks.on_progress) hooks.on_progress(pipe.points_processed());
    }
  }
  if (reports.empty() || reports.back().points_processed != pipe.points_processed()) emit();
  return reports;
}

/// Dispatches on the spec's mode; one-shot yields a single report.
inline std::vector<QueryReport> run_query(const QuerySpec& spec, const RunHooks& hooks = {}) {
  if (spec.mode == QueryMode::OneShot) {
    auto r = run_oneshot(spec, hooks);
    if (hooks.on_emit) hooks.on_emit(r);
    return {std::move(r)};
  }
  return run_streaming(spec, hooks);
}

}  // namespace fastdata
