#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "fastdata/classify/model.hpp"
#include "fastdata/engine/pipeline.hpp"
#include "fastdata/explain/batch.hpp"
#include "fastdata/ingest/synthetic.hpp"
#include "fastdata/random.hpp"
#include "fastdata/sketch/amc.hpp"
#include "fastdata/sketch/space_saving.hpp"

namespace fastdata {

/// Headered table written as CSV.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write(std::ostream& os) const {
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
      os << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
  }
};

inline std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string fmt(std::size_t v) { return std::to_string(v); }

// ---------------------------------------------------------------------------
// Explanation accuracy on the device stream

struct SetScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline SetScore score_sets(const std::set<std::string>& found, const std::set<std::string>& truth) {
  std::size_t hit = 0;
  for (const auto& f : found) hit += truth.count(f);
  SetScore s;
  s.precision = found.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(found.size());
  s.recall = truth.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(truth.size());
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

/// Values of `attribute` named by any reported explanation.
inline std::set<std::string> explained_values(const QueryReport& r, const std::string& attribute) {
  std::set<std::string> out;
  for (const auto& e : r.explanations)
    for (const auto& [k, v] : e.attributes)
      if (k == attribute) out.insert(v);
  return out;
}

struct NoiseResult {
  std::string kind;  // "label" or "measurement"
  double noise = 0.0;
  SetScore score;
  double explanations = 0.0;
};

/// One-shot device query; F1 of the explained device set against the
/// planted outlier devices.
inline NoiseResult device_explanation_accuracy(const SynthDeviceParams& p, std::uint64_t seed) {
  QuerySpec spec;
  spec.source.kind = SourceKind::SyntheticDevices;
  spec.source.devices = p;
  spec.random_seed = seed;
  const auto report = run_oneshot(spec);
  SynthDeviceParams seeded = p;
  seeded.seed = seed;
  std::set<std::string> truth;
  for (auto d : outlier_devices(seeded)) truth.insert(device_name(d));
  NoiseResult r;
  r.score = score_sets(explained_values(report, "device"), truth);
  r.explanations = static_cast<double>(report.explanations.size());
  return r;
}

struct NoiseSweepOptions {
  std::size_t n_points = 100000;
  std::size_t n_devices = 100;
  double outlier_device_fraction = 0.01;
  std::vector<double> levels{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4};
  std::uint64_t seed = 1;
  std::size_t trials = 10;  // seeds seed, seed+1, ...; scores are averaged
};

inline std::vector<NoiseResult> synthetic_noise_experiment(const NoiseSweepOptions& o) {
  std::vector<NoiseResult> out;
  for (const char* kind : {"label", "measurement"}) {
    for (double level : o.levels) {
      SynthDeviceParams p;
      p.n_points = o.n_points;
      p.n_devices = o.n_devices;
      p.outlier_device_fraction = o.outlier_device_fraction;
      (std::string(kind) == "label" ? p.label_noise : p.measurement_noise) = level;
      NoiseResult r;
      r.kind = kind;
      r.noise = level;
      const double n = static_cast<double>(std::max<std::size_t>(o.trials, 1));
      for (std::size_t t = 0; t < std::max<std::size_t>(o.trials, 1); ++t) {
        const auto one = device_explanation_accuracy(p, o.seed + t);
        r.score.precision += one.score.precision / n;
        r.score.recall += one.score.recall / n;
        r.score.f1 += one.score.f1 / n;
        r.explanations += one.explanations / n;
      }
      out.push_back(r);
    }
  }
  return out;
}

inline CsvTable to_table(const std::vector<NoiseResult>& rs) {
  CsvTable t{{"noise_kind", "noise", "precision", "recall", "f1", "explanations"}, {}};
  for (const auto& r : rs)
    t.rows.push_back({r.kind, fmt(r.noise), fmt(r.score.precision), fmt(r.score.recall), fmt(r.score.f1), fmt(r.explanations)});
  return t;
}

// ---------------------------------------------------------------------------
// Contamination robustness

/// Area under the ROC curve by the rank-sum statistic; ties share the
/// average rank.
inline double rank_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (positive[order[k]]) {
        pos_rank_sum += avg;
        ++n_pos;
      }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nan("");
  const double np = static_cast<double>(n_pos);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

struct ContaminationResult {
  double contamination = 0.0;
  int dims = 1;
  std::string classifier;
  double auc = 0.0;
};

struct ContaminationOptions {
  std::size_t n_points = 100000;
  std::vector<double> levels{0.01, 0.1, 0.2, 0.25, 0.3, 0.4, 0.45};
  std::uint64_t seed = 1;
  // At 40% contamination a random (d+1)-subset is all inliers with
  // probability about 0.2, so a handful of starts can all straddle both balls.
  std::size_t mcd_starts = 50;
};

/// Trains each classifier on the full contaminated sample and scores the
/// same points.
inline std::vector<ContaminationResult> contamination_experiment(const ContaminationOptions& o) {
  std::vector<ContaminationResult> out;
  for (int dims : {1, 2}) {
    for (double c : o.levels) {
      ContaminationParams p;
      p.n_points = o.n_points;
      p.contamination = c;
      p.dims = dims;
      p.seed = o.seed;
      const auto pts = contamination_points(p);
      std::vector<std::vector<double>> x;
      std::vector<bool> truth;
      for (const auto& pt : pts) {
        x.push_back(pt.metrics);
        truth.push_back(pt.truth.value_or(false));
      }
      std::vector<ClassifierKind> kinds{ClassifierKind::ZScore, ClassifierKind::Mcd};
      if (dims == 1) kinds.insert(kinds.begin() + 1, ClassifierKind::Mad);
      for (auto kind : kinds) {
        McdOptions mcd;
        mcd.n_starts = o.mcd_starts;
        const auto model = ScoringModel::train(kind, x, mcd, Rng::mix(o.seed, 31));
        std::vector<double> s;
        s.reserve(x.size());
        for (const auto& v : x) s.push_back(model.score(v));
        out.push_back({c, dims, detail::classifier_name(kind), rank_auc(s, truth)});
      }
    }
  }
  return out;
}

inline CsvTable to_table(const std::vector<ContaminationResult>& rs) {
  CsvTable t{{"contamination", "dims", "classifier", "auc"}, {}};
  for (const auto& r : rs) t.rows.push_back({fmt(r.contamination), std::to_string(r.dims), r.classifier, fmt(r.auc)});
  return t;
}

// ---------------------------------------------------------------------------
// Adaptivity under distribution shift and an arrival spike

struct AdaptivityOptions {
  AdaptivityParams stream;
  double period_seconds = 1.0;
  double decay_rate = 0.5;
  std::size_t reservoir_size = 2000;
  std::size_t period_sample_size = 500;
  std::uint64_t seed = 1;
};

struct AdaptivityRow {
  std::string config;
  double second = 0.0;
  double d0_risk_ratio = 0.0;
  bool d0_reported = false;
  double model_median = std::nan("");
  double cutoff = std::nan("");
  double outlier_fraction = 0.0;  // within this second
};

inline QuerySpec adaptivity_spec(const AdaptivityOptions& o, SamplerPolicy sampler) {
  QuerySpec spec;
  spec.query_id = std::string("adaptivity-") + detail::sampler_name(sampler);
  spec.mode = QueryMode::Streaming;
  spec.source.kind = SourceKind::SyntheticAdaptivity;
  spec.source.adaptivity = o.stream;
  spec.source.batch_size = 1 << 16;
  spec.sampler = sampler;
  spec.decay_period = {DecayPeriod::Kind::Seconds, o.period_seconds};
  spec.decay_rate = o.decay_rate;
  spec.reservoir_size = o.reservoir_size;
  spec.period_sample_size = o.period_sample_size;
  spec.random_seed = o.seed;
  return spec;
}

/// Feeds the scripted stream one second per batch and records D0's risk
/// ratio after each second.
inline std::vector<AdaptivityRow> adaptivity_run(const AdaptivityOptions& o, SamplerPolicy sampler) {
  StreamingPipeline pipe(adaptivity_spec(o, sampler));
  const auto& spec = pipe.spec();
  auto source = open_source(spec.source, spec, pipe.dictionary());
  const AttributeId d0 = pipe.dictionary().find("device", device_name(0));
  std::vector<AdaptivityRow> rows;
  std::vector<Point> second;
  double current = 0.0;
  auto flush = [&] {
    const std::size_t before = pipe.outlier_count();
    pipe.process_batch(second);
    pipe.advance_time(current + 1.0);
    AdaptivityRow r;
    r.config = detail::sampler_name(sampler);
    r.second = current;
    r.d0_risk_ratio = pipe.summarizer().singleton_stats(d0).risk_ratio;
    for (const auto& e : pipe.explanation_records())
      if (e.items.size() == 1 && e.items[0] == d0) r.d0_reported = true;
    if (const auto* m = std::get_if<MadModel>(&pipe.classifier().model().variant())) r.model_median = m->median;
    r.cutoff = pipe.cutoff().value_or(std::nan(""));
    r.outlier_fraction = second.empty() ? 0.0
                                        : static_cast<double>(pipe.outlier_count() - before) /
                                              static_cast<double>(second.size());
    rows.push_back(r);
    second.clear();
  };
  while (auto batch = source->next_batch()) {
    for (auto& p : *batch) {
      const double s = std::floor(*p.timestamp);
      if (s != current && !second.empty()) flush();
      current = s;
      second.push_back(std::move(p));
    }
  }
  if (!second.empty()) flush();
  return rows;
}

inline std::vector<AdaptivityRow> adaptivity_experiment(const AdaptivityOptions& o) {
  std::vector<AdaptivityRow> all;
  for (auto policy : {SamplerPolicy::AdrPerPeriod, SamplerPolicy::Adr, SamplerPolicy::Uniform, SamplerPolicy::TupleDecay}) {
    auto rows = adaptivity_run(o, policy);
    all.insert(all.end(), rows.begin(), rows.end());
  }
  return all;
}

inline CsvTable to_table(const std::vector<AdaptivityRow>& rs) {
  CsvTable t{{"config", "second", "d0_risk_ratio", "d0_reported", "model_median", "cutoff", "outlier_fraction"}, {}};
  for (const auto& r : rs)
    t.rows.push_back({r.config, fmt(r.second), fmt(r.d0_risk_ratio), r.d0_reported ? "1" : "0", fmt(r.model_median),
                      fmt(r.cutoff), fmt(r.outlier_fraction)});
  return t;
}

// ---------------------------------------------------------------------------
// Heavy hitters: AMC against SpaceSaving

/// Zipf(s) item ids over [0, universe) by inverse-CDF lookup.
inline std::vector<std::uint32_t> zipf_stream(std::size_t n, std::size_t universe, double s, std::uint64_t seed) {
  std::vector<double> cdf(universe);
  double acc = 0.0;
  for (std::size_t k = 0; k < universe; ++k) {
    acc += 1.0 / std::pow(static_cast<double>(k + 1), s);
    cdf[k] = acc;
  }
  Rng rng(seed);
  std::vector<std::uint32_t> out(n);
  for (auto& x : out) {
    const double u = rng.uniform() * acc;
    x = static_cast<std::uint32_t>(std::min<std::size_t>(
        static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()), universe - 1));
  }
  return out;
}

inline std::vector<std::uint32_t> uniform_stream(std::size_t n, std::size_t universe, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint32_t> out(n);
  for (auto& x : out) x = static_cast<std::uint32_t>(rng.index(universe));
  return out;
}

struct AmcAudit {
  std::size_t maintains_checked = 0;
  std::size_t carry_bound_violations = 0;  // w > eps * W after a maintain
  std::size_t overshoot_violations = 0;    // estimate - exact > max carry
  std::size_t undershoot_violations = 0;   // estimate < exact
  double worst_overshoot = 0.0;
  double max_carry = 0.0;
};

/// Replays a unit-weight stream into an AMC and an exact decayed counter,
/// decaying both by r every decay_every items, and checks the error
/// bounds after every maintenance pass.
inline AmcAudit audit_amc(const std::vector<std::uint32_t>& stream, std::size_t stable_size, std::size_t decay_every,
                          double r, AmcPolicy policy = {}) {
  AmortizedMaintenanceCounter<std::uint32_t> amc(stable_size, policy);
  std::unordered_map<std::uint32_t, double> exact;
  double exact_scale = 1.0;  // exact counts are stored divided by this
  AmcAudit a;
  const double tol = 1e-9;
  auto check = [&] {
    ++a.maintains_checked;
    if (amc.carry() > amc.epsilon() * amc.total_weight() * (1 + tol) + tol) ++a.carry_bound_violations;
    amc.for_each([&](std::uint32_t k, double est) {
      auto it = exact.find(k);
      const double truth = it == exact.end() ? 0.0 : it->second * exact_scale;
      const double over = est - truth;
      a.worst_overshoot = std::max(a.worst_overshoot, over);
      if (over > amc.max_carry() * (1 + tol) + tol) ++a.overshoot_violations;
      if (over < -tol * std::max(1.0, truth)) ++a.undershoot_violations;
    });
  };
  std::size_t seen = 0;
  for (auto x : stream) {
    const auto runs = amc.maintenance_runs();
    amc.observe(x);
    exact[x] += 1.0 / exact_scale;
    if (amc.maintenance_runs() != runs) check();
    if (decay_every && ++seen % decay_every == 0) {
      const auto runs2 = amc.maintenance_runs();
      amc.decay(r);
      exact_scale *= r;
      if (amc.maintenance_runs() != runs2) check();
    }
  }
  a.max_carry = amc.max_carry();
  return a;
}

struct HeavyHitterBench {
  std::string sketch;
  std::string stream;
  std::size_t size = 0;
  std::size_t items = 0;
  double updates_per_sec = 0.0;
  double max_abs_error_top100 = 0.0;
};

struct AmcBenchOptions {
  std::size_t items = 1000000;
  std::size_t universe = 1000000;
  std::vector<std::size_t> sizes{100, 1000, 10000};
  std::uint64_t seed = 1;
};

inline std::vector<HeavyHitterBench> amc_bench(const AmcBenchOptions& o) {
  using Clock = std::chrono::steady_clock;
  std::vector<HeavyHitterBench> out;
  const std::vector<std::pair<std::string, std::vector<std::uint32_t>>> streams{
      {"zipf1.1", zipf_stream(o.items, o.universe, 1.1, Rng::mix(o.seed, 41))},
      {"uniform", uniform_stream(o.items, o.universe, Rng::mix(o.seed, 42))}};
  for (const auto& [name, s] : streams) {
    std::unordered_map<std::uint32_t, double> exact;
    for (auto x : s) exact[x] += 1.0;
    std::vector<std::pair<double, std::uint32_t>> top;
    for (const auto& [k, c] : exact) top.emplace_back(c, k);
    std::partial_sort(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(100, top.size())),
                      top.end(), [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    top.resize(std::min<std::size_t>(100, top.size()));
    for (auto size : o.sizes) {
      {
        AmortizedMaintenanceCounter<std::uint32_t> amc(size);
        const auto t0 = Clock::now();
        for (auto x : s) amc.observe(x);
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        double err = 0.0;
        for (const auto& [c, k] : top) err = std::max(err, std::abs(amc.estimate(k) - c));
        out.push_back({"amc", name, size, s.size(), static_cast<double>(s.size()) / secs, err});
      }
      {
        SpaceSaving<std::uint32_t> ss(size);
        const auto t0 = Clock::now();
        for (auto x : s) ss.observe(x);
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        double err = 0.0;
        for (const auto& [c, k] : top) err = std::max(err, std::abs(ss.estimate(k) - c));
        out.push_back({"space-saving", name, size, s.size(), static_cast<double>(s.size()) / secs, err});
      }
    }
  }
  return out;
}

inline CsvTable to_table(const std::vector<HeavyHitterBench>& rs) {
  CsvTable t{{"sketch", "stream", "size", "items", "updates_per_sec", "max_abs_error_top100"}, {}};
  for (const auto& r : rs)
    t.rows.push_back({r.sketch, r.stream, fmt(r.size), fmt(r.items), fmt(r.updates_per_sec), fmt(r.max_abs_error_top100)});
  return t;
}

// ---------------------------------------------------------------------------
// Explanation cost: cardinality-aware against two-pass FP-growth

struct ExplainFixtureOptions {
  std::size_t n_points = 1000000;
  double outlier_fraction = 0.01;
  std::size_t columns = 20;
  std::size_t cardinality = 25;
  double planted_rate = 0.6;  // outliers carrying the planted combination
  std::uint64_t seed = 1;
};

struct ExplainFixture {
  std::vector<std::vector<AttributeId>> outliers;
  std::vector<std::vector<AttributeId>> inliers;
};

/// Item id of value v in column j is j * cardinality + v. Outliers carry
/// value 0 in columns 0..2 with probability planted_rate; everything
/// else is uniform.
inline ExplainFixture make_explain_fixture(const ExplainFixtureOptions& o) {
  Rng rng(Rng::mix(o.seed, 51));
  ExplainFixture f;
  const auto n_out = static_cast<std::size_t>(std::llround(o.outlier_fraction * static_cast<double>(o.n_points)));
  f.outliers.reserve(n_out);
  f.inliers.reserve(o.n_points - n_out);
  for (std::size_t i = 0; i < o.n_points; ++i) {
    const bool outlier = i < n_out;
    std::vector<AttributeId> t(o.columns);
    const bool planted = outlier && rng.bernoulli(o.planted_rate);
    for (std::size_t j = 0; j < o.columns; ++j) {
      const std::size_t v = planted && j < 3 ? 0 : rng.index(o.cardinality);
      t[j] = static_cast<AttributeId>(j * o.cardinality + v);
    }
    (outlier ? f.outliers : f.inliers).push_back(std::move(t));
  }
  return f;
}

struct ExplainBenchResult {
  std::size_t points = 0;
  double optimized_ms = 0.0;
  double two_pass_ms = 0.0;
  double speedup = 0.0;
  bool identical = false;
  std::size_t explanations = 0;
  ExplainStats optimized_stats;
  ExplainStats two_pass_stats;
};

/// Same records, in any order.
inline bool same_records(std::vector<ExplanationRecord> a, std::vector<ExplanationRecord> b) {
  if (a.size() != b.size()) return false;
  auto by_items = [](const ExplanationRecord& x, const ExplanationRecord& y) { return x.items < y.items; };
  std::sort(a.begin(), a.end(), by_items);
  std::sort(b.begin(), b.end(), by_items);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].items != b[i].items || a[i].ao != b[i].ao || a[i].ai != b[i].ai || a[i].bo != b[i].bo ||
        a[i].bi != b[i].bi || a[i].num_tests != b[i].num_tests)
      return false;
  }
  return true;
}

inline ExplainBenchResult explain_bench(const ExplainFixture& f, const ExplainOptions& opts = {}) {
  using Clock = std::chrono::steady_clock;
  using Tx = std::vector<AttributeId>;
  ExplainBenchResult r;
  r.points = f.outliers.size() + f.inliers.size();
  auto t0 = Clock::now();
  auto fast = explain_batch<Tx>(f.outliers, f.inliers, opts);
  r.optimized_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  t0 = Clock::now();
  auto slow = explain_two_pass<Tx>(f.outliers, f.inliers, opts);
  r.two_pass_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  r.speedup = r.optimized_ms > 0.0 ? r.two_pass_ms / r.optimized_ms : 0.0;
  r.identical = fast.num_tests == slow.num_tests && same_records(fast.records, slow.records);
  r.explanations = fast.records.size();
  r.optimized_stats = fast.stats;
  r.two_pass_stats = slow.stats;
  return r;
}

inline CsvTable to_table(const std::vector<ExplainBenchResult>& rs) {
  CsvTable t{{"points", "optimized_ms", "two_pass_ms", "speedup", "identical", "explanations",
              "optimized_inlier_work", "two_pass_inlier_work"},
             {}};
  for (const auto& r : rs)
    t.rows.push_back({fmt(r.points), fmt(r.optimized_ms), fmt(r.two_pass_ms), fmt(r.speedup), r.identical ? "1" : "0",
                      fmt(r.explanations), fmt(r.optimized_stats.inlier_expansions),
                      fmt(r.two_pass_stats.inlier_expansions)});
  return t;
}

}  // namespace fastdata
