#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fastdata/classify/model.hpp"
#include "fastdata/classify/threshold.hpp"
#include "fastdata/core/operators.hpp"
#include "fastdata/engine/transforms.hpp"
#include "fastdata/explain/batch.hpp"
#include "fastdata/explain/ranking.hpp"

namespace fastdata {

/// A materialized stream between two runtime-assembled operators.
using StreamValue = std::variant<std::monostate, std::vector<Point>, std::vector<LabeledPoint>,
                                 std::vector<ExplanationRecord>>;

inline StreamType type_of(const StreamValue& v) {
  switch (v.index()) {
    case 1: return StreamType::Points;
    case 2: return StreamType::LabeledPoints;
    case 3: return StreamType::Explanations;
    default: return StreamType::Nothing;
  }
}

/// Operator assembled at run time. run() unpacks its input with
/// std::get, so a type mismatch surfaces as std::bad_variant_access.
struct DynamicStage {
  OperatorSignature signature;
  std::function<StreamValue(StreamValue)> run;
};

inline DynamicStage make_ingestor(std::vector<Point> points) {
  auto data = std::make_shared<const std::vector<Point>>(std::move(points));
  return {signature_of(OperatorKind::Ingestor), [data](StreamValue in) -> StreamValue {
            std::get<std::monostate>(in);
            return *data;
          }};
}

inline DynamicStage make_transformer(std::vector<std::string> names) {
  return {signature_of(OperatorKind::Transformer), [names](StreamValue in) -> StreamValue {
            auto pts = std::get<std::vector<Point>>(std::move(in));
            TransformChain chain(names);
            std::vector<std::vector<double>> sample;
            for (const auto& p : pts) sample.push_back(p.metrics);
            chain.fit(sample);
            for (auto& p : pts) chain.apply(p.metrics);
            return pts;
          }};
}

/// Trains on the whole input and labels it at the given percentile.
inline DynamicStage make_classifier(ClassifierKind kind, double outlier_percentile, McdOptions mcd = {},
                                    std::uint64_t seed = 0) {
  return {signature_of(OperatorKind::Classifier), [=](StreamValue in) -> StreamValue {
            auto pts = std::get<std::vector<Point>>(std::move(in));
            std::vector<LabeledPoint> out;
            if (pts.empty()) return out;
            std::vector<std::vector<double>> sample;
            for (const auto& p : pts) sample.push_back(p.metrics);
            const auto model = ScoringModel::train(kind, sample, mcd, seed);
            std::vector<double> scores;
            for (const auto& p : pts) scores.push_back(model.score(p.metrics));
            const double cutoff = nearest_rank_quantile(scores, 1.0 - outlier_percentile);
            for (std::size_t i = 0; i < pts.size(); ++i) out.push_back({classify(scores[i], cutoff), std::move(pts[i])});
            return out;
          }};
}

inline DynamicStage make_explainer(ExplainOptions opts) {
  return {signature_of(OperatorKind::Explainer), [opts](StreamValue in) -> StreamValue {
            const auto lps = std::get<std::vector<LabeledPoint>>(std::move(in));
            std::vector<const Point*> o, i;
            for (const auto& lp : lps) (lp.label.outlier ? o : i).push_back(&lp.point);
            auto ex = explain_batch<const Point*>(o, i, opts);
            rank_explanations(ex.records);
            return std::move(ex.records);
          }};
}

/// Typechecks the stage list, then runs it front to back.
inline std::vector<ExplanationRecord> execute(std::span<const DynamicStage> stages) {
  std::vector<OperatorSignature> sigs;
  for (const auto& s : stages) sigs.push_back(s.signature);
  if (auto err = typecheck_pipeline(sigs)) throw ConfigError(err->message);
  StreamValue v;
  for (const auto& s : stages) v = s.run(std::move(v));
  return std::get<std::vector<ExplanationRecord>>(std::move(v));
}

}  // namespace fastdata
