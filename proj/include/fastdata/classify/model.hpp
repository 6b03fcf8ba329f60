#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fastdata/classify/baselines.hpp"
#include "fastdata/classify/mad.hpp"
#include "fastdata/classify/mcd.hpp"
#include "fastdata/core/query_spec.hpp"

namespace fastdata {

/// Auto picks MAD for one metric and MCD for two or more.
inline ClassifierKind resolve_classifier(ClassifierKind kind, std::size_t dims) {
  if (kind != ClassifierKind::Auto) return kind;
  return dims == 1 ? ClassifierKind::Mad : ClassifierKind::Mcd;
}

/// A trained density model of one of the supported families.
class ScoringModel {
 public:
  using Variant = std::variant<MadModel, McdModel, ZScoreModel>;

  explicit ScoringModel(Variant v) : model_(std::move(v)) {}

  static ScoringModel train(ClassifierKind kind, const std::vector<std::vector<double>>& sample,
                            const McdOptions& mcd, std::uint64_t seed) {
    if (sample.empty()) throw DegenerateError("cannot train on an empty sample");
    const std::size_t dims = sample.front().size();
    switch (resolve_classifier(kind, dims)) {
      case ClassifierKind::Mad: {
        if (dims != 1) throw ConfigError("MAD scores a single metric; query has " + std::to_string(dims));
        std::vector<double> xs;
        xs.reserve(sample.size());
        for (const auto& p : sample) xs.push_back(p[0]);
        return ScoringModel(train_mad(xs));
      }
      case ClassifierKind::ZScore:
        return ScoringModel(train_zscore(sample));
      default:
        return ScoringModel(train_fastmcd(sample, mcd, seed));
    }
  }

  double score(std::span<const double> x) const {
    return std::visit(
        [&](const auto& m) -> double {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, MadModel>) {
            return score_mad(m, x[0]);
          } else if constexpr (std::is_same_v<M, McdModel>) {
            return score_mahalanobis(m, x);
          } else {
            return score_zscore(m, x);
          }
        },
        model_);
  }

  const char* family() const {
    switch (model_.index()) {
      case 0: return "mad";
      case 1: return "mcd";
      default: return "zscore";
    }
  }

  const Variant& variant() const { return model_; }

 private:
  Variant model_;
};

}  // namespace fastdata
