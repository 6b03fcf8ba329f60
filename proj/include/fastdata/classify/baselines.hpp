#pragma once

#include <cmath>
#include <cstddef>
#include <regex>
#include <span>
#include <string>
#include <vector>

#include "fastdata/core/point.hpp"
#include "fastdata/error.hpp"

namespace fastdata {

/// Mean / standard deviation model (population sd). Not robust; kept for
/// comparison.
struct ZScoreModel {
  std::vector<double> mean;
  std::vector<double> sd;
};

inline double score_zscore(double mean, double sd, double x) {
  if (!(sd > 0.0)) throw DegenerateError("z-score needs a positive standard deviation");
  return std::abs(x - mean) / sd;
}

inline ZScoreModel train_zscore(const std::vector<std::vector<double>>& sample) {
  if (sample.empty()) throw DegenerateError("cannot train z-score on an empty sample");
  const std::size_t d = sample.front().size();
  ZScoreModel m{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  const double n = static_cast<double>(sample.size());
  for (const auto& x : sample)
    for (std::size_t j = 0; j < d; ++j) m.mean[j] += x[j] / n;
  for (const auto& x : sample)
    for (std::size_t j = 0; j < d; ++j) m.sd[j] += (x[j] - m.mean[j]) * (x[j] - m.mean[j]) / n;
  for (auto& s : m.sd) {
    s = std::sqrt(s);
    if (!(s > 0.0)) throw DegenerateError("z-score sample has zero variance");
  }
  return m;
}

/// Univariate z-score; with several metrics, the norm of the per-metric
/// z-scores.
inline double score_zscore(const ZScoreModel& m, std::span<const double> x) {
  if (x.size() != m.mean.size()) throw DataError("metric dimension does not match the model");
  if (x.size() == 1) return score_zscore(m.mean[0], m.sd[0], x[0]);
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double z = (x[j] - m.mean[j]) / m.sd[j];
    s += z * z;
  }
  return std::sqrt(s);
}

/// Threshold predicate such as "metric[0] > 100" or "l2norm >= 5".
struct Rule {
  enum class Target { Metric, L2Norm };
  enum class Op { Gt, Ge, Lt, Le, Eq, Ne };
  Target target = Target::Metric;
  std::size_t index = 0;
  Op op = Op::Gt;
  double value = 0.0;
  std::string text;

  double lhs(std::span<const double> metrics) const {
    if (target == Target::Metric) return metrics[index];
    double s = 0.0;
    for (double m : metrics) s += m * m;
    return std::sqrt(s);
  }

  bool holds(std::span<const double> metrics) const {
    const double a = lhs(metrics);
    switch (op) {
      case Op::Gt: return a > value;
      case Op::Ge: return a >= value;
      case Op::Lt: return a < value;
      case Op::Le: return a <= value;
      case Op::Eq: return a == value;
      case Op::Ne: return a != value;
    }
    return false;
  }
};

/// Parses a rule and checks metric indices against the query dimension.
inline Rule parse_rule(const std::string& text, std::size_t dims) {
  static const std::regex re(
      R"(^\s*(?:(metric)\s*\[\s*(\d+)\s*\]|(l2norm))\s*(>=|<=|==|!=|>|<)\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw ConfigError("cannot parse rule '" + text + "'");
  Rule r;
  r.text = text;
  if (m[1].matched) {
    r.target = Rule::Target::Metric;
    r.index = std::stoul(m[2].str());
    if (r.index >= dims)
      throw ConfigError("rule '" + text + "' references metric " + std::to_string(r.index) +
                        " but the query has " + std::to_string(dims));
  } else {
    r.target = Rule::Target::L2Norm;
  }
  const std::string op = m[4].str();
  r.op = op == ">"    ? Rule::Op::Gt
         : op == ">=" ? Rule::Op::Ge
         : op == "<"  ? Rule::Op::Lt
         : op == "<=" ? Rule::Op::Le
         : op == "==" ? Rule::Op::Eq
                      : Rule::Op::Ne;
  r.value = std::stod(m[5].str());
  return r;
}

/// Rule labels carry the left-hand side as the score.
inline Label rule_classifier(const Rule& rule, const Point& p) {
  return {rule.holds(p.metrics), rule.lhs(p.metrics)};
}

/// Outlier iff any input is; score is the largest input score.
inline Label hybrid_or(std::span<const Label> labels) {
  if (labels.empty()) throw std::invalid_argument("hybrid_or needs at least one label");
  Label out = labels.front();
  for (const auto& l : labels.subspan(1)) {
    out.outlier = out.outlier || l.outlier;
    out.score = std::max(out.score, l.score);
  }
  return out;
}

}  // namespace fastdata
