#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fastdata/core/dictionary.hpp"
#include "fastdata/core/point.hpp"
#include "fastdata/error.hpp"

namespace fastdata {

inline constexpr int kReportSchemaVersion = 1;

/// One explanation with its items decoded to (attribute, value) pairs,
/// sorted by attribute name.
struct ReportExplanation {
  std::vector<std::pair<std::string, std::string>> attributes;
  double outlier_support = 0.0;
  double risk_ratio = 0.0;
  double ao = 0.0, ai = 0.0, bo = 0.0, bi = 0.0;
  std::optional<std::pair<double, double>> ci95;
  std::vector<std::string> flags;
  std::size_t num_tests = 1;

  friend bool operator==(const ReportExplanation&, const ReportExplanation&) = default;
};

struct ReportTimings {
  double train_ms = 0.0;
  double score_ms = 0.0;
  double explain_ms = 0.0;

  friend bool operator==(const ReportTimings&, const ReportTimings&) = default;
};

/// Result of one query, or one emission of a streaming query.
struct QueryReport {
  int schema_version = kReportSchemaVersion;
  std::string query_id;
  std::string mode = "oneshot";
  std::size_t points_processed = 0;
  std::size_t outlier_count = 0;
  std::optional<double> cutoff;
  std::string model;  // scoring family used
  std::vector<ReportExplanation> explanations;
  ReportTimings timings;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::size_t rows_skipped = 0;
  std::size_t emission = 0;  // streaming: 1-based emission index
  std::vector<std::string> warnings;

  friend bool operator==(const QueryReport&, const QueryReport&) = default;
};

inline ReportExplanation decode_record(const ExplanationRecord& r,
                                       const std::vector<AttributeDictionary::Entry>& dict) {
  ReportExplanation e;
  for (AttributeId a : r.items) {
    if (a < 0 || static_cast<std::size_t>(a) >= dict.size())
      throw std::out_of_range("explanation refers to unknown attribute id " + std::to_string(a));
    e.attributes.push_back(dict[static_cast<std::size_t>(a)]);
  }
  std::sort(e.attributes.begin(), e.attributes.end());
  e.outlier_support = r.outlier_support;
  e.risk_ratio = r.risk_ratio;
  e.ao = r.ao;
  e.ai = r.ai;
  e.bo = r.bo;
  e.bi = r.bi;
  e.ci95 = r.ci;
  e.flags = r.flags;
  e.num_tests = r.num_tests;
  return e;
}

namespace detail {

// JSON has no infinity; +inf ratios are written as the string "Infinity".
inline nlohmann::json real_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
  if (std::isnan(v)) return "NaN";
  return v;
}

inline double real_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "Infinity") return kInfinity;
    if (s == "-Infinity") return -kInfinity;
    if (s == "NaN") return std::nan("");
  }
  throw DataError("expected a number in report, got " + j.dump());
}

}  // namespace detail

inline nlohmann::json to_json(const ReportExplanation& e) {
  nlohmann::json attrs = nlohmann::json::object();
  for (const auto& [k, v] : e.attributes) attrs[k] = v;
  nlohmann::json ci = nullptr;
  if (e.ci95) ci = nlohmann::json::array({detail::real_to_json(e.ci95->first), detail::real_to_json(e.ci95->second)});
  return {{"attributes", attrs},
          {"outlierSupport", detail::real_to_json(e.outlier_support)},
          {"riskRatio", detail::real_to_json(e.risk_ratio)},
          {"ao", e.ao},
          {"ai", e.ai},
          {"bo", e.bo},
          {"bi", e.bi},
          {"ci95", ci},
          {"flags", e.flags},
          {"numTests", e.num_tests}};
}

inline nlohmann::json to_json(const QueryReport& r) {
  nlohmann::json ex = nlohmann::json::array();
  for (const auto& e : r.explanations) ex.push_back(to_json(e));
  return {{"schemaVersion", r.schema_version},
          {"queryId", r.query_id},
          {"mode", r.mode},
          {"pointsProcessed", r.points_processed},
          {"outlierCount", r.outlier_count},
          {"cutoff", r.cutoff ? detail::real_to_json(*r.cutoff) : nlohmann::json(nullptr)},
          {"model", r.model},
          {"explanations", ex},
          {"timings", {{"trainMs", r.timings.train_ms}, {"scoreMs", r.timings.score_ms}, {"explainMs", r.timings.explain_ms}}},
          {"config", r.config},
          {"seed", r.seed},
          {"rowsSkipped", r.rows_skipped},
          {"emission", r.emission},
          {"warnings", r.warnings}};
}

inline ReportExplanation explanation_from_json(const nlohmann::json& j) {
  ReportExplanation e;
  for (const auto& [k, v] : j.at("attributes").items()) e.attributes.emplace_back(k, v.get<std::string>());
  std::sort(e.attributes.begin(), e.attributes.end());
  e.outlier_support = detail::real_from_json(j.at("outlierSupport"));
  e.risk_ratio = detail::real_from_json(j.at("riskRatio"));
  e.ao = j.at("ao").get<double>();
  e.ai = j.at("ai").get<double>();
  e.bo = j.at("bo").get<double>();
  e.bi = j.at("bi").get<double>();
  if (const auto& ci = j.at("ci95"); !ci.is_null())
    e.ci95 = std::make_pair(detail::real_from_json(ci.at(0)), detail::real_from_json(ci.at(1)));
  e.flags = j.at("flags").get<std::vector<std::string>>();
  e.num_tests = j.at("numTests").get<std::size_t>();
  return e;
}

inline QueryReport report_from_json(const nlohmann::json& j) {
  try {
    QueryReport r;
    r.schema_version = j.at("schemaVersion").get<int>();
    if (r.schema_version != kReportSchemaVersion)
      throw DataError("unsupported report schema version " + std::to_string(r.schema_version));
    r.query_id = j.at("queryId").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.points_processed = j.at("pointsProcessed").get<std::size_t>();
    r.outlier_count = j.at("outlierCount").get<std::size_t>();
    if (!j.at("cutoff").is_null()) r.cutoff = detail::real_from_json(j.at("cutoff"));
    r.model = j.value("model", "");
    for (const auto& e : j.at("explanations")) r.explanations.push_back(explanation_from_json(e));
    const auto& t = j.at("timings");
    r.timings = {t.at("trainMs").get<double>(), t.at("scoreMs").get<double>(), t.at("explainMs").get<double>()};
    r.config = j.at("config");
    r.seed = j.at("seed").get<std::uint64_t>();
    r.rows_skipped = j.value("rowsSkipped", std::size_t{0});
    r.emission = j.value("emission", std::size_t{0});
    r.warnings = j.value("warnings", std::vector<std::string>{});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
}

}  // namespace fastdata
