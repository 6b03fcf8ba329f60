#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fastdata/core/dictionary.hpp"
#include "fastdata/core/point.hpp"
#include "fastdata/error.hpp"
#include "fastdata/ingest/source.hpp"

namespace fastdata {

/// Column mapping shared by the file readers.
struct ColumnSelection {
  std::vector<std::string> metrics;
  std::vector<std::string> attributes;
  std::string timestamp;  // empty: none
  std::map<std::string, std::vector<double>> buckets;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

/// Splits one CSV record. Handles double-quoted fields with "" escapes;
/// records do not span lines.
inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

inline std::string format_edge(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

/// Label of the half-open bucket that contains v.
inline std::string bucket_label(const std::vector<double>& edges, double v) {
  std::size_t i = 0;
  while (i < edges.size() && v >= edges[i]) ++i;
  const std::string lo = i == 0 ? "-inf" : format_edge(edges[i - 1]);
  const std::string hi = i == edges.size() ? "inf" : format_edge(edges[i]);
  return "[" + lo + "," + hi + ")";
}

/// Encodes one attribute cell. Empty cells become the NULL id.
inline AttributeId encode_cell(AttributeDictionary& dict, const ColumnSelection& cols,
                               const std::string& name, std::string_view raw, bool* bad) {
  raw = trim(raw);
  if (raw.empty()) return kNullAttribute;
  if (auto it = cols.buckets.find(name); it != cols.buckets.end()) {
    auto v = parse_real(raw);
    if (!v) {
      *bad = true;
      return kNullAttribute;
    }
    return dict.encode(name, bucket_label(it->second, *v));
  }
  return dict.encode(name, raw);
}

}  // namespace detail

/// CSV with a header row. Metric cells must parse as decimal reals; rows
/// that do not are skipped and counted. Attribute cells are taken
/// verbatim unless bucket edges are configured for the column.
class CsvSource final : public PointSource {
 public:
  CsvSource(const std::string& path, ColumnSelection cols, AttributeDictionary& dict,
            std::size_t batch_size)
      : in_(path), cols_(std::move(cols)), dict_(dict), batch_size_(batch_size ? batch_size : 1) {
    if (!in_) throw ConfigError("cannot open CSV file '" + path + "'");
    std::string header;
    if (!std::getline(in_, header)) throw ConfigError("CSV file '" + path + "' has no header row");
    const auto names = detail::split_csv(header);
    auto index_of = [&](const std::string& col) {
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (detail::trim(names[i]) == col) return i;
      }
      throw ConfigError("CSV file '" + path + "' has no column '" + col + "'");
    };
    for (const auto& m : cols_.metrics) metric_idx_.push_back(index_of(m));
    for (const auto& a : cols_.attributes) attr_idx_.push_back(index_of(a));
    if (!cols_.timestamp.empty()) ts_idx_ = index_of(cols_.timestamp);
    width_ = names.size();
  }

  std::optional<std::vector<Point>> next_batch() override {
    std::vector<Point> batch;
    std::string line;
    while (batch.size() < batch_size_ && std::getline(in_, line)) {
      if (detail::trim(line).empty()) continue;
      ++stats_.rows_read;
      if (auto p = parse_row(line)) {
        batch.push_back(std::move(*p));
        ++stats_.points_emitted;
      }
    }
    if (batch.empty()) return std::nullopt;
    return batch;
  }

 private:
  std::optional<Point> parse_row(const std::string& line) {
    const auto fields = detail::split_csv(line);
    const std::size_t row = stats_.rows_read;
    if (fields.size() < width_) {
      stats_.reject("row " + std::to_string(row) + ": expected " + std::to_string(width_) +
                    " fields, found " + std::to_string(fields.size()));
      return std::nullopt;
    }
    Point p;
    p.metrics.reserve(metric_idx_.size());
    for (std::size_t k = 0; k < metric_idx_.size(); ++k) {
      auto v = detail::parse_real(fields[metric_idx_[k]]);
      if (!v) {
        stats_.reject("row " + std::to_string(row) + ": metric '" + cols_.metrics[k] +
                      "' is not a finite real: '" + fields[metric_idx_[k]] + "'");
        return std::nullopt;
      }
      p.metrics.push_back(*v);
    }
    if (ts_idx_) {
      auto t = detail::parse_real(fields[*ts_idx_]);
      if (!t) {
        stats_.reject("row " + std::to_string(row) + ": bad timestamp");
        return std::nullopt;
      }
      p.timestamp = *t;
    }
    p.attributes.reserve(attr_idx_.size());
    for (std::size_t k = 0; k < attr_idx_.size(); ++k) {
      bool bad = false;
      p.attributes.push_back(
          detail::encode_cell(dict_, cols_, cols_.attributes[k], fields[attr_idx_[k]], &bad));
      if (bad) {
        stats_.reject("row " + std::to_string(row) + ": attribute '" + cols_.attributes[k] +
                      "' has bucket edges but a non-numeric value");
        return std::nullopt;
      }
    }
    return p;
  }

  std::ifstream in_;
  ColumnSelection cols_;
  AttributeDictionary& dict_;
  std::size_t batch_size_;
  std::vector<std::size_t> metric_idx_;
  std::vector<std::size_t> attr_idx_;
  std::optional<std::size_t> ts_idx_;
  std::size_t width_ = 0;
};

/// One JSON object per line, fields addressed by name. A floating-point
/// attribute value without configured bucket edges is a configuration
/// error: continuous attributes are not discretized automatically.
class JsonLinesSource final : public PointSource {
 public:
  JsonLinesSource(const std::string& path, ColumnSelection cols, AttributeDictionary& dict,
                  std::size_t batch_size)
      : in_(path), cols_(std::move(cols)), dict_(dict), batch_size_(batch_size ? batch_size : 1) {
    if (!in_) throw ConfigError("cannot open JSON-lines file '" + path + "'");
  }

  std::optional<std::vector<Point>> next_batch() override {
    std::vector<Point> batch;
    std::string line;
    while (batch.size() < batch_size_ && std::getline(in_, line)) {
      if (detail::trim(line).empty()) continue;
      ++stats_.rows_read;
      if (auto p = parse_line(line)) {
        batch.push_back(std::move(*p));
        ++stats_.points_emitted;
      }
    }
    if (batch.empty()) return std::nullopt;
    return batch;
  }

 private:
  static std::optional<double> as_real(const nlohmann::json& v) {
    if (v.is_number()) {
      const double d = v.get<double>();
      return std::isfinite(d) ? std::optional<double>(d) : std::nullopt;
    }
    if (v.is_string()) return detail::parse_real(v.get_ref<const std::string&>());
    return std::nullopt;
  }

  std::optional<Point> parse_line(const std::string& line) {
    const std::size_t row = stats_.rows_read;
    nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      stats_.reject("line " + std::to_string(row) + ": not a JSON object");
      return std::nullopt;
    }
    Point p;
    for (const auto& m : cols_.metrics) {
      auto it = obj.find(m);
      std::optional<double> v = it == obj.end() ? std::nullopt : as_real(*it);
      if (!v) {
        stats_.reject("line " + std::to_string(row) + ": metric '" + m + "' missing or not real");
        return std::nullopt;
      }
      p.metrics.push_back(*v);
    }
    if (!cols_.timestamp.empty()) {
      auto it = obj.find(cols_.timestamp);
      std::optional<double> t = it == obj.end() ? std::nullopt : as_real(*it);
      if (!t) {
        stats_.reject("line " + std::to_string(row) + ": bad timestamp");
        return std::nullopt;
      }
      p.timestamp = *t;
    }
    for (const auto& a : cols_.attributes) {
      auto it = obj.find(a);
      if (it == obj.end() || it->is_null()) {
        p.attributes.push_back(kNullAttribute);
        continue;
      }
      std::string text;
      if (it->is_string()) {
        text = it->get<std::string>();
      } else if (it->is_number_float() && !cols_.buckets.count(a)) {
        throw ConfigError("attribute column '" + a +
                          "' holds continuous values; configure attributeBuckets for it");
      } else {
        text = it->dump();
      }
      bool bad = false;
      p.attributes.push_back(detail::encode_cell(dict_, cols_, a, text, &bad));
      if (bad) {
        stats_.reject("line " + std::to_string(row) + ": attribute '" + a +
                      "' has bucket edges but a non-numeric value");
        return std::nullopt;
      }
    }
    return p;
  }

  std::ifstream in_;
  ColumnSelection cols_;
  AttributeDictionary& dict_;
  std::size_t batch_size_;
};

}  // namespace fastdata
