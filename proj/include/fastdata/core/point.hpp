#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fastdata {

using AttributeId = std::int32_t;

/// Reserved id for a missing attribute value. Never produced by the
/// dictionary and never mined.
inline constexpr AttributeId kNullAttribute = -1;

/// The unit of analysis: a metric vector plus one dictionary-encoded
/// value per configured attribute column.
struct Point {
  std::vector<double> metrics;
  std::vector<AttributeId> attributes;
  std::optional<double> timestamp;
  // Ground truth from synthetic generators. Evaluation only; the
  // explanation operators never look at it.
  std::optional<bool> truth;
};

struct Label {
  bool outlier = false;
  double score = 0.0;

  friend bool operator==(const Label&, const Label&) = default;
};

struct LabeledPoint {
  Label label;
  Point point;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// An attribute-value combination together with the contingency counts
/// that justify it. Counts are reals because decayed streams produce
/// fractional weights.
struct ExplanationRecord {
  std::vector<AttributeId> items;  // sorted ascending
  double ao = 0.0;                 // combination count among outliers
  double ai = 0.0;                 // combination count among inliers
  double bo = 0.0;                 // other outliers
  double bi = 0.0;                 // other inliers
  double outlier_support = 0.0;
  double risk_ratio = 0.0;
  std::optional<std::pair<double, double>> ci;
  std::size_t num_tests = 1;
  std::vector<std::string> flags;
};

}  // namespace fastdata
