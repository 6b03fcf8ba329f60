#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

namespace fastdata {

enum class OperatorKind { Ingestor, Transformer, Classifier, Explainer };

/// Element type carried on a stream between two operators.
enum class StreamType { Nothing, Points, LabeledPoints, Explanations };

struct OperatorSignature {
  OperatorKind kind;
  StreamType input;
  StreamType output;

  friend constexpr bool operator==(const OperatorSignature&, const OperatorSignature&) = default;
};

constexpr OperatorSignature signature_of(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::Ingestor:
      return {kind, StreamType::Nothing, StreamType::Points};
    case OperatorKind::Transformer:
      return {kind, StreamType::Points, StreamType::Points};
    case OperatorKind::Classifier:
      return {kind, StreamType::Points, StreamType::LabeledPoints};
    case OperatorKind::Explainer:
      return {kind, StreamType::LabeledPoints, StreamType::Explanations};
  }
  return {kind, StreamType::Nothing, StreamType::Nothing};
}

constexpr const char* to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::Ingestor: return "Ingestor";
    case OperatorKind::Transformer: return "Transformer";
    case OperatorKind::Classifier: return "Classifier";
    case OperatorKind::Explainer: return "Explainer";
  }
  return "?";
}

constexpr const char* to_string(StreamType t) {
  switch (t) {
    case StreamType::Nothing: return "nothing";
    case StreamType::Points: return "Point";
    case StreamType::LabeledPoints: return "(Label, Point)";
    case StreamType::Explanations: return "ExplanationRecord";
  }
  return "?";
}

struct TypecheckError {
  std::size_t boundary;  // index of the stage whose input does not fit
  std::string message;
};

/// Constant-evaluable form of the composition rule, for static_assert on
/// pipelines assembled at compile time.
constexpr bool composes(std::span<const OperatorSignature> stages) {
  if (stages.empty() || stages.front().kind != OperatorKind::Ingestor) return false;
  for (std::size_t i = 1; i < stages.size(); ++i) {
    if (stages[i - 1].output != stages[i].input) return false;
  }
  return stages.back().output == StreamType::Explanations;
}

/// Accepts a stage list iff it starts with an ingestor, every adjacent
/// output/input pair matches, and the last stage emits explanations.
inline std::optional<TypecheckError> typecheck_pipeline(std::span<const OperatorSignature> stages) {
  if (stages.empty()) return TypecheckError{0, "pipeline has no stages"};
  if (stages.front().kind != OperatorKind::Ingestor) {
    return TypecheckError{0, std::string("pipeline must start with an Ingestor, found ") +
                                 to_string(stages.front().kind)};
  }
  for (std::size_t i = 1; i < stages.size(); ++i) {
    if (stages[i - 1].output != stages[i].input) {
      return TypecheckError{
          i, "stage " + std::to_string(i - 1) + " (" + to_string(stages[i - 1].kind) +
                 ") emits " + to_string(stages[i - 1].output) + " but stage " +
                 std::to_string(i) + " (" + to_string(stages[i].kind) + ") consumes " +
                 to_string(stages[i].input)};
    }
  }
  if (stages.back().output != StreamType::Explanations) {
    return TypecheckError{stages.size(), std::string("pipeline ends with ") +
                                             to_string(stages.back().output) +
                                             ", expected an ExplanationRecord stream"};
  }
  return std::nullopt;
}

}  // namespace fastdata
