#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "fastdata/core/point.hpp"
#include "fastdata/error.hpp"

namespace fastdata {

/// Point -> Point stage. fit() sees a sample of the metric vectors
/// entering this stage; apply() rewrites one point in place.
class Transform {
 public:
  virtual ~Transform() = default;
  virtual const char* name() const = 0;
  virtual void fit(const std::vector<std::vector<double>>& sample) = 0;
  virtual void apply(std::vector<double>& metrics) const = 0;
};

class IdentityTransform final : public Transform {
 public:
  const char* name() const override { return "identity"; }
  void fit(const std::vector<std::vector<double>>&) override {}
  void apply(std::vector<double>&) const override {}
};

/// Per-metric (x - mean) / sd, with mean and sd taken from the fitted
/// sample. A metric with zero spread is only centred.
class StandardizeTransform final : public Transform {
 public:
  const char* name() const override { return "standardize"; }

  void fit(const std::vector<std::vector<double>>& sample) override {
    if (sample.empty()) return;
    const std::size_t d = sample.front().size();
    mean_.assign(d, 0.0);
    sd_.assign(d, 0.0);
    const double n = static_cast<double>(sample.size());
    for (const auto& x : sample)
      for (std::size_t j = 0; j < d; ++j) mean_[j] += x[j] / n;
    for (const auto& x : sample)
      for (std::size_t j = 0; j < d; ++j) sd_[j] += (x[j] - mean_[j]) * (x[j] - mean_[j]) / n;
    for (auto& s : sd_) s = std::sqrt(s);
  }

  void apply(std::vector<double>& m) const override {
    if (mean_.size() != m.size()) return;  // not fitted yet
    for (std::size_t j = 0; j < m.size(); ++j) {
      m[j] -= mean_[j];
      if (sd_[j] > 0.0) m[j] /= sd_[j];
    }
  }

  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& sd() const { return sd_; }

 private:
  std::vector<double> mean_, sd_;
};

/// Ordered transform list; each stage is fitted on the output of the
/// previous one.
class TransformChain {
 public:
  TransformChain() = default;

  explicit TransformChain(const std::vector<std::string>& names) {
    for (const auto& n : names) {
      if (n == "identity") {
        stages_.push_back(std::make_unique<IdentityTransform>());
      } else if (n == "standardize") {
        stages_.push_back(std::make_unique<StandardizeTransform>());
      } else {
        throw ConfigError("unknown transform '" + n + "'");
      }
    }
  }

  void fit(std::vector<std::vector<double>> sample) {
    for (auto& s : stages_) {
      s->fit(sample);
      for (auto& x : sample) s->apply(x);
    }
  }

  void apply(std::vector<double>& metrics) const {
    for (const auto& s : stages_) s->apply(metrics);
  }

  std::vector<double> applied(std::vector<double> metrics) const {
    apply(metrics);
    return metrics;
  }

  bool empty() const { return stages_.empty(); }
  std::size_t size() const { return stages_.size(); }

 private:
  std::vector<std::unique_ptr<Transform>> stages_;
};

}  // namespace fastdata
