#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "fastdata/core/dictionary.hpp"
#include "fastdata/core/point.hpp"
#include "fastdata/ingest/source.hpp"
#include "fastdata/ingest/source_descriptor.hpp"
#include "fastdata/random.hpp"

namespace fastdata {

inline std::string device_name(std::size_t d) { return "D" + std::to_string(d); }

/// Indices of the outlier devices: max(1, round(fraction * n)) distinct
/// devices chosen by a partial Fisher-Yates shuffle.
inline std::vector<std::size_t> outlier_devices(const SynthDeviceParams& p) {
  const std::size_t m = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(p.outlier_device_fraction * static_cast<double>(p.n_devices))),
      1, p.n_devices);
  std::vector<std::size_t> ids(p.n_devices);
  std::iota(ids.begin(), ids.end(), 0);
  Rng rng(Rng::mix(p.seed, 1));
  for (std::size_t i = 0; i < m; ++i) {
    std::swap(ids[i], ids[i + rng.index(p.n_devices - i)]);
  }
  ids.resize(m);
  std::sort(ids.begin(), ids.end());
  return ids;
}

/// Device study stream. Point::truth is whether the device is an outlier
/// device (independent of per-point noise).
class DeviceSource final : public PointSource {
 public:
  DeviceSource(const SynthDeviceParams& p, AttributeDictionary& dict, std::size_t batch_size)
      : p_(p), batch_size_(batch_size ? batch_size : 1), rng_(Rng::mix(p.seed, 2)),
        is_outlier_(p.n_devices, false) {
    for (auto d : outlier_devices(p)) is_outlier_[d] = true;
    ids_.reserve(p.n_devices);
    for (std::size_t d = 0; d < p.n_devices; ++d) ids_.push_back(dict.encode("device", device_name(d)));
  }

  std::optional<std::vector<Point>> next_batch() override {
    if (emitted_ >= p_.n_points) return std::nullopt;
    const std::size_t n = std::min(batch_size_, p_.n_points - emitted_);
    std::vector<Point> batch;
    batch.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t d = rng_.index(p_.n_devices);
      const bool swapped = rng_.bernoulli(p_.label_noise);
      const bool outlier_draw = is_outlier_[d] != swapped;
      double v = rng_.normal(outlier_draw ? 70.0 : 10.0, 10.0);
      if (rng_.bernoulli(p_.measurement_noise)) v = rng_.uniform(0.0, 80.0);
      Point pt;
      pt.metrics = {v};
      pt.attributes = {ids_[d]};
      pt.truth = is_outlier_[d];
      batch.push_back(std::move(pt));
    }
    emitted_ += n;
    stats_.rows_read += n;
    stats_.points_emitted += n;
    return batch;
  }

 private:
  SynthDeviceParams p_;
  std::size_t batch_size_;
  Rng rng_;
  std::vector<bool> is_outlier_;
  std::vector<AttributeId> ids_;
  std::size_t emitted_ = 0;
};

/// Two uniform balls of radius 50: inliers at the origin, outliers at
/// 1000 on every coordinate. Exactly floor(c * n) outliers, shuffled.
inline std::vector<Point> contamination_points(const ContaminationParams& p) {
  Rng rng(Rng::mix(p.seed, 3));
  const auto n_out = static_cast<std::size_t>(std::floor(p.contamination * static_cast<double>(p.n_points)));
  std::vector<Point> pts;
  pts.reserve(p.n_points);
  for (std::size_t i = 0; i < p.n_points; ++i) {
    const bool outlier = i < n_out;
    const double c = outlier ? 1000.0 : 0.0;
    Point pt;
    if (p.dims == 1) {
      pt.metrics = {c + rng.uniform(-50.0, 50.0)};
    } else {
      const double r = 50.0 * std::sqrt(rng.uniform());
      const double theta = 2.0 * 3.14159265358979323846 * rng.uniform();
      pt.metrics = {c + r * std::cos(theta), c + r * std::sin(theta)};
    }
    pt.truth = outlier;
    pts.push_back(std::move(pt));
  }
  for (std::size_t i = pts.size(); i > 1; --i) std::swap(pts[i - 1], pts[rng.index(i)]);
  return pts;
}

/// Script of the adaptivity scenario in unscaled seconds.
struct AdaptivityScript {
  double shift_at = 150;
  double d0_high_begin = 50, d0_high_end = 100;
  double d0_low_begin = 225, d0_low_end = 250;
  double spike_begin = 320, spike_end = 324;
  double end = 400;
};

/// Timestamped device stream following AdaptivityScript. Points are
/// generated one second at a time, evenly spaced within the second; the
/// arrival rate is multiplied during the spike. Point::truth marks D0
/// readings inside one of its anomalous windows.
class AdaptivitySource final : public PointSource {
 public:
  AdaptivitySource(const AdaptivityParams& p, AttributeDictionary& dict, std::size_t batch_size)
      : p_(p), batch_size_(batch_size ? batch_size : 1), rng_(Rng::mix(p.seed, 4)) {
    ids_.reserve(p.n_devices);
    for (std::size_t d = 0; d < p.n_devices; ++d) ids_.push_back(dict.encode("device", device_name(d)));
  }

  static constexpr AdaptivityScript script{};

  std::optional<std::vector<Point>> next_batch() override {
    std::vector<Point> batch;
    while (batch.size() < batch_size_) {
      if (pending_.empty() && !fill_second()) break;
      const std::size_t take = std::min(batch_size_ - batch.size(), pending_.size() - pending_pos_);
      for (std::size_t i = 0; i < take; ++i) batch.push_back(std::move(pending_[pending_pos_++]));
      if (pending_pos_ == pending_.size()) {
        pending_.clear();
        pending_pos_ = 0;
      }
    }
    if (batch.empty()) return std::nullopt;
    stats_.rows_read += batch.size();
    stats_.points_emitted += batch.size();
    return batch;
  }

 private:
  bool fill_second() {
    const double scale = p_.time_scale;
    const double t0 = static_cast<double>(second_);
    if (t0 >= script.end * scale) return false;
    ++second_;
    auto in = [&](double t, double a, double b) { return t >= a * scale && t < b * scale; };
    const bool spike = in(t0, script.spike_begin, script.spike_end);
    const auto count = static_cast<std::size_t>(
        std::llround(p_.base_rate * (spike ? p_.spike_multiplier : 1.0)));
    pending_.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
      const double t = t0 + static_cast<double>(j) / static_cast<double>(count);
      const std::size_t d = rng_.index(p_.n_devices);
      const bool phase1 = t < script.shift_at * scale;
      double mean = phase1 ? 10.0 : 40.0, sd = 10.0;
      bool anomalous = false;
      if (d == 0) {
        if (in(t, script.d0_high_begin, script.d0_high_end)) {
          mean = 70.0;
          anomalous = true;
        } else if (in(t, script.d0_low_begin, script.d0_low_end)) {
          mean = -10.0;
          anomalous = true;
        }
      } else if (in(t, script.spike_begin, script.spike_end)) {
        mean = 85.0;
        sd = 15.0;
      }
      Point pt;
      pt.metrics = {rng_.normal(mean, sd)};
      pt.attributes = {ids_[d]};
      pt.timestamp = t;
      pt.truth = anomalous;
      pending_.push_back(std::move(pt));
    }
    return true;
  }

  AdaptivityParams p_;
  std::size_t batch_size_;
  Rng rng_;
  std::vector<AttributeId> ids_;
  std::vector<Point> pending_;
  std::size_t pending_pos_ = 0;
  std::size_t second_ = 0;
};

}  // namespace fastdata
