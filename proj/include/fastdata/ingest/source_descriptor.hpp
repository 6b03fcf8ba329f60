#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace fastdata {

enum class SourceKind {
  CsvFile,
  JsonLines,
  SyntheticDevices,
  SyntheticContamination,
  SyntheticAdaptivity,
};

/// Device study generator: every device reports one metric drawn from
/// N(10, 10) (inlier devices) or N(70, 10) (outlier devices). The second
/// parameter of N is the standard deviation.
struct SynthDeviceParams {
  std::size_t n_points = 100000;
  std::size_t n_devices = 100;
  double outlier_device_fraction = 0.01;
  double label_noise = 0.0;        // probability the draw distribution is swapped
  double measurement_noise = 0.0;  // probability the metric is Uniform[0, 80]
  std::uint64_t seed = 0;

  friend bool operator==(const SynthDeviceParams&, const SynthDeviceParams&) = default;
};

/// Two uniform balls of radius 50: inliers around the origin, outliers
/// around (1000, 1000) (or 1000 in one dimension).
struct ContaminationParams {
  std::size_t n_points = 100000;
  double contamination = 0.1;
  int dims = 2;
  std::uint64_t seed = 0;

  friend bool operator==(const ContaminationParams&, const ContaminationParams&) = default;
};

/// Time-varying device script (distribution shift plus an arrival-rate
/// spike). All script times are multiplied by time_scale.
struct AdaptivityParams {
  double base_rate = 2000.0;  // points per second across all devices
  std::size_t n_devices = 100;
  double time_scale = 1.0;
  double spike_multiplier = 10.0;
  std::uint64_t seed = 0;

  friend bool operator==(const AdaptivityParams&, const AdaptivityParams&) = default;
};

struct SourceDescriptor {
  SourceKind kind = SourceKind::CsvFile;
  std::string path;
  std::size_t batch_size = 10000;
  SynthDeviceParams devices;
  ContaminationParams contamination;
  AdaptivityParams adaptivity;

  friend bool operator==(const SourceDescriptor&, const SourceDescriptor&) = default;
};

}  // namespace fastdata
