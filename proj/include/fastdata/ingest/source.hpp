#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fastdata/core/point.hpp"

namespace fastdata {

struct IngestStats {
  std::size_t rows_read = 0;
  std::size_t points_emitted = 0;
  std::size_t rows_skipped = 0;
  std::vector<std::string> diagnostics;  // first few rejection reasons

  void reject(std::string why) {
    ++rows_skipped;
    if (diagnostics.size() < 20) diagnostics.push_back(std::move(why));
  }
};

/// Pull-based stream of point batches. Sources preserve input order and
/// return std::nullopt once exhausted.
class PointSource {
 public:
  virtual ~PointSource() = default;

  virtual std::optional<std::vector<Point>> next_batch() = 0;

  const IngestStats& stats() const { return stats_; }

 protected:
  IngestStats stats_;
};

/// Serves an in-memory vector in batches.
class VectorSource final : public PointSource {
 public:
  VectorSource(std::vector<Point> points, std::size_t batch_size)
      : points_(std::move(points)), batch_size_(batch_size == 0 ? 1 : batch_size) {}

  std::optional<std::vector<Point>> next_batch() override {
    if (pos_ >= points_.size()) return std::nullopt;
    const std::size_t end = std::min(points_.size(), pos_ + batch_size_);
    std::vector<Point> batch(std::make_move_iterator(points_.begin() + static_cast<std::ptrdiff_t>(pos_)),
                             std::make_move_iterator(points_.begin() + static_cast<std::ptrdiff_t>(end)));
    stats_.rows_read += batch.size();
    stats_.points_emitted += batch.size();
    pos_ = end;
    return batch;
  }

 private:
  std::vector<Point> points_;
  std::size_t batch_size_;
  std::size_t pos_ = 0;
};

/// Drains a source into one vector.
inline std::vector<Point> read_all(PointSource& source) {
  std::vector<Point> all;
  while (auto batch = source.next_batch()) {
    all.insert(all.end(), std::make_move_iterator(batch->begin()),
               std::make_move_iterator(batch->end()));
  }
  return all;
}

}  // namespace fastdata
