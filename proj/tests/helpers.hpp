#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "fastdata/fastdata.hpp"

namespace fastdata::test {

inline Point point(std::vector<double> metrics, std::vector<AttributeId> attrs = {}) {
  Point p;
  p.metrics = std::move(metrics);
  p.attributes = std::move(attrs);
  return p;
}

/// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
#ifdef FASTDATA_TEST_TMP
  std::filesystem::path root = FASTDATA_TEST_TMP;
#else
  std::filesystem::path root = std::filesystem::temp_directory_path() / "fastdata-tests";
#endif
  auto dir = root / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

/// Random outlier/inlier transactions over a small item universe, with a
/// few planted items overrepresented among the outliers.
struct SmallInstance {
  std::vector<std::vector<AttributeId>> outliers;
  std::vector<std::vector<AttributeId>> inliers;
};

inline SmallInstance random_instance(std::uint64_t seed, std::size_t max_items = 10,
                                     std::size_t max_points = 1000) {
  Rng rng(seed);
  SmallInstance inst;
  const std::size_t universe = 2 + rng.index(max_items - 1);
  const std::size_t n = 10 + rng.index(max_points - 9);
  const std::size_t n_out = 1 + rng.index(std::max<std::size_t>(1, n / 4));
  const double base = 0.1 + 0.4 * rng.uniform();
  std::vector<double> boost(universe);
  for (auto& b : boost) b = rng.bernoulli(0.3) ? 0.3 + 0.6 * rng.uniform() : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool out = i < n_out;
    std::vector<AttributeId> tx;
    for (std::size_t a = 0; a < universe; ++a) {
      const double p = out ? std::min(0.95, base + boost[a]) : base * 0.5;
      if (rng.bernoulli(p)) tx.push_back(static_cast<AttributeId>(a));
    }
    (out ? inst.outliers : inst.inliers).push_back(std::move(tx));
  }
  return inst;
}

/// Records as comparable tuples (items, ao, ai, bo, bi, ratio).
using RecordKey = std::tuple<std::vector<AttributeId>, double, double, double, double, double>;

inline std::vector<RecordKey> keys_of(std::vector<ExplanationRecord> records) {
  std::vector<RecordKey> out;
  for (const auto& r : records) out.emplace_back(r.items, r.ao, r.ai, r.bo, r.bi, r.risk_ratio);
  std::sort(out.begin(), out.end());
  return out;
}

/// Record sets equal up to a relative tolerance on the counts.
inline bool same_up_to(const std::vector<ExplanationRecord>& a, const std::vector<ExplanationRecord>& b,
                       double rel = 1e-9) {
  auto ka = keys_of(a), kb = keys_of(b);
  if (ka.size() != kb.size()) return false;
  auto close = [&](double x, double y) {
    if (x == y) return true;
    return std::abs(x - y) <= rel * std::max({1.0, std::abs(x), std::abs(y)});
  };
  for (std::size_t i = 0; i < ka.size(); ++i) {
    const auto& [ia, aoa, aia, boa, bia, ra] = ka[i];
    const auto& [ib, aob, aib, bob, bib, rb] = kb[i];
    if (ia != ib || !close(aoa, aob) || !close(aia, aib) || !close(boa, bob) || !close(bia, bib) ||
        !close(ra, rb))
      return false;
  }
  return true;
}

}  // namespace fastdata::test
