#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "fastdata/core/query_spec.hpp"
#include "fastdata/error.hpp"
#include "fastdata/random.hpp"

namespace fastdata {

/// Robust location/scatter estimate. Scoring uses the Cholesky factor of
/// the (possibly ridge-regularized) scatter.
struct McdModel {
  Eigen::VectorXd mu;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd cov_inv;
  Eigen::MatrixXd chol_l;  // lower factor, cov = L L^T
  double det = 0.0;
  double h_fraction = 0.5;
  std::size_t iterations = 0;  // C-steps run by the winning start
  bool regularized = false;
  // Determinant after every C-step, one trace per start.
  std::vector<std::vector<double>> det_traces;

  std::size_t dims() const { return static_cast<std::size_t>(mu.size()); }
};

inline constexpr double kMcdMaxCondition = 1e12;
inline constexpr double kMcdRidge = 1e-6;

/// Builds a scoring model from a location and scatter, regularizing
/// ill-conditioned scatter by lambda * trace / d * I.
inline McdModel make_mcd_model(Eigen::VectorXd mu, Eigen::MatrixXd cov) {
  const auto d = cov.rows();
  if (cov.cols() != d || mu.size() != d || d == 0) throw DataError("scatter shape mismatch");
  cov = (cov + cov.transpose()) / 2.0;
  McdModel m;
  const double trace = cov.trace();
  if (!(trace > 0.0)) throw DegenerateError("scatter matrix is zero: all sample points identical");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMcdMaxCondition) {
    cov += Eigen::MatrixXd::Identity(d, d) * (kMcdRidge * trace / static_cast<double>(d));
    m.regularized = true;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw DegenerateError("scatter matrix singular after regularization");
  m.chol_l = llt.matrixL();
  m.det = std::pow(m.chol_l.diagonal().prod(), 2.0);
  m.cov_inv = llt.solve(Eigen::MatrixXd::Identity(d, d));
  m.mu = std::move(mu);
  m.cov = std::move(cov);
  return m;
}

inline double score_mahalanobis(const McdModel& m, std::span<const double> x) {
  if (x.size() != m.dims()) throw DataError("metric dimension does not match the model");
  Eigen::VectorXd diff = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())) - m.mu;
  m.chol_l.triangularView<Eigen::Lower>().solveInPlace(diff);
  return diff.norm();
}

namespace detail {

struct Fit {
  Eigen::VectorXd mu;
  Eigen::MatrixXd cov;
  double det;
};

inline Fit fit_subset(const Eigen::MatrixXd& x, const std::vector<std::size_t>& idx) {
  const auto d = x.cols();
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
  for (auto i : idx) mu += x.row(static_cast<Eigen::Index>(i)).transpose();
  mu /= static_cast<double>(idx.size());
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (auto i : idx) {
    Eigen::VectorXd c = x.row(static_cast<Eigen::Index>(i)).transpose() - mu;
    cov.selfadjointView<Eigen::Lower>().rankUpdate(c);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(idx.size());
  const double det = cov.determinant();
  return {std::move(mu), std::move(cov), det};
}

inline bool positive_definite(const Fit& f) {
  return f.det > 0.0 && Eigen::LLT<Eigen::MatrixXd>(f.cov).info() == Eigen::Success;
}

/// Squared Mahalanobis distances of every row, or nullopt if the scatter
/// is not positive definite.
inline std::optional<Eigen::VectorXd> distances(const Eigen::MatrixXd& x, const Fit& f) {
  Eigen::LLT<Eigen::MatrixXd> llt(f.cov);
  if (llt.info() != Eigen::Success || !(f.det > 0.0)) return std::nullopt;
  Eigen::MatrixXd centered = (x.rowwise() - f.mu.transpose()).transpose();
  llt.matrixL().solveInPlace(centered);
  return centered.colwise().squaredNorm().transpose();
}

inline std::vector<std::size_t> smallest(const Eigen::VectorXd& dist, std::size_t h) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(dist.size()));
  std::iota(idx.begin(), idx.end(), 0);
  auto cut = idx.begin() + static_cast<std::ptrdiff_t>(h);
  std::nth_element(idx.begin(), cut - 1, idx.end(), [&](std::size_t a, std::size_t b) {
    const double da = dist[static_cast<Eigen::Index>(a)], db = dist[static_cast<Eigen::Index>(b)];
    return da != db ? da < db : a < b;
  });
  idx.resize(h);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace detail

/// FastMCD: nStarts random (d+1)-subsets, each refined by C-steps (fit
/// the current h-subset, keep the h points nearest under that fit) until
/// the relative determinant improvement drops below stopping_epsilon.
/// The start with the smallest final determinant wins.
inline McdModel train_fastmcd(const std::vector<std::vector<double>>& sample, const McdOptions& opt,
                              std::uint64_t seed) {
  const std::size_t n = sample.size();
  if (n == 0) throw DegenerateError("cannot train MCD on an empty sample");
  const std::size_t d = sample.front().size();
  if (d == 0) throw DataError("MCD needs at least one metric");
  if (n < d + 1)
    throw DegenerateError("MCD needs at least d+1 = " + std::to_string(d + 1) + " points, got " +
                          std::to_string(n));
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    if (sample[i].size() != d) throw DataError("inconsistent metric dimension in MCD sample");
    for (std::size_t j = 0; j < d; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sample[i][j];
  }
  const std::size_t h = std::min(
      n, std::max<std::size_t>(static_cast<std::size_t>(std::ceil(opt.h_fraction * static_cast<double>(n))), d + 1));

  Rng rng(seed);
  std::vector<std::vector<double>> traces;
  std::optional<detail::Fit> best;
  std::size_t best_iters = 0;
  for (std::size_t s = 0; s < opt.n_starts; ++s) {
    // Random (d+1)-subset, grown while its scatter is singular.
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t take = d + 1;
    for (std::size_t i = 0; i < take; ++i) std::swap(perm[i], perm[i + rng.index(n - i)]);
    const std::size_t grow_cap = std::min(n, std::max<std::size_t>(h, 1000));
    detail::Fit fit = detail::fit_subset(x, {perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(take)});
    while (!detail::positive_definite(fit) && take < grow_cap) {
      std::swap(perm[take], perm[take + rng.index(n - take)]);
      ++take;
      fit = detail::fit_subset(x, {perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(take)});
    }
    auto dist = detail::distances(x, fit);
    if (!dist) continue;  // no nonsingular start subset; see fallback below

    std::vector<double> trace;
    std::size_t iters = 0;
    for (; iters < opt.max_iterations; ++iters) {
      detail::Fit next = detail::fit_subset(x, detail::smallest(*dist, h));
      trace.push_back(next.det);
      const double prev = fit.det;
      fit = std::move(next);
      const bool first = iters == 0;
      if (!(fit.det > 0.0)) break;
      if (!first && prev - fit.det < opt.stopping_epsilon * prev) {
        ++iters;
        break;
      }
      dist = detail::distances(x, fit);
      if (!dist) break;
    }
    traces.push_back(std::move(trace));
    if (!best || fit.det < best->det) {
      best = std::move(fit);
      best_iters = iters;
    }
  }

  if (!best) {
    // Every subset singular: fall back to the full-sample scatter and let
    // regularization decide.
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    best = detail::fit_subset(x, all);
  }
  McdModel m = make_mcd_model(std::move(best->mu), std::move(best->cov));
  m.h_fraction = opt.h_fraction;
  m.iterations = best_iters;
  m.det_traces = std::move(traces);
  return m;
}

}  // namespace fastdata
