#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "hsr/common.hpp"

namespace hsr {

struct Kmeans2Result {
  std::vector<int> labels;  // values in {0, 1}; all zero when degenerate
  bool degenerate = false;  // within-set variance <= 1e-12, nothing to split
  double wcss = 0.0;        // final within-cluster sum of squares
  std::vector<double> wcss_history;  // objective after each Lloyd iteration
};

namespace detail {

// One k-means++ seeding plus Lloyd iterations, drawing randomness from the
// shared stream.
inline Kmeans2Result kmeans2_once(const MatrixD& x, Rng& rng) {
  const int m = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());

  // k-means++: first center uniform, second proportional to squared distance.
  std::array<Eigen::RowVectorXd, 2> centers;
  centers[0] = x.row(static_cast<Eigen::Index>(rng.index(m)));
  std::vector<double> weight(m);
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    weight[i] = (x.row(i) - centers[0]).squaredNorm();
    total += weight[i];
  }
  double pick = rng.u01() * total;
  int second = m - 1;
  for (int i = 0; i < m; ++i) {
    pick -= weight[i];
    if (pick <= 0.0) {
      second = i;
      break;
    }
  }
  centers[1] = x.row(second);

  Kmeans2Result result;
  std::vector<int> assign(m, -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (int i = 0; i < m; ++i) {
      const double d0 = (x.row(i) - centers[0]).squaredNorm();
      const double d1 = (x.row(i) - centers[1]).squaredNorm();
      const int a = d1 < d0 ? 1 : 0;
      if (a != assign[i]) {
        assign[i] = a;
        changed = true;
      }
    }

    // Keep both clusters populated: hand the point farthest from its center
    // to an emptied cluster.
    std::array<int, 2> counts{0, 0};
    for (int a : assign) ++counts[a];
    for (int c = 0; c < 2; ++c) {
      if (counts[c] > 0) continue;
      int farthest = -1;
      double best = -1.0;
      for (int i = 0; i < m; ++i) {
        const double di = (x.row(i) - centers[assign[i]]).squaredNorm();
        if (di > best) {
          best = di;
          farthest = i;
        }
      }
      assign[farthest] = c;
      counts[c] = 1;
      counts[1 - c] -= 1;
      changed = true;
    }

    for (int c = 0; c < 2; ++c) {
      Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(d);
      int count = 0;
      for (int i = 0; i < m; ++i) {
        if (assign[i] == c) {
          sum += x.row(i);
          ++count;
        }
      }
      centers[c] = sum / count;
    }

    double wcss = 0.0;
    for (int i = 0; i < m; ++i) wcss += (x.row(i) - centers[assign[i]]).squaredNorm();
    result.wcss_history.push_back(wcss);
    result.wcss = wcss;
    if (!changed) break;
  }
  result.labels = std::move(assign);
  return result;
}

}  // namespace detail

// Two-way K-means: k-means++ seeding with a small number of restarts from
// the seeded stream (the usual n_init practice), at most 100 Lloyd
// iterations each, best within-cluster sum of squares wins. Fully
// deterministic given the seed: ties in assignment go to the lower center
// index, and the final labels are renumbered so that label 0 is the cluster
// containing sample 0.
inline Kmeans2Result kmeans2(const MatrixF& features, std::uint64_t seed) {
  const int m = static_cast<int>(features.rows());
  if (m < 2) throw TooFewSamplesError("kmeans2: need at least 2 samples");
  if (!all_finite(features)) throw NonFiniteError("kmeans2: non-finite input");
  const MatrixD x = features.cast<double>();

  Kmeans2Result result;
  result.labels.assign(m, 0);

  const Eigen::RowVectorXd mean = x.colwise().mean();
  const double variance = (x.rowwise() - mean).squaredNorm() / m;
  if (variance <= 1e-12) {
    result.degenerate = true;
    return result;
  }

  Rng rng(seed);
  constexpr int kRestarts = 4;
  for (int attempt = 0; attempt < kRestarts; ++attempt) {
    Kmeans2Result candidate = detail::kmeans2_once(x, rng);
    if (attempt == 0 || candidate.wcss < result.wcss) result = std::move(candidate);
  }

  if (result.labels[0] == 1)
    for (int& a : result.labels) a = 1 - a;
  return result;
}

}  // namespace hsr
