#pragma once

#include <algorithm>
#include <deque>
#include <vector>

#include "hsr/common.hpp"
#include "hsr/distance.hpp"
#include "hsr/labels.hpp"

namespace hsr {

struct DbscanParams {
  double eps = 0.0;  // distance radius, > 0
  int min_pts = 4;   // neighborhood size that makes a core point, self included

  void validate() const {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("DbscanParams: eps must be finite and > 0");
    if (min_pts < 1) throw ConfigError("DbscanParams: min_pts must be >= 1");
  }
};

// Classic DBSCAN over a precomputed distance matrix. Determinism rules:
// seeds are scanned in ascending index order, expansion is FIFO with
// neighbors enumerated in ascending index, so a border point always joins
// the first cluster that reaches it.
inline PseudoLabels dbscan_from_distances(const MatrixD& dist, const DbscanParams& params) {
  params.validate();
  const int n = static_cast<int>(dist.rows());

  auto neighbors_of = [&](int i) {
    std::vector<int> nbrs;
    for (int j = 0; j < n; ++j)
      if (dist(i, j) <= params.eps) nbrs.push_back(j);  // includes i itself
    return nbrs;
  };

  constexpr int kUnvisited = -2;
  std::vector<int> labels(n, kUnvisited);
  int next_cluster = 0;

  for (int i = 0; i < n; ++i) {
    if (labels[i] != kUnvisited) continue;
    std::vector<int> nbrs = neighbors_of(i);
    if (static_cast<int>(nbrs.size()) < params.min_pts) {
      labels[i] = kNoise;  // may later be claimed as a border point
      continue;
    }
    const int cluster = next_cluster++;
    labels[i] = cluster;
    std::deque<int> queue(nbrs.begin(), nbrs.end());
    while (!queue.empty()) {
      const int q = queue.front();
      queue.pop_front();
      if (labels[q] == kNoise) labels[q] = cluster;  // border point
      if (labels[q] != kUnvisited) continue;
      labels[q] = cluster;
      std::vector<int> q_nbrs = neighbors_of(q);
      if (static_cast<int>(q_nbrs.size()) >= params.min_pts)
        queue.insert(queue.end(), q_nbrs.begin(), q_nbrs.end());
    }
  }

  PseudoLabels out;
  out.labels = std::move(labels);
  out.num_clusters = next_cluster;
  return out;
}

inline PseudoLabels dbscan(const MatrixF& features, const DbscanParams& params) {
  return dbscan_from_distances(pairwise_distances(features), params);
}

// Data-driven default radius: the p-th percentile of the k-th-nearest-
// neighbor distance distribution (self excluded), with linear interpolation
// between order statistics. Returns 0 when all points coincide; callers must
// override in that case.
inline double eps_heuristic_from_distances(const MatrixD& dist, int k, double percentile = 1.5) {
  const int n = static_cast<int>(dist.rows());
  if (n <= k) throw TooFewSamplesError("eps_heuristic: need more samples than k");
  if (k < 1) throw ConfigError("eps_heuristic: k must be >= 1");
  std::vector<double> knn(n);
  std::vector<double> row(n - 1);
  for (int i = 0; i < n; ++i) {
    int m = 0;
    for (int j = 0; j < n; ++j)
      if (j != i) row[m++] = dist(i, j);
    std::nth_element(row.begin(), row.begin() + (k - 1), row.end());
    knn[i] = row[k - 1];
  }
  std::sort(knn.begin(), knn.end());
  const double pos = percentile / 100.0 * static_cast<double>(n - 1);
  const int lo = static_cast<int>(pos);
  const int hi = std::min(lo + 1, n - 1);
  const double frac = pos - lo;
  return knn[lo] * (1.0 - frac) + knn[hi] * frac;
}

inline double eps_heuristic(const MatrixF& features, int k, double percentile = 1.5) {
  return eps_heuristic_from_distances(pairwise_distances(features), k, percentile);
}

}  // namespace hsr
