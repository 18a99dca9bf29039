#pragma once

#include <limits>
#include <vector>

#include "hsr/common.hpp"
#include "hsr/distance.hpp"
#include "hsr/labels.hpp"

namespace hsr {

// Per-cluster quality summary used to pick clusters for splitting.
struct ClusterQuality {
  std::vector<double> per_sample;  // silhouette per sample; 0 for noise
  std::vector<double> msil;        // mean silhouette per cluster id
  std::vector<int> sizes;          // members per cluster id
  double lambda = 0.0;             // selection threshold, set by the caller
};

// Silhouette coefficient s(i) = (b(i) - a(i)) / max(a(i), b(i)) with
// a(i) = mean intra-cluster distance excluding self and b(i) = smallest mean
// distance to any other cluster. Singleton members score 0 by convention;
// noise samples are excluded and score 0.
inline std::vector<double> silhouette_samples_from_distances(const MatrixD& dist,
                                                             const PseudoLabels& labels) {
  const int n = labels.size();
  if (labels.num_clusters < 2)
    throw SingleClusterError("silhouette: need at least 2 non-noise clusters");
  const std::vector<int> sizes = labels.cluster_sizes();

  std::vector<double> out(n, 0.0);
  std::vector<double> cluster_sum(labels.num_clusters, 0.0);
  for (int i = 0; i < n; ++i) {
    const int own = labels.labels[i];
    if (own == kNoise) continue;
    if (sizes[own] == 1) continue;  // s = 0
    std::fill(cluster_sum.begin(), cluster_sum.end(), 0.0);
    for (int j = 0; j < n; ++j) {
      const int lj = labels.labels[j];
      if (lj == kNoise) continue;
      cluster_sum[lj] += dist(i, j);
    }
    const double a = cluster_sum[own] / (sizes[own] - 1);  // dist(i,i)=0 drops out
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < labels.num_clusters; ++c) {
      if (c == own) continue;
      b = std::min(b, cluster_sum[c] / sizes[c]);
    }
    const double denom = std::max(a, b);
    out[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return out;
}

inline std::vector<double> silhouette_samples(const MatrixF& features, const PseudoLabels& labels) {
  return silhouette_samples_from_distances(pairwise_distances(features), labels);
}

inline ClusterQuality mean_silhouette_per_cluster(const std::vector<double>& per_sample,
                                                  const PseudoLabels& labels) {
  ClusterQuality q;
  q.per_sample = per_sample;
  q.msil.assign(labels.num_clusters, 0.0);
  q.sizes = labels.cluster_sizes();
  for (int i = 0; i < labels.size(); ++i) {
    const int l = labels.labels[i];
    if (l != kNoise) q.msil[l] += per_sample[i];
  }
  for (int c = 0; c < labels.num_clusters; ++c) q.msil[c] /= q.sizes[c];
  return q;
}

}  // namespace hsr
