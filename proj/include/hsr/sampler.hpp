#pragma once

#include <vector>

#include "hsr/common.hpp"
#include "hsr/labels.hpp"

namespace hsr {

// PK batch: p_ids distinct clusters drawn uniformly without replacement,
// k_imgs members from each (with replacement when the cluster is smaller).
// The batch therefore always has p_ids * k_imgs entries and every batch
// label at least two positions.
inline std::vector<int> pk_sample(const PseudoLabels& labels, int p_ids, int k_imgs,
                                  std::uint64_t seed) {
  if (p_ids < 1 || k_imgs < 1) throw ConfigError("pk_sample: p_ids and k_imgs must be >= 1");
  if (labels.num_clusters < p_ids)
    throw TooFewClustersError("pk_sample: fewer clusters than requested identities");

  const auto members = labels.members_by_cluster();
  Rng rng(seed);

  std::vector<int> cluster_ids(labels.num_clusters);
  for (int c = 0; c < labels.num_clusters; ++c) cluster_ids[c] = c;
  for (int t = 0; t < p_ids; ++t) {
    const std::size_t pick = t + rng.index(cluster_ids.size() - t);
    std::swap(cluster_ids[t], cluster_ids[pick]);
  }

  std::vector<int> batch;
  batch.reserve(static_cast<std::size_t>(p_ids) * k_imgs);
  for (int t = 0; t < p_ids; ++t) {
    const auto& pool = members[cluster_ids[t]];
    if (static_cast<int>(pool.size()) >= k_imgs) {
      std::vector<int> shuffled = pool;
      for (int s = 0; s < k_imgs; ++s) {
        const std::size_t pick = s + rng.index(shuffled.size() - s);
        std::swap(shuffled[s], shuffled[pick]);
        batch.push_back(shuffled[s]);
      }
    } else {
      for (int s = 0; s < k_imgs; ++s) batch.push_back(pool[rng.index(pool.size())]);
    }
  }
  return batch;
}

}  // namespace hsr
