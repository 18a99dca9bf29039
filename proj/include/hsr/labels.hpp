#pragma once

#include <vector>

#include "hsr/common.hpp"

namespace hsr {

// Samples that belong to no cluster carry this label and are excluded from
// every training loss for the iteration.
constexpr int kNoise = -1;

// Per-sample cluster assignment. Non-noise labels always form the contiguous
// range 0..num_clusters-1.
struct PseudoLabels {
  std::vector<int> labels;
  int num_clusters = 0;

  int size() const { return static_cast<int>(labels.size()); }

  int num_noise() const {
    int n = 0;
    for (int l : labels)
      if (l == kNoise) ++n;
    return n;
  }

  std::vector<int> cluster_sizes() const {
    std::vector<int> sizes(num_clusters, 0);
    for (int l : labels)
      if (l != kNoise) ++sizes[l];
    return sizes;
  }

  std::vector<std::vector<int>> members_by_cluster() const {
    std::vector<std::vector<int>> members(num_clusters);
    for (int i = 0; i < size(); ++i)
      if (labels[i] != kNoise) members[labels[i]].push_back(i);
    return members;
  }
};

// Renumbers arbitrary non-negative labels to 0..k-1 in order of first
// appearance; kNoise passes through.
inline PseudoLabels compact_labels(const std::vector<int>& raw) {
  PseudoLabels out;
  out.labels.assign(raw.size(), kNoise);
  std::vector<int> remap;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const int l = raw[i];
    if (l == kNoise) continue;
    if (l < 0) throw Error("compact_labels: negative label that is not the noise sentinel");
    if (static_cast<std::size_t>(l) >= remap.size()) remap.resize(l + 1, kNoise);
    if (remap[l] == kNoise) remap[l] = out.num_clusters++;
    out.labels[i] = remap[l];
  }
  return out;
}

}  // namespace hsr
