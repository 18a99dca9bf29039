#pragma once

#include <cmath>
#include <vector>

#include "hsr/common.hpp"
#include "hsr/kmeans.hpp"
#include "hsr/labels.hpp"
#include "hsr/silhouette.hpp"

namespace hsr {

struct PbhConfig {
  enum class LambdaMode { kAuto, kFixed };
  LambdaMode lambda_mode = LambdaMode::kAuto;
  double fixed_lambda = 0.0;
  int min_cluster_size_for_split = 4;

  void validate() const {
    if (min_cluster_size_for_split < 2)
      throw ConfigError("PbhConfig: min_cluster_size_for_split must be >= 2");
  }
};

// lambda = mean - 3 * population std over per-cluster mean silhouettes. A
// single cluster has zero spread, so lambda degenerates to its mean.
inline double compute_lambda(const std::vector<double>& msil) {
  if (msil.empty()) throw EmptyInputError("compute_lambda: no clusters");
  double mean = 0.0;
  for (double v : msil) mean += v;
  mean /= msil.size();
  double var = 0.0;
  for (double v : msil) var += (v - mean) * (v - mean);
  var /= msil.size();
  return mean - 3.0 * std::sqrt(var);
}

// Clusters whose mean silhouette is strictly below lambda and that are large
// enough to be worth splitting, in ascending cluster-id order.
inline std::vector<int> select_imperfect(const ClusterQuality& quality, int min_cluster_size) {
  std::vector<int> selected;
  for (int c = 0; c < static_cast<int>(quality.msil.size()); ++c)
    if (quality.msil[c] < quality.lambda && quality.sizes[c] >= min_cluster_size)
      selected.push_back(c);
  return selected;
}

struct SplitResult {
  std::vector<int> groups;  // per member, values in 0..3
  bool split = false;       // false when both parts were degenerate
  int num_groups = 1;
};

// Two independent 2-means runs on the upper and lower part embeddings of the
// members; the (y_u, y_l) pair indexes the lookup table (0,0)->0 (0,1)->1
// (1,0)->2 (1,1)->3, giving at most four groups. A degenerate part
// contributes a constant 0 bit.
inline SplitResult split_cluster(const MatrixF& member_upper, const MatrixF& member_lower,
                                 std::uint64_t seed) {
  const int m = static_cast<int>(member_upper.rows());
  if (m < 2) throw TooFewSamplesError("split_cluster: need at least 2 members");
  if (member_lower.rows() != member_upper.rows())
    throw ConfigError("split_cluster: part row mismatch");

  const Kmeans2Result upper = kmeans2(member_upper, mix_seed(seed, 0));
  const Kmeans2Result lower = kmeans2(member_lower, mix_seed(seed, 1));

  SplitResult out;
  out.groups.assign(m, 0);
  if (upper.degenerate && lower.degenerate) return out;

  out.split = true;
  for (int i = 0; i < m; ++i) {
    const int y_u = upper.degenerate ? 0 : upper.labels[i];
    const int y_l = lower.degenerate ? 0 : lower.labels[i];
    out.groups[i] = y_u * 2 + y_l;
  }
  bool seen[4] = {false, false, false, false};
  out.num_groups = 0;
  for (int g : out.groups) {
    if (!seen[g]) {
      seen[g] = true;
      ++out.num_groups;
    }
  }
  return out;
}

struct PbhClusterReport {
  int cluster = 0;
  double msil = 0.0;
  int size = 0;
  bool selected = false;
  int groups = 1;
};

struct PbhResult {
  PseudoLabels labels;
  double lambda = 0.0;
  std::vector<PbhClusterReport> reports;
};

// Replaces each selected cluster by its split groups and compacts the label
// space. Strictly a partition refinement: members of different input
// clusters never merge, noise labels never change. Each cluster's split is
// seeded from (seed, cluster id) so the outcome does not depend on
// processing order.
inline PbhResult apply_pbh(const PseudoLabels& labels, const ClusterQuality& quality,
                           const MatrixF& upper_emb, const MatrixF& lower_emb,
                           const PbhConfig& config, std::uint64_t seed) {
  config.validate();
  PbhResult out;
  out.labels = labels;
  if (labels.num_clusters < 2 || quality.msil.empty()) return out;  // nothing to select against

  ClusterQuality q = quality;
  q.lambda = config.lambda_mode == PbhConfig::LambdaMode::kAuto ? compute_lambda(q.msil)
                                                                : config.fixed_lambda;
  out.lambda = q.lambda;

  const std::vector<int> selected = select_imperfect(q, config.min_cluster_size_for_split);
  std::vector<char> is_selected(labels.num_clusters, 0);
  for (int c : selected) is_selected[c] = 1;

  for (int c = 0; c < labels.num_clusters; ++c)
    out.reports.push_back({c, q.msil[c], q.sizes[c], is_selected[c] != 0, 1});

  if (selected.empty()) return out;

  const auto members = labels.members_by_cluster();
  // Raw relabeling: unselected clusters keep their id, split groups get ids
  // past the current range; compaction renumbers everything at the end.
  std::vector<int> raw = labels.labels;
  int next_fresh = labels.num_clusters;
  for (int c : selected) {
    const auto& idx = members[c];
    const int m = static_cast<int>(idx.size());
    MatrixF up(m, upper_emb.cols());
    MatrixF lo(m, lower_emb.cols());
    for (int r = 0; r < m; ++r) {
      up.row(r) = upper_emb.row(idx[r]);
      lo.row(r) = lower_emb.row(idx[r]);
    }
    const SplitResult split = split_cluster(up, lo, mix_seed(seed, static_cast<std::uint64_t>(c)));
    out.reports[c].groups = split.num_groups;
    if (!split.split) continue;  // both parts degenerate, leave intact
    for (int r = 0; r < m; ++r) raw[idx[r]] = next_fresh + split.groups[r];
    next_fresh += 4;  // empty groups vanish during compaction
  }

  out.labels = compact_labels(raw);
  return out;
}

}  // namespace hsr
