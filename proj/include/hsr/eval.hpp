#pragma once

#include <algorithm>
#include <vector>

#include "hsr/common.hpp"
#include "hsr/icm.hpp"
#include "hsr/labels.hpp"

namespace hsr {

// Disjoint query/gallery index sets over one dataset.
struct EvalSplit {
  std::vector<int> query;
  std::vector<int> gallery;
};

// AP of a ranked binary relevance list: (1/R) * sum_k rel(k) * cum_rel(k)/k.
inline double average_precision(const std::vector<int>& relevance, int num_relevant) {
  if (num_relevant < 1) throw NoRelevantError("average_precision: no relevant items");
  double ap = 0.0;
  int hits = 0;
  for (std::size_t k = 0; k < relevance.size(); ++k) {
    if (relevance[k]) {
      ++hits;
      ap += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  return ap / num_relevant;
}

struct EvalResult {
  double r1 = 0.0;
  double map = 0.0;
  int num_queries = 0;   // queries that entered the averages
  int num_excluded = 0;  // queries with no valid match after the camera filter
};

// Standard re-ID protocol: for each query, gallery entries sharing both its
// identity and its camera are removed, the remainder is ranked by descending
// similarity (ties by ascending dataset index), and R1/mAP are averaged over
// queries that retain at least one relevant entry.
inline EvalResult evaluate(const MatrixF& embeddings, const EvalSplit& split,
                           const std::vector<int>& gt_ids, const std::vector<int>& cameras) {
  if (split.query.empty() || split.gallery.empty())
    throw ConfigError("evaluate: empty query or gallery set");
  const MatrixD emb = embeddings.cast<double>();

  MatrixD query_emb(split.query.size(), emb.cols());
  for (std::size_t i = 0; i < split.query.size(); ++i) query_emb.row(i) = emb.row(split.query[i]);
  MatrixD gallery_emb(split.gallery.size(), emb.cols());
  for (std::size_t i = 0; i < split.gallery.size(); ++i)
    gallery_emb.row(i) = emb.row(split.gallery[i]);

  // Squared distances via one Gram product; ranking is monotone in them.
  const VectorD qn = query_emb.rowwise().squaredNorm();
  const VectorD gn = gallery_emb.rowwise().squaredNorm();
  const MatrixD cross = query_emb * gallery_emb.transpose();

  EvalResult out;
  std::vector<std::pair<double, int>> ranked;  // (sq distance, dataset index)
  std::vector<int> relevance;
  for (std::size_t qi = 0; qi < split.query.size(); ++qi) {
    const int q = split.query[qi];
    ranked.clear();
    int num_relevant = 0;
    for (std::size_t gi = 0; gi < split.gallery.size(); ++gi) {
      const int g = split.gallery[gi];
      if (gt_ids[g] == gt_ids[q] && cameras[g] == cameras[q]) continue;  // junk by protocol
      if (gt_ids[g] == gt_ids[q]) ++num_relevant;
      const double sq = std::max(0.0, qn(qi) + gn(gi) - 2.0 * cross(qi, gi));
      ranked.emplace_back(sq, g);
    }
    if (num_relevant == 0) {
      ++out.num_excluded;
      continue;
    }
    std::sort(ranked.begin(), ranked.end());
    relevance.clear();
    for (const auto& [sq, g] : ranked) relevance.push_back(gt_ids[g] == gt_ids[q] ? 1 : 0);
    out.r1 += relevance.front();
    out.map += average_precision(relevance, num_relevant);
    ++out.num_queries;
  }
  if (out.num_queries == 0) throw NoRelevantError("evaluate: every query was excluded");
  out.r1 /= out.num_queries;
  out.map /= out.num_queries;
  return out;
}

// Mean over anchors (with non-empty lists) of the fraction of rank-list
// entries sharing the anchor's ground-truth identity.
inline double rank_precision(const RankLists& rank, const std::vector<int>& gt_ids) {
  double sum = 0.0;
  int used = 0;
  for (int i = 0; i < rank.n(); ++i) {
    const auto& list = rank.lists[i];
    if (list.empty()) continue;
    int correct = 0;
    for (int j : list)
      if (gt_ids[j] == gt_ids[i]) ++correct;
    sum += static_cast<double>(correct) / list.size();
    ++used;
  }
  return used > 0 ? sum / used : 0.0;
}

// Same averaging, counting entries that share the anchor's identity but sit
// in a different pseudo cluster: the mined hard positives.
inline double hard_positive_rate(const RankLists& rank, const std::vector<int>& gt_ids,
                                 const PseudoLabels& labels) {
  double sum = 0.0;
  int used = 0;
  for (int i = 0; i < rank.n(); ++i) {
    const auto& list = rank.lists[i];
    if (list.empty()) continue;
    int hard = 0;
    for (int j : list)
      if (gt_ids[j] == gt_ids[i] && labels.labels[j] != labels.labels[i]) ++hard;
    sum += static_cast<double>(hard) / list.size();
    ++used;
  }
  return used > 0 ? sum / used : 0.0;
}

// Size-weighted mean over clusters of the majority ground-truth fraction.
inline double cluster_purity(const PseudoLabels& labels, const std::vector<int>& gt_ids) {
  const auto members = labels.members_by_cluster();
  long majority_total = 0;
  long size_total = 0;
  std::vector<int> counts;
  for (const auto& m : members) {
    if (m.empty()) continue;
    counts.clear();
    for (int i : m) {
      if (gt_ids[i] >= static_cast<int>(counts.size())) counts.resize(gt_ids[i] + 1, 0);
      ++counts[gt_ids[i]];
    }
    majority_total += *std::max_element(counts.begin(), counts.end());
    size_total += static_cast<long>(m.size());
  }
  return size_total > 0 ? static_cast<double>(majority_total) / size_total : 0.0;
}

}  // namespace hsr
