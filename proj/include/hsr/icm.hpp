#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "hsr/common.hpp"
#include "hsr/distance.hpp"
#include "hsr/labels.hpp"

namespace hsr {

// Camera-filtered top-K neighbor lists: entry j of lists[i] is the j-th most
// similar sample to i among samples from a different camera. Never contains
// the anchor or a same-camera sample.
struct RankLists {
  std::vector<std::vector<int>> lists;
  int k = 0;

  int n() const { return static_cast<int>(lists.size()); }
};

// Pairs (i, j), i < j, where each sample appears in the other's rank list.
// partners[i] is the sorted list of mutual partners of i.
struct MutualPairs {
  std::vector<std::pair<int, int>> pairs;
  std::vector<std::vector<int>> partners;
};

inline RankLists build_rank_lists(const SimilarityMatrix& sim, const std::vector<int>& cameras,
                                  int k) {
  if (k < 1) throw ConfigError("build_rank_lists: K must be >= 1");
  const int n = sim.n();
  if (static_cast<int>(cameras.size()) != n)
    throw ConfigError("build_rank_lists: camera list length mismatch");

  RankLists out;
  out.k = k;
  out.lists.resize(n);
  std::vector<int> candidates;
  for (int i = 0; i < n; ++i) {
    candidates.clear();
    for (int j = 0; j < n; ++j)
      if (cameras[j] != cameras[i]) candidates.push_back(j);
    const auto* row = sim.values.data() + static_cast<std::ptrdiff_t>(i) * n;
    auto better = [row](int a, int b) {
      if (row[a] != row[b]) return row[a] > row[b];  // descending similarity
      return a < b;                                  // ties by ascending index
    };
    const int take = std::min<int>(k, static_cast<int>(candidates.size()));
    std::partial_sort(candidates.begin(), candidates.begin() + take, candidates.end(), better);
    out.lists[i].assign(candidates.begin(), candidates.begin() + take);
  }
  return out;
}

inline MutualPairs mutual_pairs(const RankLists& rank) {
  const int n = rank.n();
  std::vector<std::vector<int>> sorted(n);
  for (int i = 0; i < n; ++i) {
    sorted[i] = rank.lists[i];
    std::sort(sorted[i].begin(), sorted[i].end());
  }
  auto contains = [&](int i, int j) {
    return std::binary_search(sorted[i].begin(), sorted[i].end(), j);
  };

  MutualPairs out;
  out.partners.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j : sorted[i]) {
      if (j <= i) continue;
      if (contains(j, i)) {
        out.pairs.emplace_back(i, j);
        out.partners[i].push_back(j);
        out.partners[j].push_back(i);
      }
    }
  }
  for (auto& p : out.partners) std::sort(p.begin(), p.end());
  std::sort(out.pairs.begin(), out.pairs.end());
  return out;
}

struct IcmTriplet {
  int anchor;
  int positive;
  int negative;
};

struct IcmSampleStats {
  int anchors_used = 0;
  int skipped_no_positive = 0;
  int skipped_no_negative = 0;
};

enum class IcmNegativeMode {
  kUniform,   // uniform over the eligible pool
  kBatchHard  // nearest eligible sample in embedding space
};

// Draws per_anchor triplets for each anchor: positives uniformly from the
// anchor's mutual partners (without replacement when the pool is large
// enough), negatives from samples whose pseudo label differs, that are not
// in the anchor's rank list, and that are not noise. Anchors without a
// partner or without any eligible negative are skipped and counted.
inline std::vector<IcmTriplet> sample_icm_triplets(
    const RankLists& rank, const MutualPairs& pairs, const PseudoLabels& labels,
    const std::vector<int>& anchors, int per_anchor, std::uint64_t seed,
    IcmSampleStats* stats = nullptr, IcmNegativeMode mode = IcmNegativeMode::kUniform,
    const MatrixF* embeddings = nullptr) {
  if (per_anchor < 1) throw ConfigError("sample_icm_triplets: per_anchor must be >= 1");
  if (mode == IcmNegativeMode::kBatchHard && embeddings == nullptr)
    throw ConfigError("sample_icm_triplets: batch-hard negatives need embeddings");
  const int n = labels.size();
  Rng rng(seed);
  IcmSampleStats local;
  std::vector<IcmTriplet> out;

  std::vector<char> in_rank(n, 0);
  std::vector<int> pool;
  std::vector<int> positive_picks;
  for (int a : anchors) {
    const auto& partners = pairs.partners[a];
    if (partners.empty()) {
      ++local.skipped_no_positive;
      continue;
    }
    for (int j : rank.lists[a]) in_rank[j] = 1;
    auto eligible_negative = [&](int m) {
      return labels.labels[m] != labels.labels[a] && labels.labels[m] != kNoise && !in_rank[m] &&
             m != a;
    };

    // Positives: a distinct draw when the pool allows it, otherwise with
    // replacement to keep the triplet count per anchor fixed.
    positive_picks.clear();
    if (static_cast<int>(partners.size()) >= per_anchor) {
      std::vector<int> shuffled = partners;
      for (int t = 0; t < per_anchor; ++t) {
        const std::size_t pick = t + rng.index(shuffled.size() - t);
        std::swap(shuffled[t], shuffled[pick]);
        positive_picks.push_back(shuffled[t]);
      }
    } else {
      for (int t = 0; t < per_anchor; ++t)
        positive_picks.push_back(partners[rng.index(partners.size())]);
    }

    // Negatives by rejection against the uniform proposal; fall back to
    // materializing the pool when acceptance looks hopeless so emptiness is
    // detected exactly.
    bool anchor_ok = true;
    for (int t = 0; t < per_anchor && anchor_ok; ++t) {
      int negative = -1;
      if (mode == IcmNegativeMode::kUniform) {
        for (int attempt = 0; attempt < 32; ++attempt) {
          const int m = static_cast<int>(rng.index(n));
          if (eligible_negative(m)) {
            negative = m;
            break;
          }
        }
        if (negative < 0) {
          pool.clear();
          for (int m = 0; m < n; ++m)
            if (eligible_negative(m)) pool.push_back(m);
          if (!pool.empty()) negative = pool[rng.index(pool.size())];
        }
      } else {
        double best = std::numeric_limits<double>::infinity();
        for (int m = 0; m < n; ++m) {
          if (!eligible_negative(m)) continue;
          const double d =
              (embeddings->row(a).cast<double>() - embeddings->row(m).cast<double>()).norm();
          if (d < best) {
            best = d;
            negative = m;
          }
        }
      }
      if (negative < 0) {
        ++local.skipped_no_negative;
        anchor_ok = false;
        break;
      }
      out.push_back({a, positive_picks[t], negative});
    }
    if (anchor_ok) ++local.anchors_used;
    while (!anchor_ok && !out.empty() && out.back().anchor == a) out.pop_back();

    for (int j : rank.lists[a]) in_rank[j] = 0;
  }
  if (stats) *stats = local;
  return out;
}

}  // namespace hsr
