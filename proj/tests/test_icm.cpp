#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "hsr/eval.hpp"
#include "hsr/icm.hpp"
#include "hsr/synth.hpp"
#include "oracles.hpp"

using namespace hsr;

TEST_CASE("rank lists for the 3-sample hand example") {
  MatrixF m(3, 1);
  m << 0.0f, 0.1f, 5.0f;
  const std::vector<int> cameras = {0, 1, 1};
  const RankLists rank = build_rank_lists(pairwise_similarity(m), cameras, 1);
  CHECK(rank.lists[0] == std::vector<int>{1});
  CHECK(rank.lists[1] == std::vector<int>{0});
  CHECK(rank.lists[2] == std::vector<int>{0});

  const MutualPairs pairs = mutual_pairs(rank);
  CHECK(pairs.pairs == std::vector<std::pair<int, int>>{{0, 1}});
}

TEST_CASE("rank lists are empty when every sample shares one camera") {
  Rng rng(3);
  const MatrixF m = oracle::random_matrix(8, 2, rng);
  const std::vector<int> cameras(8, 0);
  const RankLists rank = build_rank_lists(pairwise_similarity(m), cameras, 5);
  for (const auto& list : rank.lists) CHECK(list.empty());
  CHECK(mutual_pairs(rank).pairs.empty());
}

TEST_CASE("rank lists respect K and never contain the anchor or its camera") {
  Rng rng(4);
  const MatrixF m = oracle::random_matrix(40, 4, rng);
  std::vector<int> cameras(40);
  for (int i = 0; i < 40; ++i) cameras[i] = static_cast<int>(rng.index(3));
  const RankLists rank = build_rank_lists(pairwise_similarity(m), cameras, 10);
  for (int i = 0; i < 40; ++i) {
    CHECK(rank.lists[i].size() <= 10);
    for (int j : rank.lists[i]) {
      CHECK(j != i);
      CHECK(cameras[j] != cameras[i]);
    }
    // descending similarity, ties by index
    for (std::size_t t = 1; t < rank.lists[i].size(); ++t) {
      const double prev = oracle::distance(m, i, rank.lists[i][t - 1]);
      const double cur = oracle::distance(m, i, rank.lists[i][t]);
      CHECK(prev <= cur + 1e-12);
    }
  }
}

TEST_CASE("mutual pairs match the quadratic enumeration on random instances") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const int n = 50;
    const MatrixF m = oracle::random_matrix(n, 3, rng);
    std::vector<int> cameras(n);
    for (int i = 0; i < n; ++i) cameras[i] = static_cast<int>(rng.index(4));
    const int k = 1 + static_cast<int>(rng.index(10));

    const RankLists rank = build_rank_lists(pairwise_similarity(m), cameras, k);
    const MutualPairs got = mutual_pairs(rank);

    const auto want_lists = oracle::rank_lists(m, cameras, k);
    const auto want = oracle::mutual_pairs(want_lists);
    CHECK(std::set<std::pair<int, int>>(got.pairs.begin(), got.pairs.end()) == want);

    // partners mirrors pairs
    for (const auto& [i, j] : got.pairs) {
      CHECK(std::count(got.partners[i].begin(), got.partners[i].end(), j) == 1);
      CHECK(std::count(got.partners[j].begin(), got.partners[j].end(), i) == 1);
    }
  }
}

TEST_CASE("triplet sampling enumerates the only valid pool") {
  // anchor 0: positive must be 1 (mutual), negative must be 2 (not in rank,
  // different label)
  MatrixF m(3, 1);
  m << 0.0f, 0.1f, 5.0f;
  const std::vector<int> cameras = {0, 1, 1};
  const RankLists rank = build_rank_lists(pairwise_similarity(m), cameras, 1);
  const MutualPairs pairs = mutual_pairs(rank);
  PseudoLabels labels;
  labels.labels = {0, 1, 2};
  labels.num_clusters = 3;

  IcmSampleStats stats;
  const auto triplets = sample_icm_triplets(rank, pairs, labels, {0}, 2, 99, &stats);
  REQUIRE(triplets.size() == 2);
  for (const auto& t : triplets) {
    CHECK(t.anchor == 0);
    CHECK(t.positive == 1);
    CHECK(t.negative == 2);
  }
  CHECK(stats.anchors_used == 1);
}

TEST_CASE("anchors without a mutual partner are skipped and counted") {
  MatrixF m(3, 1);
  m << 0.0f, 0.1f, 5.0f;
  const std::vector<int> cameras = {0, 1, 1};
  const RankLists rank = build_rank_lists(pairwise_similarity(m), cameras, 1);
  const MutualPairs pairs = mutual_pairs(rank);
  PseudoLabels labels;
  labels.labels = {0, 1, 2};
  labels.num_clusters = 3;

  IcmSampleStats stats;
  const auto triplets = sample_icm_triplets(rank, pairs, labels, {2}, 4, 1, &stats);
  CHECK(triplets.empty());
  CHECK(stats.skipped_no_positive == 1);
}

TEST_CASE("per-anchor count and pool constraints hold on a random instance") {
  Rng rng(8);
  const int n = 60;
  const MatrixF m = oracle::random_matrix(n, 4, rng);
  std::vector<int> cameras(n);
  std::vector<int> raw_labels(n);
  for (int i = 0; i < n; ++i) {
    cameras[i] = static_cast<int>(rng.index(3));
    raw_labels[i] = static_cast<int>(rng.index(6));
  }
  const PseudoLabels labels = compact_labels(raw_labels);
  const RankLists rank = build_rank_lists(pairwise_similarity(m), cameras, 5);
  const MutualPairs pairs = mutual_pairs(rank);

  std::vector<int> anchors;
  for (int i = 0; i < n; ++i)
    if (!pairs.partners[i].empty()) anchors.push_back(i);

  IcmSampleStats stats;
  const auto triplets = sample_icm_triplets(rank, pairs, labels, anchors, 4, 5, &stats);
  CHECK(triplets.size() == static_cast<std::size_t>(4 * stats.anchors_used));

  for (const auto& t : triplets) {
    // positive is a mutual partner, so never same camera
    CHECK(cameras[t.positive] != cameras[t.anchor]);
    CHECK(std::count(pairs.partners[t.anchor].begin(), pairs.partners[t.anchor].end(),
                     t.positive) == 1);
    // negative: different non-noise label, not in the anchor's rank list
    CHECK(labels.labels[t.negative] != labels.labels[t.anchor]);
    CHECK(labels.labels[t.negative] != kNoise);
    CHECK(std::count(rank.lists[t.anchor].begin(), rank.lists[t.anchor].end(), t.negative) == 0);
  }

  // deterministic given the seed
  const auto again = sample_icm_triplets(rank, pairs, labels, anchors, 4, 5);
  REQUIRE(again.size() == triplets.size());
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    CHECK(again[i].anchor == triplets[i].anchor);
    CHECK(again[i].positive == triplets[i].positive);
    CHECK(again[i].negative == triplets[i].negative);
  }
}

TEST_CASE("camera filtering beats unfiltered top-K precision on the biased benchmark") {
  // the camera filter drops the compressed same-camera impostors, so the
  // mined lists must be at least as identity-pure as plain nearest neighbors
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    const SynthData synth = generate(cfg);
    const auto& gt = *synth.data.gt_ids;
    const MatrixF emb = l2_normalize(synth.data.raw_global);
    const SimilarityMatrix sim = pairwise_similarity(emb);
    const int n = synth.data.n();
    const int k = 10;

    const RankLists filtered = build_rank_lists(sim, synth.data.cameras, k);
    const double filtered_precision = rank_precision(filtered, gt);

    // unfiltered top-K: nearest neighbors excluding only the anchor
    double unfiltered_precision = 0.0;
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) order[j] = j;
      const auto* row = sim.values.data() + static_cast<std::ptrdiff_t>(i) * n;
      std::partial_sort(order.begin(), order.begin() + k + 1, order.end(),
                        [row](int a, int b) {
                          if (row[a] != row[b]) return row[a] > row[b];
                          return a < b;
                        });
      int correct = 0, taken = 0;
      for (int t = 0; t < n && taken < k; ++t) {
        if (order[t] == i) continue;
        correct += gt[order[t]] == gt[i] ? 1 : 0;
        ++taken;
      }
      unfiltered_precision += static_cast<double>(correct) / k;
    }
    unfiltered_precision /= n;

    INFO("seed " << seed << ": filtered " << filtered_precision << " vs unfiltered "
                 << unfiltered_precision);
    CHECK(filtered_precision >= unfiltered_precision);
  }
}

TEST_CASE("batch-hard negatives pick the nearest eligible sample") {
  MatrixF m(5, 1);
  m << 0.0f, 0.1f, 5.0f, 3.0f, 4.0f;
  const std::vector<int> cameras = {0, 1, 1, 0, 0};
  const RankLists rank = build_rank_lists(pairwise_similarity(m), cameras, 1);
  const MutualPairs pairs = mutual_pairs(rank);
  PseudoLabels labels;
  labels.labels = {0, 0, 1, 2, 3};
  labels.num_clusters = 4;
  REQUIRE(!pairs.partners[0].empty());

  const auto triplets = sample_icm_triplets(rank, pairs, labels, {0}, 1, 3, nullptr,
                                            IcmNegativeMode::kBatchHard, &m);
  REQUIRE(triplets.size() == 1);
  // eligible negatives for anchor 0 are {2, 3, 4} minus rank list {1}; the
  // nearest is sample 3 at distance 3
  CHECK(triplets[0].negative == 3);
}
