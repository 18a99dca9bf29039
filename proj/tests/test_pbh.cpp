#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "hsr/pbh.hpp"
#include "oracles.hpp"

using namespace hsr;

TEST_CASE("lambda is the mean minus three population stds") {
  CHECK(compute_lambda({0.5, 0.5, 0.5}) == Catch::Approx(0.5));
  CHECK(compute_lambda({0.9, 0.1}) == Catch::Approx(-0.7));  // std = 0.4
  CHECK(compute_lambda({0.42}) == Catch::Approx(0.42));      // single cluster: std 0
  CHECK_THROWS_AS(compute_lambda({}), EmptyInputError);
}

TEST_CASE("selection is strict at the threshold and gated by size") {
  ClusterQuality q;
  q.msil = {0.5, 0.5};
  q.sizes = {10, 10};
  q.lambda = 0.5;
  CHECK(select_imperfect(q, 4).empty());

  q.msil = {-0.2, 0.8};
  q.lambda = 0.1;
  CHECK(select_imperfect(q, 4) == std::vector<int>{0});

  q.sizes = {2, 10};
  CHECK(select_imperfect(q, 4).empty());  // too small to split
}

TEST_CASE("split_cluster reproduces the four-way lookup table") {
  // upper feature separates {0,1} from {2,3}; lower separates {0,2} from {1,3}
  MatrixF upper(4, 1), lower(4, 1);
  upper << 0.0f, 0.1f, 10.0f, 10.1f;
  lower << 0.0f, 10.0f, 0.1f, 10.1f;
  const SplitResult split = split_cluster(upper, lower, 77);
  CHECK(split.split);
  CHECK(split.num_groups == 4);
  CHECK(split.groups == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("split_cluster leaves identical members unsplit") {
  MatrixF upper(4, 2), lower(4, 2);
  for (int i = 0; i < 4; ++i) {
    upper.row(i) << 1.0f, 2.0f;
    lower.row(i) << -1.0f, 0.5f;
  }
  const SplitResult split = split_cluster(upper, lower, 3);
  CHECK_FALSE(split.split);
  CHECK(split.num_groups == 1);
}

TEST_CASE("one degenerate part yields at most two groups") {
  MatrixF upper(6, 1), lower(6, 1);
  for (int i = 0; i < 6; ++i) upper(i, 0) = 5.0f;
  lower << 0.0f, 0.1f, 0.2f, 9.0f, 9.1f, 9.2f;
  const SplitResult split = split_cluster(upper, lower, 11);
  CHECK(split.split);
  CHECK(split.num_groups == 2);
  for (int g : split.groups) CHECK((g == 0 || g == 1));  // upper bit constant 0
}

TEST_CASE("twin-style split matches the exhaustive 2-partition oracle") {
  // two identities sharing the upper part bit-exactly (so that side is
  // degenerate); the lower part separates them
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Rng rng(seed);
    const int half = 5;
    MatrixF upper(2 * half, 3), lower(2 * half, 3);
    Eigen::RowVector3f shared, low_a, low_b;
    for (int k = 0; k < 3; ++k) {
      shared(k) = static_cast<float>(rng.gaussian());
      low_a(k) = static_cast<float>(rng.gaussian() + 4.0);
      low_b(k) = static_cast<float>(rng.gaussian() - 4.0);
    }
    for (int i = 0; i < 2 * half; ++i) {
      for (int k = 0; k < 3; ++k) {
        upper(i, k) = shared(k);
        lower(i, k) = (i < half ? low_a(k) : low_b(k)) + static_cast<float>(0.05 * rng.gaussian());
      }
    }
    const SplitResult split = split_cluster(upper, lower, seed);
    CHECK(split.split);
    CHECK(split.num_groups == 2);

    // grouping equals the optimal 2-partition of the lower features
    std::vector<int> best;
    oracle::best_2partition_wcss(lower, &best);
    std::set<std::set<int>> got_partition, want_partition;
    for (int side = 0; side < 2; ++side) {
      std::set<int> got_side, want_side;
      for (int i = 0; i < 2 * half; ++i) {
        if ((split.groups[i] != split.groups[0]) == side) got_side.insert(i);
        if ((best[i] != best[0]) == side) want_side.insert(i);
      }
      got_partition.insert(got_side);
      want_partition.insert(want_side);
    }
    CHECK(got_partition == want_partition);
  }
}

namespace {

struct PbhFixture {
  PseudoLabels labels;
  ClusterQuality quality;
  MatrixF upper;
  MatrixF lower;
};

// Three clusters; cluster 0 is a merged twin pair whose upper features are
// exactly shared (degenerate), distinguishable by the lower part only.
PbhFixture make_fixture(std::uint64_t seed) {
  Rng rng(seed);
  PbhFixture f;
  const int n = 18;
  f.upper.resize(n, 2);
  f.lower.resize(n, 2);
  std::vector<int> raw(n);
  for (int i = 0; i < n; ++i) {
    const int c = i / 6;
    raw[i] = c;
    const double twin_side = (i % 6) < 3 ? 4.0 : -4.0;
    for (int k = 0; k < 2; ++k) {
      f.upper(i, k) = c == 0 ? 0.0f : static_cast<float>(2.0 * c + 0.05 * rng.gaussian());
      f.lower(i, k) = static_cast<float>(2.0 * c + (c == 0 ? twin_side : 0.0) +
                                         0.05 * rng.gaussian());
    }
  }
  f.labels = compact_labels(raw);
  f.quality.msil = {0.1, 0.9, 0.9};
  f.quality.sizes = f.labels.cluster_sizes();
  f.quality.per_sample.assign(n, 0.5);
  return f;
}

}  // namespace

TEST_CASE("apply_pbh is the identity when nothing is below lambda") {
  PbhFixture f = make_fixture(1);
  f.quality.msil = {0.9, 0.9, 0.9};
  PbhConfig config;
  config.lambda_mode = PbhConfig::LambdaMode::kFixed;
  config.fixed_lambda = 0.5;
  const PbhResult result = apply_pbh(f.labels, f.quality, f.upper, f.lower, config, 4);
  CHECK(result.labels.labels == f.labels.labels);
  CHECK(result.labels.num_clusters == f.labels.num_clusters);
}

TEST_CASE("apply_pbh splitting one cluster two ways adds exactly one cluster") {
  const PbhFixture f = make_fixture(2);
  PbhConfig config;
  config.lambda_mode = PbhConfig::LambdaMode::kFixed;
  config.fixed_lambda = 0.5;  // selects cluster 0 only
  const PbhResult result = apply_pbh(f.labels, f.quality, f.upper, f.lower, config, 4);
  CHECK(result.labels.num_clusters == f.labels.num_clusters + 1);
  // the twin halves of cluster 0 now carry different labels
  CHECK(result.labels.labels[0] != result.labels.labels[3]);
  CHECK(result.labels.labels[0] == result.labels.labels[1]);
}

TEST_CASE("apply_pbh leaves an all-degenerate selected cluster intact") {
  PbhFixture f = make_fixture(3);
  for (int i = 0; i < 6; ++i) {
    f.upper.row(i) << 1.0f, 1.0f;
    f.lower.row(i) << 2.0f, 2.0f;
  }
  PbhConfig config;
  config.lambda_mode = PbhConfig::LambdaMode::kFixed;
  config.fixed_lambda = 0.5;
  const PbhResult result = apply_pbh(f.labels, f.quality, f.upper, f.lower, config, 4);
  CHECK(result.labels.num_clusters == f.labels.num_clusters);
}

TEST_CASE("apply_pbh never merges and never touches noise on fuzzed inputs") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Rng rng(seed);
    const int n = 10 + static_cast<int>(rng.index(60));
    MatrixF upper = oracle::random_matrix(n, 3, rng);
    MatrixF lower = oracle::random_matrix(n, 3, rng);
    std::vector<int> raw(n);
    for (int i = 0; i < n; ++i) {
      const int v = static_cast<int>(rng.index(6));
      raw[i] = v == 5 ? kNoise : v;
    }
    const PseudoLabels labels = compact_labels(raw);
    if (labels.num_clusters < 2) continue;

    ClusterQuality quality;
    quality.sizes = labels.cluster_sizes();
    quality.msil.resize(labels.num_clusters);
    for (double& v : quality.msil) v = 2.0 * rng.u01() - 1.0;
    quality.per_sample.assign(n, 0.0);

    PbhConfig config;
    if (rng.u01() < 0.5) {
      config.lambda_mode = PbhConfig::LambdaMode::kFixed;
      config.fixed_lambda = 2.0 * rng.u01() - 1.0;
    }
    const PbhResult result = apply_pbh(labels, quality, upper, lower, config, seed);

    REQUIRE(result.labels.size() == n);
    for (int i = 0; i < n; ++i)
      CHECK((labels.labels[i] == kNoise) == (result.labels.labels[i] == kNoise));

    // refinement: samples in one output cluster always share an input cluster
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        if (result.labels.labels[i] == kNoise || result.labels.labels[j] == kNoise) continue;
        if (result.labels.labels[i] == result.labels.labels[j])
          CHECK(labels.labels[i] == labels.labels[j]);
      }

    // compact label space
    std::vector<int> seen(result.labels.num_clusters, 0);
    for (int l : result.labels.labels)
      if (l != kNoise) seen[l] = 1;
    for (int s : seen) CHECK(s == 1);
  }
}
