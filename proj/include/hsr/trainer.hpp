#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hsr/common.hpp"
#include "hsr/dataset.hpp"
#include "hsr/dbscan.hpp"
#include "hsr/distance.hpp"
#include "hsr/eval.hpp"
#include "hsr/icm.hpp"
#include "hsr/labels.hpp"
#include "hsr/losses.hpp"
#include "hsr/model.hpp"
#include "hsr/pbh.hpp"
#include "hsr/sampler.hpp"
#include "hsr/silhouette.hpp"

namespace hsr {

enum class TripletVariant { kBatchHard, kAllPairs };

struct TrainConfig {
  double lr = 0.005;
  int epochs_per_iter = 10;
  int iterations = 30;
  int p_ids = 8;
  int k_imgs = 4;
  double margin = 0.3;
  bool use_icm = true;
  bool use_pbh = true;
  int d_out = 64;
  std::uint64_t seed = 0;

  // Clustering knobs (the paper leaves DBSCAN unparameterized).
  double eps = 0.0;  // <= 0 means the kNN-percentile heuristic, recomputed per iteration
  int min_pts = 4;

  // Mining knobs.
  int icm_k = 10;
  int icm_per_anchor = 4;
  IcmNegativeMode icm_negative_mode = IcmNegativeMode::kUniform;
  TripletVariant triplet_variant = TripletVariant::kBatchHard;

  // Softmax temperature for classifying unit-norm embeddings.
  double logit_scale = 16.0;

  // PBH knobs.
  bool lambda_auto = true;
  double fixed_lambda = 0.0;
  int min_cluster_size_for_split = 4;

  void validate() const {
    if (lr <= 0.0) throw ConfigError("TrainConfig: lr must be > 0");
    if (epochs_per_iter < 1) throw ConfigError("TrainConfig: epochs_per_iter must be >= 1");
    if (iterations < 0) throw ConfigError("TrainConfig: iterations must be >= 0");
    if (p_ids < 1 || k_imgs < 1) throw ConfigError("TrainConfig: batch shape must be positive");
    if (margin < 0.0) throw ConfigError("TrainConfig: margin must be >= 0");
    if (d_out < 1) throw ConfigError("TrainConfig: d_out must be >= 1");
    if (icm_k < 1) throw ConfigError("TrainConfig: icm K must be >= 1");
    if (icm_per_anchor < 1) throw ConfigError("TrainConfig: icm_per_anchor must be >= 1");
    if (min_pts < 1) throw ConfigError("TrainConfig: min_pts must be >= 1");
    if (min_cluster_size_for_split < 2)
      throw ConfigError("TrainConfig: min_cluster_size_for_split must be >= 2");
  }
};

struct IterationStats {
  int iter = 0;  // 1-based
  int num_clusters = 0;
  int num_noise = 0;
  double eps = 0.0;
  double mean_msil = 0.0;
  double loss_ce = 0.0;
  double loss_trip = 0.0;
  double loss_icm = 0.0;
  double r1 = 0.0;
  double map = 0.0;
  double rank_precision = 0.0;
  double hard_positive_rate = 0.0;
  int num_mutual_pairs = 0;
  int pbh_selected = 0;      // clusters picked for splitting this iteration
  int pbh_new_clusters = 0;  // net label-space growth from those splits
  bool trained = true;       // false when too few clusters to form batches
};

struct RunResult {
  ProjectorModel model;
  std::vector<IterationStats> history;
};

namespace detail {

// Gathers rows of a row-major float matrix by index.
inline MatrixF take_rows(const MatrixF& m, const std::vector<int>& idx) {
  MatrixF out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(idx[r]);
  return out;
}

// Backpropagates embedding gradients through row-wise normalization and the
// affine map, accumulating parameter gradients.
struct ParamGrads {
  MatrixD d_w;
  VectorD d_b;
};

inline ParamGrads backprop_projector(const MatrixF& inputs, const ForwardCache& cache,
                                     const MatrixD& d_embeddings) {
  const Eigen::Index rows = inputs.rows();
  MatrixD dz(rows, cache.embeddings.cols());
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto e = cache.embeddings.row(r);
    const auto de = d_embeddings.row(r);
    dz.row(r) = (de - e * e.dot(de)) / cache.norms(r);
  }
  ParamGrads g;
  g.d_w = dz.transpose() * inputs.cast<double>();
  g.d_b = dz.colwise().sum().transpose();
  return g;
}

}  // namespace detail

// One full run of the iterative scheme: cluster with DBSCAN, rectify hard
// negatives by part-based splitting, mine hard positives across cameras, and
// train the projector with the summed cross-entropy + triplet + mined-triplet
// loss. The optional split enables R1/mAP diagnostics per iteration when
// ground truth is present; it never influences training.
inline RunResult run_hsr(const EmbeddingSet& data, const TrainConfig& config,
                         const EvalSplit* split = nullptr) {
  config.validate();
  data.validate();
  if (data.num_parts() != 2) throw ConfigError("run_hsr: expected upper/lower part features");
  if (config.use_icm && data.num_cameras() < 2)
    throw ConfigError("run_hsr: inter-camera mining needs at least 2 cameras");

  const int n = data.n();
  const int d_in = data.d_part();
  // Shared projector: the global embedding maps the mean of the two part
  // features so one weight matrix serves global and part projections alike.
  MatrixF avg_raw = ((data.raw_parts[0].cast<double>() + data.raw_parts[1].cast<double>()) / 2.0)
                        .cast<float>();

  RunResult result;
  result.model = ProjectorModel::init(d_in, config.d_out, mix_seed(config.seed, 0x6d6f64656cull));

  const bool have_gt = data.gt_ids.has_value();
  const std::vector<int> empty_gt;
  const std::vector<int>& gt = have_gt ? *data.gt_ids : empty_gt;

  PbhConfig pbh_config;
  pbh_config.lambda_mode =
      config.lambda_auto ? PbhConfig::LambdaMode::kAuto : PbhConfig::LambdaMode::kFixed;
  pbh_config.fixed_lambda = config.fixed_lambda;
  pbh_config.min_cluster_size_for_split = config.min_cluster_size_for_split;

  std::optional<MatrixF> cached_global;  // embedding of the current weights, if fresh

  // The data-driven radius is fixed at the first iteration. Training shrinks
  // within-identity distances, so against a constant yardstick the clusters
  // grow across iterations; a re-estimated radius would track the collapsing
  // trained clusters instead and freeze the label set.
  double auto_eps = 0.0;

  for (int iter = 0; iter < config.iterations; ++iter) {
    IterationStats stats;
    stats.iter = iter + 1;

    // (1) Embed everything with the current weights.
    MatrixF emb_global = cached_global ? std::move(*cached_global)
                                       : forward(result.model, avg_raw);
    cached_global.reset();
    const MatrixD dists = pairwise_distances(emb_global);

    // (2) Pseudo labels by density clustering.
    DbscanParams dbscan_params;
    dbscan_params.min_pts = config.min_pts;
    if (config.eps > 0.0) {
      dbscan_params.eps = config.eps;
    } else {
      if (iter == 0) auto_eps = eps_heuristic_from_distances(dists, config.min_pts);
      dbscan_params.eps = auto_eps;
    }
    if (!(dbscan_params.eps > 0.0)) dbscan_params.eps = 1e-3;  // all points coincide
    stats.eps = dbscan_params.eps;
    PseudoLabels labels = dbscan_from_distances(dists, dbscan_params);

    // (3) Cluster quality, and hard-negative rectification by splitting.
    ClusterQuality quality;
    if (labels.num_clusters >= 2) {
      quality = mean_silhouette_per_cluster(silhouette_samples_from_distances(dists, labels),
                                            labels);
      double msil_sum = 0.0;
      for (double v : quality.msil) msil_sum += v;
      stats.mean_msil = msil_sum / quality.msil.size();
      if (config.use_pbh) {
        const MatrixF emb_upper = forward(result.model, data.raw_parts[0]);
        const MatrixF emb_lower = forward(result.model, data.raw_parts[1]);
        PbhResult pbh = apply_pbh(labels, quality, emb_upper, emb_lower, pbh_config,
                                  mix_seed(config.seed, 0x706268ull, iter));
        for (const PbhClusterReport& r : pbh.reports)
          if (r.selected) ++stats.pbh_selected;
        stats.pbh_new_clusters = pbh.labels.num_clusters - labels.num_clusters;
        labels = std::move(pbh.labels);
      }
    }
    stats.num_clusters = labels.num_clusters;
    stats.num_noise = labels.num_noise();

    // (4) Hard-positive mining across cameras.
    RankLists ranks;
    MutualPairs pairs;
    const bool want_rank_diag = have_gt && data.num_cameras() >= 2;
    if (config.use_icm || want_rank_diag) {
      const SimilarityMatrix sim = similarity_from_distances(dists);
      ranks = build_rank_lists(sim, data.cameras, config.icm_k);
      pairs = mutual_pairs(ranks);
      stats.num_mutual_pairs = static_cast<int>(pairs.pairs.size());
      if (want_rank_diag) {
        stats.rank_precision = rank_precision(ranks, gt);
        stats.hard_positive_rate = hard_positive_rate(ranks, gt, labels);
      }
    }

    // (5) Fresh classifier over the current label space, then (6) epochs of
    // PK batches minimizing L_CE + L_trip + L_ICM.
    if (labels.num_clusters < 2) {
      stats.trained = false;
    } else {
      ClassifierHead head = ClassifierHead::init(labels.num_clusters, config.d_out,
                                                 mix_seed(config.seed, 0x68656164ull, iter));
      const int p_eff = std::min(config.p_ids, labels.num_clusters);
      const int batch_size = p_eff * config.k_imgs;
      // An epoch is a pass over the dataset scale; the sampler itself only
      // ever draws clustered samples.
      const int batches_per_epoch = std::max(1, (n + batch_size - 1) / batch_size);

      double sum_ce = 0.0, sum_trip = 0.0, sum_icm = 0.0;
      long num_batches = 0;

      for (int epoch = 0; epoch < config.epochs_per_iter; ++epoch) {
        for (int batch = 0; batch < batches_per_epoch; ++batch, ++num_batches) {
          const std::uint64_t batch_seed =
              mix_seed(mix_seed(config.seed, 0x62617463ull, iter),
                       static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(batch));
          const std::vector<int> batch_idx = pk_sample(labels, p_eff, config.k_imgs, batch_seed);
          const int b = static_cast<int>(batch_idx.size());

          // Mined triplets may pull in samples outside the PK batch; the
          // union of rows is embedded once so every gradient flows back.
          std::vector<int> union_idx = batch_idx;
          std::unordered_map<int, int> row_of;
          for (int r = 0; r < b; ++r) row_of.emplace(batch_idx[r], r);
          std::vector<TripletRef> triplet_rows;
          if (config.use_icm) {
            std::vector<int> anchors;
            for (int r = 0; r < b; ++r)
              if (row_of[batch_idx[r]] == r) anchors.push_back(batch_idx[r]);  // dedup
            const std::vector<IcmTriplet> mined = sample_icm_triplets(
                ranks, pairs, labels, anchors, config.icm_per_anchor,
                mix_seed(batch_seed, 0x69636dull), nullptr, config.icm_negative_mode,
                config.icm_negative_mode == IcmNegativeMode::kBatchHard ? &emb_global : nullptr);
            auto row_for = [&](int idx) {
              auto [it, inserted] = row_of.emplace(idx, static_cast<int>(union_idx.size()));
              if (inserted) union_idx.push_back(idx);
              return it->second;
            };
            triplet_rows.reserve(mined.size());
            for (const IcmTriplet& t : mined)
              triplet_rows.push_back({row_for(t.anchor), row_for(t.positive), row_for(t.negative)});
          }

          const MatrixF inputs = detail::take_rows(avg_raw, union_idx);
          const ForwardCache cache = forward_cached(result.model, inputs);

          std::vector<int> batch_labels(b);
          for (int r = 0; r < b; ++r) batch_labels[r] = labels.labels[batch_idx[r]];

          const MatrixD batch_emb = cache.embeddings.topRows(b);
          const CeLossGrad ce = ce_loss_and_grad(head.v.cast<double>(), batch_emb, batch_labels,
                                                 config.logit_scale);
          const TripletLossGrad trip =
              config.triplet_variant == TripletVariant::kBatchHard
                  ? batch_hard_triplet_loss_and_grad(batch_emb, batch_labels, config.margin)
                  : all_pairs_triplet_loss_and_grad(batch_emb, batch_labels, config.margin);
          const TripletLossGrad icm =
              icm_triplet_loss_and_grad(cache.embeddings, triplet_rows, config.margin);

          sum_ce += ce.loss;
          sum_trip += trip.loss;
          sum_icm += icm.loss;

          MatrixD d_emb = icm.d_embeddings;
          d_emb.topRows(b) += ce.d_embeddings + trip.d_embeddings;
          const detail::ParamGrads grads = detail::backprop_projector(inputs, cache, d_emb);

          // L_total = L_CE + L_trip + L_ICM with unit weights; all gradients
          // are validated before any parameter moves.
          if (!grads.d_w.allFinite() || !grads.d_b.allFinite() || !ce.d_head.allFinite())
            throw NonFiniteError("run_hsr: non-finite gradient in iteration " +
                                 std::to_string(iter + 1));
          sgd_step(result.model.w, grads.d_w, config.lr);
          sgd_step(result.model.b, grads.d_b, config.lr);
          sgd_step(head.v, ce.d_head, config.lr);
        }
      }
      stats.loss_ce = sum_ce / num_batches;
      stats.loss_trip = sum_trip / num_batches;
      stats.loss_icm = sum_icm / num_batches;
    }

    // (7) End-of-iteration retrieval diagnostics on the updated weights.
    cached_global = forward(result.model, avg_raw);
    if (split && have_gt) {
      const EvalResult ev = evaluate(*cached_global, *split, gt, data.cameras);
      stats.r1 = ev.r1;
      stats.map = ev.map;
    }
    result.history.push_back(stats);
  }
  return result;
}

inline void save_history_csv(const std::string& path, const std::vector<IterationStats>& history) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << "iter,num_clusters,mean_msil,loss_ce,loss_trip,loss_icm,r1,map,rank_precision\n";
  for (const IterationStats& s : history) {
    os << s.iter << ',' << s.num_clusters << ',' << s.mean_msil << ',' << s.loss_ce << ','
       << s.loss_trip << ',' << s.loss_icm << ',' << s.r1 << ',' << s.map << ','
       << s.rank_precision << '\n';
  }
}

}  // namespace hsr
