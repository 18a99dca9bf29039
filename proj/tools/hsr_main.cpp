// Command-line front end: dataset synthesis, the individual pipeline stages,
// full training, evaluation, and the ablation table.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "hsr/hsr.hpp"

namespace fs = std::filesystem;

namespace {

struct DatasetArgs {
  std::string data_dir;
  std::string checkpoint;
};

void add_dataset_options(CLI::App* cmd, DatasetArgs& args, bool checkpoint_required = false) {
  cmd->add_option("--data", args.data_dir, "directory holding embeddings.bin / metadata.csv")
      ->required();
  auto* opt = cmd->add_option("--checkpoint", args.checkpoint, "trained projector weights");
  if (checkpoint_required) opt->required();
}

hsr::EmbeddingSet load_data(const DatasetArgs& args) {
  const fs::path dir(args.data_dir);
  return hsr::load_dataset((dir / "embeddings.bin").string(), (dir / "metadata.csv").string());
}

hsr::MatrixF average_parts(const hsr::EmbeddingSet& data) {
  return ((data.raw_parts[0].cast<double>() + data.raw_parts[1].cast<double>()) / 2.0)
      .cast<float>();
}

// Embedding the stages operate on: the trained projector when a checkpoint is
// given, otherwise the normalized raw features.
hsr::MatrixF global_embedding(const hsr::EmbeddingSet& data, const std::string& checkpoint) {
  if (checkpoint.empty()) return hsr::l2_normalize(data.raw_global);
  const hsr::ProjectorModel model = hsr::load_checkpoint(checkpoint);
  return hsr::forward(model, average_parts(data));
}

void write_labels_csv(const std::string& path, const hsr::PseudoLabels& labels) {
  std::ofstream os(path);
  if (!os) throw hsr::IoError("cannot open for writing: " + path);
  os << "index,label\n";
  for (int i = 0; i < labels.size(); ++i) os << i << ',' << labels.labels[i] << '\n';
}

hsr::RunConfig make_config(const std::string& config_path, std::uint64_t seed, bool seed_set) {
  hsr::RunConfig cfg;
  if (!config_path.empty()) cfg = hsr::load_config(config_path);
  if (seed_set) {
    cfg.train.seed = seed;
    cfg.synth.seed = seed;
  }
  return cfg;
}

hsr::PseudoLabels cluster_stage(const hsr::MatrixF& embedding, const hsr::RunConfig& cfg,
                                double* eps_out = nullptr) {
  const hsr::MatrixD dists = hsr::pairwise_distances(embedding);
  hsr::DbscanParams params;
  params.min_pts = cfg.train.min_pts;
  params.eps = cfg.train.eps > 0.0
                   ? cfg.train.eps
                   : hsr::eps_heuristic_from_distances(dists, cfg.train.min_pts);
  if (!(params.eps > 0.0)) {
    std::cerr << "warning: eps heuristic returned 0 (identical points?); using 1e-3\n";
    params.eps = 1e-3;
  }
  if (eps_out) *eps_out = params.eps;
  return hsr::dbscan_from_distances(dists, params);
}

int run(int argc, char** argv) {
  CLI::App app{"hard-sample rectification for unsupervised re-ID, in embedding space"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir = ".";
  app.add_option("--config", config_path, "key = value config file")->capture_default_str();
  app.add_option("--seed", seed, "overrides the config seed")->each([&](const std::string&) {
    seed_set = true;
  });
  app.add_option("--out", out_dir, "output directory")->capture_default_str();

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic camera-network dataset");
  auto* cluster_cmd = app.add_subcommand("cluster", "density-cluster a dataset into pseudo labels");
  auto* icm_cmd = app.add_subcommand("icm", "mine cross-camera mutual pairs");
  auto* pbh_cmd = app.add_subcommand("pbh", "split low-quality clusters by part features");
  auto* train_cmd = app.add_subcommand("train", "run the full iterative training scheme");
  auto* eval_cmd = app.add_subcommand("eval", "score a checkpoint with Rank-1 / mAP");
  auto* ablate_cmd = app.add_subcommand("ablate", "run all ablation configurations");

  DatasetArgs cluster_args, icm_args, pbh_args, train_args, eval_args;
  add_dataset_options(cluster_cmd, cluster_args);
  add_dataset_options(icm_cmd, icm_args);
  add_dataset_options(pbh_cmd, pbh_args);
  add_dataset_options(train_cmd, train_args);
  add_dataset_options(eval_cmd, eval_args, /*checkpoint_required=*/true);

  int ablate_seeds = 5;
  ablate_cmd->add_option("--seeds", ablate_seeds, "number of dataset/train seeds")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // help is a success, anything else a usage error
  }

  const hsr::RunConfig cfg = make_config(config_path, seed, seed_set);
  fs::create_directories(out_dir);
  const fs::path out(out_dir);

  if (synth_cmd->parsed()) {
    const hsr::SynthData synth = hsr::generate(cfg.synth);
    hsr::save_embeddings((out / "embeddings.bin").string(), synth.data);
    hsr::save_metadata((out / "metadata.csv").string(), synth.data);
    hsr::save_split((out / "split.csv").string(), synth.split, synth.data.n());
    std::cout << "wrote " << synth.data.n() << " samples (" << cfg.synth.num_ids << " ids, "
              << cfg.synth.cams << " cameras) to " << out_dir << "\n";
    return 0;
  }

  if (cluster_cmd->parsed()) {
    const hsr::EmbeddingSet data = load_data(cluster_args);
    double eps = 0.0;
    const hsr::PseudoLabels labels =
        cluster_stage(global_embedding(data, cluster_args.checkpoint), cfg, &eps);
    write_labels_csv((out / "labels.csv").string(), labels);
    std::cout << "eps=" << eps << " clusters=" << labels.num_clusters
              << " noise=" << labels.num_noise() << "\n";
    return 0;
  }

  if (icm_cmd->parsed()) {
    const hsr::EmbeddingSet data = load_data(icm_args);
    const hsr::MatrixF emb = global_embedding(data, icm_args.checkpoint);
    const hsr::SimilarityMatrix sim = hsr::pairwise_similarity(emb);
    const hsr::RankLists ranks = hsr::build_rank_lists(sim, data.cameras, cfg.train.icm_k);
    const hsr::MutualPairs pairs = hsr::mutual_pairs(ranks);
    std::ofstream os(out / "pairs.csv");
    if (!os) throw hsr::IoError("cannot open pairs.csv for writing");
    os << "anchor,partner\n";
    for (const auto& [i, j] : pairs.pairs) os << i << ',' << j << '\n';
    double total_len = 0.0;
    for (const auto& list : ranks.lists) total_len += static_cast<double>(list.size());
    std::cout << "pairs=" << pairs.pairs.size()
              << " mean_list_length=" << total_len / std::max(1, ranks.n()) << "\n";
    return 0;
  }

  if (pbh_cmd->parsed()) {
    const hsr::EmbeddingSet data = load_data(pbh_args);
    const hsr::MatrixF emb = global_embedding(data, pbh_args.checkpoint);
    const hsr::MatrixD dists = hsr::pairwise_distances(emb);
    const hsr::PseudoLabels before = cluster_stage(emb, cfg);
    write_labels_csv((out / "labels_before.csv").string(), before);

    hsr::MatrixF upper, lower;
    if (pbh_args.checkpoint.empty()) {
      upper = hsr::l2_normalize(data.raw_parts[0]);
      lower = hsr::l2_normalize(data.raw_parts[1]);
    } else {
      const hsr::ProjectorModel model = hsr::load_checkpoint(pbh_args.checkpoint);
      upper = hsr::forward(model, data.raw_parts[0]);
      lower = hsr::forward(model, data.raw_parts[1]);
    }

    hsr::PbhConfig pbh_config;
    pbh_config.lambda_mode = cfg.train.lambda_auto ? hsr::PbhConfig::LambdaMode::kAuto
                                                   : hsr::PbhConfig::LambdaMode::kFixed;
    pbh_config.fixed_lambda = cfg.train.fixed_lambda;
    pbh_config.min_cluster_size_for_split = cfg.train.min_cluster_size_for_split;

    hsr::PbhResult result;
    if (before.num_clusters >= 2) {
      const hsr::ClusterQuality quality = hsr::mean_silhouette_per_cluster(
          hsr::silhouette_samples_from_distances(dists, before), before);
      result = hsr::apply_pbh(before, quality, upper, lower, pbh_config, cfg.train.seed);
    } else {
      result.labels = before;
      std::cerr << "warning: fewer than 2 clusters, nothing to split\n";
    }
    write_labels_csv((out / "labels_after.csv").string(), result.labels);
    std::ofstream report(out / "pbh_report.csv");
    if (!report) throw hsr::IoError("cannot open pbh_report.csv for writing");
    report << "cluster,msil,size,selected,groups\n";
    for (const auto& r : result.reports)
      report << r.cluster << ',' << r.msil << ',' << r.size << ',' << (r.selected ? 1 : 0) << ','
             << r.groups << '\n';
    std::cout << "lambda=" << result.lambda << " clusters_before=" << before.num_clusters
              << " clusters_after=" << result.labels.num_clusters << "\n";
    return 0;
  }

  if (train_cmd->parsed()) {
    const hsr::EmbeddingSet data = load_data(train_args);
    hsr::EvalSplit split;
    const fs::path split_path = fs::path(train_args.data_dir) / "split.csv";
    const bool have_split = fs::exists(split_path);
    if (have_split) split = hsr::load_split(split_path.string());
    const hsr::RunResult result =
        hsr::run_hsr(data, cfg.train, have_split ? &split : nullptr);
    hsr::save_checkpoint((out / "checkpoint.bin").string(), result.model);
    hsr::save_history_csv((out / "history.csv").string(), result.history);
    if (!result.history.empty()) {
      const auto& last = result.history.back();
      std::cout << "iterations=" << result.history.size() << " clusters=" << last.num_clusters
                << " r1=" << last.r1 << " map=" << last.map << "\n";
    } else {
      std::cout << "iterations=0 (untrained projector saved)\n";
    }
    return 0;
  }

  if (eval_cmd->parsed()) {
    const hsr::EmbeddingSet data = load_data(eval_args);
    if (!data.gt_ids) throw hsr::ConfigError("eval: dataset has no ground-truth ids");
    const hsr::EvalSplit split =
        hsr::load_split((fs::path(eval_args.data_dir) / "split.csv").string());
    const hsr::MatrixF emb = global_embedding(data, eval_args.checkpoint);
    const hsr::EvalResult ev = hsr::evaluate(emb, split, *data.gt_ids, data.cameras);
    std::cout << ev.r1 << ',' << ev.map << ',' << ev.num_queries << ',' << ev.num_excluded
              << "\n";
    return 0;
  }

  if (ablate_cmd->parsed()) {
    const hsr::AblateResult result =
        hsr::run_ablation(cfg, ablate_seeds, [](const hsr::AblateRow& row) {
          std::cerr << row.config_name << " seed=" << row.seed << " r1=" << row.r1
                    << " map=" << row.map << "\n";
        });
    hsr::save_ablation_csv((out / "ablate.csv").string(), result.rows);
    std::cout << "wrote " << result.rows.size() << " rows to "
              << (out / "ablate.csv").string() << "\n";
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const hsr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
