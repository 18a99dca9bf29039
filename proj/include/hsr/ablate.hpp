#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hsr/run_config.hpp"
#include "hsr/synth.hpp"
#include "hsr/trainer.hpp"

namespace hsr {

// The five ablation rows: no training at all, the plain clustering pipeline,
// each rectification alone, and the full scheme.
inline const std::vector<std::string>& ablation_names() {
  static const std::vector<std::string> names = {"direct_transfer", "baseline", "baseline_pbh",
                                                 "baseline_icm", "hsr"};
  return names;
}

inline TrainConfig ablation_variant(const TrainConfig& base, const std::string& name) {
  TrainConfig cfg = base;
  if (name == "direct_transfer") {
    cfg.iterations = 0;
    cfg.use_icm = false;
    cfg.use_pbh = false;
  } else if (name == "baseline") {
    cfg.use_icm = false;
    cfg.use_pbh = false;
  } else if (name == "baseline_pbh") {
    cfg.use_icm = false;
    cfg.use_pbh = true;
  } else if (name == "baseline_icm") {
    cfg.use_icm = true;
    cfg.use_pbh = false;
  } else if (name == "hsr") {
    cfg.use_icm = true;
    cfg.use_pbh = true;
  } else {
    throw ConfigError("unknown ablation configuration: " + name);
  }
  return cfg;
}

struct AblateRow {
  std::string config_name;
  std::uint64_t seed = 0;
  double r1 = 0.0;
  double map = 0.0;
};

struct AblateResult {
  std::vector<AblateRow> rows;
  // Full per-iteration histories keyed like rows (same order), for trend
  // diagnostics.
  std::vector<std::vector<IterationStats>> histories;
};

// Runs every ablation configuration on `num_seeds` freshly generated
// datasets. Configurations for one seed share the dataset, so rows are
// comparable within a seed.
inline AblateResult run_ablation(const RunConfig& config, int num_seeds,
                                 const std::function<void(const AblateRow&)>& on_row = {}) {
  if (num_seeds < 1) throw ConfigError("run_ablation: need at least one seed");
  AblateResult result;
  for (const std::string& name : ablation_names()) {
    for (int s = 0; s < num_seeds; ++s) {
      const std::uint64_t seed = config.train.seed + static_cast<std::uint64_t>(s);
      const SynthData synth = generate(config.synth_config(seed));
      TrainConfig train = ablation_variant(config.train, name);
      train.seed = seed;
      const RunResult run = run_hsr(synth.data, train, &synth.split);
      const MatrixF emb = forward(
          run.model,
          ((synth.data.raw_parts[0].cast<double>() + synth.data.raw_parts[1].cast<double>()) / 2.0)
              .cast<float>());
      const EvalResult ev = evaluate(emb, synth.split, *synth.data.gt_ids, synth.data.cameras);
      AblateRow row{name, seed, ev.r1, ev.map};
      if (on_row) on_row(row);
      result.rows.push_back(row);
      result.histories.push_back(run.history);
    }
  }
  return result;
}

inline void save_ablation_csv(const std::string& path, const std::vector<AblateRow>& rows) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << "config,seed,r1,map\n";
  for (const AblateRow& row : rows)
    os << row.config_name << ',' << row.seed << ',' << row.r1 << ',' << row.map << '\n';
}

}  // namespace hsr
