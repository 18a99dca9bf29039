#pragma once

#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "hsr/common.hpp"
#include "hsr/dataset.hpp"
#include "hsr/eval.hpp"

namespace hsr {

// Synthetic camera-network benchmark with two controllable failure modes:
// a per-camera appearance offset that pushes same-identity samples apart
// across cameras (hard positives), and twin identities that share one part
// center exactly (hard negatives).
struct SynthConfig {
  int num_ids = 60;
  int cams = 6;
  int samples_per_id_per_cam = 3;
  int d_part = 32;
  double sigma_id = 1.0;     // identity center spread per dimension
  double alpha_cam = 1.2;    // camera offset strength relative to sigma_id
  double twin_fraction = 0.3;
  double noise_sigma = 0.15;
  std::uint64_t seed = 0;

  void validate() const {
    if (num_ids < 1) throw ConfigError("SynthConfig: num_ids must be >= 1");
    if (cams < 2) throw ConfigError("SynthConfig: cams must be >= 2");
    if (samples_per_id_per_cam < 2)
      throw ConfigError("SynthConfig: samples_per_id_per_cam must be >= 2 to leave a gallery");
    if (d_part < 1) throw ConfigError("SynthConfig: d_part must be >= 1");
    if (twin_fraction < 0.0 || twin_fraction > 1.0)
      throw ConfigError("SynthConfig: twin_fraction must lie in [0, 1]");
    if (sigma_id < 0.0 || alpha_cam < 0.0 || noise_sigma < 0.0)
      throw ConfigError("SynthConfig: sigmas must be >= 0");
  }
};

struct SynthData {
  EmbeddingSet data;
  EvalSplit split;
  std::vector<std::pair<int, int>> twin_pairs;  // identity pairs sharing a part
  std::vector<int> twin_part;                   // 0 = upper, 1 = lower, per pair
};

// Sample layout: identity-major, then camera, then sample; the first sample
// of every (id, camera) cell is the query, the rest are gallery. Camera
// offsets share one direction per camera across both parts but carry
// independent per-part scales, and are sized like the identity spread
// (alpha_cam * sqrt(d_part)) so that alpha_cam > sigma_id actually produces
// cross-camera gaps wider than some identity gaps.
inline SynthData generate(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const int d = config.d_part;

  auto draw_vector = [&](double sigma) {
    Eigen::RowVectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = sigma * rng.gaussian();
    return v;
  };

  // Identity part centers.
  std::vector<Eigen::RowVectorXd> center_u(config.num_ids), center_l(config.num_ids);
  for (int id = 0; id < config.num_ids; ++id) {
    center_u[id] = draw_vector(config.sigma_id);
    center_l[id] = draw_vector(config.sigma_id);
  }

  SynthData out;

  // Twins: consecutive identity pairs share one part center bit-exactly.
  const int num_twinned = 2 * static_cast<int>(config.num_ids * config.twin_fraction / 2.0);
  for (int a = 0; a + 1 < num_twinned; a += 2) {
    const int part = rng.u01() < 0.5 ? 0 : 1;
    if (part == 0)
      center_u[a + 1] = center_u[a];
    else
      center_l[a + 1] = center_l[a];
    out.twin_pairs.emplace_back(a, a + 1);
    out.twin_part.push_back(part);
  }

  // Camera offsets: one unit direction per camera shared by both parts, with
  // an independent scale per part. The network mixes three viewpoint kinds:
  // a near-clean group whose cells seed the initial density clusters, one far
  // outlier whose norm compression makes the closest identities collide (the
  // hard negatives), and moderately biased cameras whose gaps exceed some
  // identity gaps (the hard positives).
  std::vector<Eigen::RowVectorXd> cam_dir(config.cams);
  std::vector<std::array<double, 2>> cam_scale(config.cams);
  const double offset_base = config.alpha_cam * std::sqrt(static_cast<double>(d));
  const int num_clean = std::max(1, config.cams / 3);
  for (int c = 0; c < config.cams; ++c) {
    Eigen::RowVectorXd g = draw_vector(1.0);
    cam_dir[c] = g / g.norm();
    double lo = 0.70, hi = 0.85;
    if (c < num_clean) {
      lo = 0.15;
      hi = 0.25;
    } else if (c == num_clean) {
      lo = 1.25;
      hi = 1.35;
    }
    cam_scale[c][0] = offset_base * (lo + (hi - lo) * rng.u01());
    cam_scale[c][1] = offset_base * (lo + (hi - lo) * rng.u01());
  }

  const int n = config.num_ids * config.cams * config.samples_per_id_per_cam;
  EmbeddingSet& set = out.data;
  set.raw_parts.assign(2, MatrixF(n, d));
  set.raw_global.resize(n, 2 * d);
  set.cameras.resize(n);
  set.gt_ids = std::vector<int>(n);

  int row = 0;
  for (int id = 0; id < config.num_ids; ++id) {
    for (int c = 0; c < config.cams; ++c) {
      for (int s = 0; s < config.samples_per_id_per_cam; ++s, ++row) {
        const Eigen::RowVectorXd u =
            center_u[id] + cam_scale[c][0] * cam_dir[c] + draw_vector(config.noise_sigma);
        const Eigen::RowVectorXd l =
            center_l[id] + cam_scale[c][1] * cam_dir[c] + draw_vector(config.noise_sigma);
        set.raw_parts[0].row(row) = u.cast<float>();
        set.raw_parts[1].row(row) = l.cast<float>();
        set.raw_global.block(row, 0, 1, d) = set.raw_parts[0].row(row);
        set.raw_global.block(row, d, 1, d) = set.raw_parts[1].row(row);
        set.cameras[row] = c;
        (*set.gt_ids)[row] = id;
        if (s == 0)
          out.split.query.push_back(row);
        else
          out.split.gallery.push_back(row);
      }
    }
  }
  set.validate();
  return out;
}

// Split CSV: header `index,role`, role in {query, gallery}, rows ascending
// by dataset index.
inline void save_split(const std::string& path, const EvalSplit& split, int n) {
  std::vector<int> role(n, -1);
  for (int q : split.query) role[q] = 0;
  for (int g : split.gallery) role[g] = 1;
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << "index,role\n";
  for (int i = 0; i < n; ++i) {
    if (role[i] < 0) continue;
    os << i << ',' << (role[i] == 0 ? "query" : "gallery") << '\n';
  }
}

inline EvalSplit load_split(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  std::string line;
  if (!std::getline(is, line) || line != "index,role") throw IoError("bad split header in " + path);
  EvalSplit split;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw IoError("malformed split row: " + line);
    const int idx = std::stoi(line.substr(0, comma));
    const std::string role = line.substr(comma + 1);
    if (role == "query")
      split.query.push_back(idx);
    else if (role == "gallery")
      split.gallery.push_back(idx);
    else
      throw IoError("unknown split role: " + role);
  }
  return split;
}

}  // namespace hsr
