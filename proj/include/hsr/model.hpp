#pragma once

#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "hsr/common.hpp"
#include "hsr/distance.hpp"

namespace hsr {

// Trainable linear embedding map: one weight matrix shared by the global and
// part projections, standing in for a shared backbone. Outputs are always
// unit-norm.
struct ProjectorModel {
  MatrixF w;  // d_out x d_in
  VectorF b;  // d_out

  int d_in() const { return static_cast<int>(w.cols()); }
  int d_out() const { return static_cast<int>(w.rows()); }

  static ProjectorModel init(int d_in, int d_out, std::uint64_t seed) {
    if (d_in < 1 || d_out < 1) throw ConfigError("ProjectorModel: dimensions must be positive");
    ProjectorModel m;
    m.w.resize(d_out, d_in);
    m.b = VectorF::Zero(d_out);
    Rng rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_in));
    for (int i = 0; i < d_out; ++i)
      for (int j = 0; j < d_in; ++j)
        m.w(i, j) = static_cast<float>((2.0 * rng.u01() - 1.0) * scale);
    return m;
  }
};

// Pre-normalization activations kept around for backprop.
struct ForwardCache {
  MatrixD embeddings;  // unit rows
  VectorD norms;       // ||W x + b|| per row
};

inline ForwardCache forward_cached(const ProjectorModel& model, const MatrixF& raw) {
  if (raw.cols() != model.w.cols())
    throw ConfigError("forward: input width does not match the model");
  const MatrixD z =
      (raw.cast<double>() * model.w.cast<double>().transpose()).rowwise() +
      model.b.cast<double>().transpose();
  ForwardCache cache;
  cache.norms = z.rowwise().norm();
  cache.embeddings.resize(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    if (!(cache.norms(i) > 1e-12))
      throw ZeroVectorError("forward: embedding row " + std::to_string(i) + " collapsed");
    cache.embeddings.row(i) = z.row(i) / cache.norms(i);
  }
  return cache;
}

inline MatrixF forward(const ProjectorModel& model, const MatrixF& raw) {
  return forward_cached(model, raw).embeddings.cast<float>();
}

// Per-iteration classifier over the current pseudo-label space.
struct ClassifierHead {
  MatrixF v;  // num_classes x d_out

  int num_classes() const { return static_cast<int>(v.rows()); }

  static ClassifierHead init(int num_classes, int d_out, std::uint64_t seed) {
    if (num_classes < 1 || d_out < 1) throw ConfigError("ClassifierHead: bad shape");
    ClassifierHead h;
    h.v.resize(num_classes, d_out);
    Rng rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_out));
    for (int i = 0; i < num_classes; ++i)
      for (int j = 0; j < d_out; ++j)
        h.v(i, j) = static_cast<float>((2.0 * rng.u01() - 1.0) * scale);
    return h;
  }
};

// Plain SGD update p <- p - lr * g. A non-finite gradient aborts before any
// element of p is touched.
template <typename Param, typename Grad>
void sgd_step(Param& param, const Grad& grad, double lr) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols())
    throw ConfigError("sgd_step: shape mismatch");
  if (!grad.allFinite()) throw NonFiniteError("sgd_step: non-finite gradient");
  param -= (lr * grad.template cast<double>()).template cast<typename Param::Scalar>();
}

// Checkpoint: a short text header (terminated by a blank line) followed by
// the weights in the same little-endian float32 layout as the embedding
// files: W row-major, then b.
inline void save_checkpoint(const std::string& path, const ProjectorModel& model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << "hsr-checkpoint 1\n";
  os << "d_in " << model.d_in() << "\n";
  os << "d_out " << model.d_out() << "\n";
  os << "\n";
  os.write(reinterpret_cast<const char*>(model.w.data()),
           static_cast<std::streamsize>(sizeof(float) * model.w.size()));
  os.write(reinterpret_cast<const char*>(model.b.data()),
           static_cast<std::streamsize>(sizeof(float) * model.b.size()));
  if (!os) throw IoError("write failed: " + path);
}

inline ProjectorModel load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  std::string line;
  if (!std::getline(is, line) || line != "hsr-checkpoint 1")
    throw IoError("not an hsr checkpoint: " + path);
  int d_in = 0, d_out = 0;
  while (std::getline(is, line) && !line.empty()) {
    if (line.rfind("d_in ", 0) == 0)
      d_in = std::stoi(line.substr(5));
    else if (line.rfind("d_out ", 0) == 0)
      d_out = std::stoi(line.substr(6));
    else
      throw IoError("unknown checkpoint header line: " + line);
  }
  if (d_in < 1 || d_out < 1) throw IoError("incomplete checkpoint header in " + path);
  ProjectorModel m;
  m.w.resize(d_out, d_in);
  m.b.resize(d_out);
  is.read(reinterpret_cast<char*>(m.w.data()),
          static_cast<std::streamsize>(sizeof(float) * m.w.size()));
  is.read(reinterpret_cast<char*>(m.b.data()),
          static_cast<std::streamsize>(sizeof(float) * m.b.size()));
  if (!is) throw IoError("truncated checkpoint: " + path);
  if (!m.w.allFinite() || !m.b.allFinite()) throw NonFiniteError("checkpoint holds non-finite weights");
  return m;
}

}  // namespace hsr
