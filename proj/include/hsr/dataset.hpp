#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hsr/common.hpp"

namespace hsr {

// Raw per-sample feature vectors plus camera metadata. raw_global is always
// the column-wise concatenation of the part blocks, bit-exactly; ground-truth
// identities are carried only for evaluation and synthetic diagnostics, never
// for training.
struct EmbeddingSet {
  MatrixF raw_global;              // N x D_raw
  std::vector<MatrixF> raw_parts;  // P blocks, each N x D_part
  std::vector<int> cameras;        // length N
  std::optional<std::vector<int>> gt_ids;

  int n() const { return static_cast<int>(raw_global.rows()); }
  int d_raw() const { return static_cast<int>(raw_global.cols()); }
  int num_parts() const { return static_cast<int>(raw_parts.size()); }
  int d_part() const { return raw_parts.empty() ? 0 : static_cast<int>(raw_parts[0].cols()); }

  int num_cameras() const {
    int m = 0;
    for (int c : cameras) m = std::max(m, c + 1);
    return m;
  }

  void validate() const {
    if (n() < 1) throw ConfigError("EmbeddingSet: empty dataset");
    if (!all_finite(raw_global)) throw NonFiniteError("EmbeddingSet: non-finite global feature");
    if (raw_parts.empty()) throw ConfigError("EmbeddingSet: no part blocks");
    const int dp = d_part();
    if (dp * num_parts() != d_raw())
      throw ConfigError("EmbeddingSet: part widths do not add up to the global width");
    if (static_cast<int>(cameras.size()) != n())
      throw ConfigError("EmbeddingSet: camera list length mismatch");
    for (int c : cameras)
      if (c < 0) throw ConfigError("EmbeddingSet: negative camera id");
    if (gt_ids && static_cast<int>(gt_ids->size()) != n())
      throw ConfigError("EmbeddingSet: gt id list length mismatch");
    for (const auto& part : raw_parts) {
      if (part.rows() != raw_global.rows() || part.cols() != dp)
        throw ConfigError("EmbeddingSet: part block shape mismatch");
      if (!all_finite(part)) throw NonFiniteError("EmbeddingSet: non-finite part feature");
    }
    // Concatenation must reproduce the global block bit-exactly.
    for (int p = 0; p < num_parts(); ++p) {
      for (int i = 0; i < n(); ++i) {
        if (std::memcmp(raw_global.row(i).data() + p * dp, raw_parts[p].row(i).data(),
                        sizeof(float) * dp) != 0)
          throw ConfigError("EmbeddingSet: global features are not the concatenation of parts");
      }
    }
  }
};

namespace detail {

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("unexpected end of file");
  return v;
}

inline void write_matrix(std::ostream& os, const MatrixF& m) {
  os.write(reinterpret_cast<const char*>(m.data()),
           static_cast<std::streamsize>(sizeof(float) * m.size()));
}

inline void read_matrix(std::istream& is, MatrixF& m) {
  is.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(float) * m.size()));
  if (!is) throw IoError("unexpected end of file while reading matrix block");
}

}  // namespace detail

// Binary embedding file: magic "HSRE", u32 version=1, u64 N, u32 D_raw,
// u32 P, N x D_raw float32 global features row-major, then P blocks of
// N x D_part float32. Little-endian throughout.
inline void save_embeddings(const std::string& path, const EmbeddingSet& set) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write("HSRE", 4);
  detail::write_pod<std::uint32_t>(os, 1u);
  detail::write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(set.raw_global.rows()));
  detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(set.raw_global.cols()));
  detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(set.raw_parts.size()));
  detail::write_matrix(os, set.raw_global);
  for (const auto& part : set.raw_parts) detail::write_matrix(os, part);
  if (!os) throw IoError("write failed: " + path);
}

// Reads the feature blocks only; cameras/gt arrive via the metadata CSV.
inline EmbeddingSet load_embeddings(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "HSRE", 4) != 0)
    throw IoError("not an HSRE embedding file: " + path);
  const auto version = detail::read_pod<std::uint32_t>(is);
  if (version != 1) throw IoError("unsupported HSRE version in " + path);
  const auto n = detail::read_pod<std::uint64_t>(is);
  const auto d_raw = detail::read_pod<std::uint32_t>(is);
  const auto p = detail::read_pod<std::uint32_t>(is);
  if (n == 0 || d_raw == 0 || p == 0 || d_raw % p != 0)
    throw IoError("malformed HSRE header in " + path);
  EmbeddingSet set;
  set.raw_global.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d_raw));
  detail::read_matrix(is, set.raw_global);
  const std::uint32_t d_part = d_raw / p;
  set.raw_parts.resize(p);
  for (auto& part : set.raw_parts) {
    part.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d_part));
    detail::read_matrix(is, part);
  }
  set.cameras.assign(n, 0);
  return set;
}

// Metadata CSV with header `index,camera,gt_id`; the gt_id column may be
// empty. Rows must be 0..N-1 in order.
inline void save_metadata(const std::string& path, const EmbeddingSet& set) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << "index,camera,gt_id\n";
  for (int i = 0; i < set.n(); ++i) {
    os << i << ',' << set.cameras[i] << ',';
    if (set.gt_ids) os << (*set.gt_ids)[i];
    os << '\n';
  }
}

inline void load_metadata(const std::string& path, EmbeddingSet& set) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  std::string line;
  if (!std::getline(is, line) || line != "index,camera,gt_id")
    throw IoError("bad metadata header in " + path);
  std::vector<int> cameras;
  std::vector<int> gt;
  bool any_gt = false;
  int expect = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string idx_s, cam_s, gt_s;
    if (!std::getline(ss, idx_s, ',') || !std::getline(ss, cam_s, ','))
      throw IoError("malformed metadata row: " + line);
    std::getline(ss, gt_s);
    if (std::stoi(idx_s) != expect++)
      throw IoError("metadata rows out of order in " + path);
    cameras.push_back(std::stoi(cam_s));
    if (!gt_s.empty()) {
      any_gt = true;
      gt.push_back(std::stoi(gt_s));
    } else {
      gt.push_back(-1);
    }
  }
  if (expect != set.n())
    throw IoError("metadata sample count does not match the embedding file");
  set.cameras = std::move(cameras);
  if (any_gt)
    set.gt_ids = std::move(gt);
  else
    set.gt_ids.reset();
}

inline EmbeddingSet load_dataset(const std::string& embeddings_path, const std::string& meta_path) {
  EmbeddingSet set = load_embeddings(embeddings_path);
  load_metadata(meta_path, set);
  set.validate();
  return set;
}

}  // namespace hsr
