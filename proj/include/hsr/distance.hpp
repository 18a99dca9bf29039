#pragma once

#include <cmath>

#include "hsr/common.hpp"

namespace hsr {

// Row-wise L2 normalization. Rows of norm <= 1e-12 are rejected: a direction
// cannot be recovered from them and every downstream radius/margin assumes
// unit scale.
inline MatrixF l2_normalize(const MatrixF& features) {
  MatrixF out(features.rows(), features.cols());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const double norm = features.row(i).cast<double>().norm();
    if (!(norm > 1e-12))
      throw ZeroVectorError("l2_normalize: row " + std::to_string(i) + " has near-zero norm");
    out.row(i) = (features.row(i).cast<double>() / norm).cast<float>();
  }
  return out;
}

// values(i, j) = -||x_i - x_j||_2. The diagonal is exactly zero, which is the
// row-wise maximum since every other entry is negative.
struct SimilarityMatrix {
  MatrixF values;

  int n() const { return static_cast<int>(values.rows()); }
};

// Full pairwise Euclidean distance matrix in double. Uses one Gram product
// for the heavy lifting and mirrors the upper triangle so the result is
// exactly symmetric.
inline MatrixD pairwise_distances(const MatrixF& features) {
  if (features.rows() < 1) throw TooFewSamplesError("pairwise_distances: empty input");
  if (!all_finite(features)) throw NonFiniteError("pairwise_distances: non-finite input");
  const Eigen::Index n = features.rows();
  const MatrixD x = features.cast<double>();
  const VectorD sq_norms = x.rowwise().squaredNorm();
  MatrixD gram = x * x.transpose();
  MatrixD dist(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    dist(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double sq = std::max(0.0, sq_norms(i) + sq_norms(j) - 2.0 * gram(i, j));
      const double d = std::sqrt(sq);
      dist(i, j) = d;
      dist(j, i) = d;
    }
  }
  return dist;
}

inline SimilarityMatrix similarity_from_distances(const MatrixD& dist) {
  SimilarityMatrix sim;
  sim.values = (-dist).cast<float>();
  return sim;
}

inline SimilarityMatrix pairwise_similarity(const MatrixF& features) {
  return similarity_from_distances(pairwise_distances(features));
}

}  // namespace hsr
