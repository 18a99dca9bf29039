#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "hsr/common.hpp"
#include "hsr/labels.hpp"

namespace hsr {

// Losses run in double: the finite-difference contracts on their gradients
// are far below float32 resolution.

struct CeLossGrad {
  double loss = 0.0;
  MatrixD d_embeddings;
  MatrixD d_head;
};

// Mean softmax cross-entropy over the batch; labels must be dense class ids.
// logit_scale is the fixed temperature applied to the cosine-like logits of
// unit-norm embeddings; without it the head cannot reach confident logits at
// small learning rates.
inline CeLossGrad ce_loss_and_grad(const MatrixD& head_v, const MatrixD& embeddings,
                                   const std::vector<int>& labels, double logit_scale = 1.0) {
  const int b = static_cast<int>(embeddings.rows());
  const int c = static_cast<int>(head_v.rows());
  if (static_cast<int>(labels.size()) != b) throw ConfigError("ce_loss: label count mismatch");
  for (int l : labels)
    if (l < 0 || l >= c) throw ConfigError("ce_loss: label out of range");

  MatrixD logits = logit_scale * (embeddings * head_v.transpose());  // b x c
  CeLossGrad out;
  MatrixD probs(b, c);
  for (int i = 0; i < b; ++i) {
    const double m = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(i).array() - m).exp();
    const double z = e.sum();
    probs.row(i) = e / z;
    out.loss += m + std::log(z) - logits(i, labels[i]);
  }
  out.loss /= b;

  MatrixD g = probs;  // (softmax - onehot) / b
  for (int i = 0; i < b; ++i) g(i, labels[i]) -= 1.0;
  g *= logit_scale / b;
  out.d_head = g.transpose() * embeddings;
  out.d_embeddings = g * head_v;
  return out;
}

struct TripletLossGrad {
  double loss = 0.0;
  MatrixD d_embeddings;
  int active = 0;  // anchors (or triplets) with a positive hinge
};

namespace detail {

inline MatrixD embedding_distances(const MatrixD& e) {
  const int b = static_cast<int>(e.rows());
  MatrixD d(b, b);
  for (int i = 0; i < b; ++i) {
    d(i, i) = 0.0;
    for (int j = i + 1; j < b; ++j) {
      const double v = (e.row(i) - e.row(j)).norm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

// d||a - b|| contribution: grad wrt a is (a-b)/d, wrt b the negative.
// Zero-distance pairs take the zero subgradient.
inline void add_distance_grad(MatrixD& g, const MatrixD& e, int i, int j, double dist,
                              double coeff) {
  if (dist < 1e-12) return;
  const Eigen::RowVectorXd dir = (e.row(i) - e.row(j)) / dist;
  g.row(i) += coeff * dir;
  g.row(j) -= coeff * dir;
}

}  // namespace detail

// Batch-hard triplet loss: per anchor, the farthest same-label sample and
// the nearest different-label sample; hinge at the margin, averaged over all
// anchors. Hard picks break ties toward the lower index.
inline TripletLossGrad batch_hard_triplet_loss_and_grad(const MatrixD& embeddings,
                                                        const std::vector<int>& labels,
                                                        double margin) {
  const int b = static_cast<int>(embeddings.rows());
  if (static_cast<int>(labels.size()) != b)
    throw ConfigError("triplet loss: label count mismatch");
  bool multi_class = false;
  for (int i = 1; i < b; ++i)
    if (labels[i] != labels[0]) multi_class = true;
  if (!multi_class) throw DegenerateBatchError("triplet loss: batch holds a single class");

  const MatrixD dist = detail::embedding_distances(embeddings);
  TripletLossGrad out;
  out.d_embeddings = MatrixD::Zero(b, embeddings.cols());

  for (int i = 0; i < b; ++i) {
    int hard_pos = -1, hard_neg = -1;
    double d_ap = 0.0;  // no same-label partner leaves the positive term at 0
    double d_an = std::numeric_limits<double>::infinity();
    for (int j = 0; j < b; ++j) {
      if (j == i) continue;
      if (labels[j] == labels[i]) {
        if (dist(i, j) > d_ap) {
          d_ap = dist(i, j);
          hard_pos = j;
        }
      } else if (dist(i, j) < d_an) {
        d_an = dist(i, j);
        hard_neg = j;
      }
    }
    const double hinge = d_ap - d_an + margin;
    if (hinge > 0.0) {
      out.loss += hinge;
      ++out.active;
      if (hard_pos >= 0)
        detail::add_distance_grad(out.d_embeddings, embeddings, i, hard_pos, d_ap, 1.0);
      detail::add_distance_grad(out.d_embeddings, embeddings, i, hard_neg, d_an, -1.0);
    }
  }
  out.loss /= b;
  out.d_embeddings /= b;
  return out;
}

// All-pairs variant: mean hinge over every (anchor, positive, negative)
// combination in the batch.
inline TripletLossGrad all_pairs_triplet_loss_and_grad(const MatrixD& embeddings,
                                                       const std::vector<int>& labels,
                                                       double margin) {
  const int b = static_cast<int>(embeddings.rows());
  if (static_cast<int>(labels.size()) != b)
    throw ConfigError("triplet loss: label count mismatch");
  bool multi_class = false;
  for (int i = 1; i < b; ++i)
    if (labels[i] != labels[0]) multi_class = true;
  if (!multi_class) throw DegenerateBatchError("triplet loss: batch holds a single class");

  const MatrixD dist = detail::embedding_distances(embeddings);
  TripletLossGrad out;
  out.d_embeddings = MatrixD::Zero(b, embeddings.cols());

  long count = 0;
  for (int a = 0; a < b; ++a)
    for (int p = 0; p < b; ++p) {
      if (p == a || labels[p] != labels[a]) continue;
      for (int n = 0; n < b; ++n) {
        if (labels[n] == labels[a]) continue;
        ++count;
        const double hinge = dist(a, p) - dist(a, n) + margin;
        if (hinge > 0.0) {
          out.loss += hinge;
          ++out.active;
          detail::add_distance_grad(out.d_embeddings, embeddings, a, p, dist(a, p), 1.0);
          detail::add_distance_grad(out.d_embeddings, embeddings, a, n, dist(a, n), -1.0);
        }
      }
    }
  if (count > 0) {
    out.loss /= count;
    out.d_embeddings /= static_cast<double>(count);
  }
  return out;
}

struct TripletRef {
  int anchor;
  int positive;
  int negative;
};

// Mean hinge triplet loss over an explicit triplet list (the mined hard
// positive pairs). An empty list is a recorded no-op, not an error.
inline TripletLossGrad icm_triplet_loss_and_grad(const MatrixD& embeddings,
                                                 const std::vector<TripletRef>& triplets,
                                                 double margin) {
  TripletLossGrad out;
  out.d_embeddings = MatrixD::Zero(embeddings.rows(), embeddings.cols());
  if (triplets.empty()) return out;

  for (const TripletRef& t : triplets) {
    const double d_ap = (embeddings.row(t.anchor) - embeddings.row(t.positive)).norm();
    const double d_an = (embeddings.row(t.anchor) - embeddings.row(t.negative)).norm();
    const double hinge = d_ap - d_an + margin;
    if (hinge > 0.0) {
      out.loss += hinge;
      ++out.active;
      detail::add_distance_grad(out.d_embeddings, embeddings, t.anchor, t.positive, d_ap, 1.0);
      detail::add_distance_grad(out.d_embeddings, embeddings, t.anchor, t.negative, d_an, -1.0);
    }
  }
  out.loss /= triplets.size();
  out.d_embeddings /= static_cast<double>(triplets.size());
  return out;
}

}  // namespace hsr
