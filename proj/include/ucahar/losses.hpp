#pragma once

#include "ucahar/batch.hpp"
#include "ucahar/model.hpp"
#include "ucahar/types.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace ucahar {

// Objective weights: L = L_A + gamma1 L_PP + gamma2 L_U + alpha L_d.
// alpha = 0 switches off the contrastive term, gamma2 = 0 the user head.
struct LossWeights {
  double alpha = 0.5;
  double gamma1 = 1.0;
  double gamma2 = 1.0;

  void validate() const {
    require(alpha >= 0.0 && gamma1 >= 0.0 && gamma2 >= 0.0, "loss weights must be nonnegative");
  }
  bool operator==(const LossWeights&) const = default;
};

// Per-label weights for the binary heads, frozen from the training split.
struct ClassWeightTable {
  Vector<double> weights;
};

template <typename Scalar>
struct LossValue {
  Scalar value = 0;
  Matrix<Scalar> gradient;  // same shape as the differentiated input
};

struct LossBreakdown {
  double activity = 0.0;      // L_A
  double context = 0.0;       // L_PP
  double user = 0.0;          // L_U
  double contrastive = 0.0;   // L_d, reported even when alpha = 0
  double total = 0.0;
};

// Inverse-frequency weights. labels is C x N binary. raw_c = mean_freq / freq_c,
// labels never positive get the largest raw weight, then everything is scaled
// to mean 1.
template <typename Derived>
ClassWeightTable class_weights(const Eigen::MatrixBase<Derived>& labels) {
  require(labels.cols() > 0, "class weights need at least one labelled instance");
  const Vector<double> freq =
      labels.template cast<double>().rowwise().sum() / static_cast<double>(labels.cols());
  const double mean_freq = freq.mean();
  Vector<double> raw = Vector<double>::Zero(freq.size());
  double max_raw = 0.0;
  for (Index c = 0; c < freq.size(); ++c) {
    if (freq(c) > 0.0) {
      raw(c) = mean_freq / freq(c);
      max_raw = std::max(max_raw, raw(c));
    }
  }
  if (max_raw == 0.0) return {Vector<double>::Ones(freq.size())};
  for (Index c = 0; c < freq.size(); ++c) {
    if (freq(c) == 0.0) raw(c) = max_raw;
  }
  return {raw / raw.mean()};
}

namespace detail {

template <typename Scalar>
Scalar softplus(Scalar z) {
  return std::max(z, Scalar(0)) + std::log1p(std::exp(-std::abs(z)));
}

template <typename Derived>
bool all_binary(const Eigen::MatrixBase<Derived>& m) {
  using S = typename Derived::Scalar;
  return (m.array() == S(0) || m.array() == S(1)).all();
}

}  // namespace detail

// Sigmoid binary cross-entropy, each entry scaled by its class weight (both
// the positive and the negative term), averaged over all C x B entries.
template <typename Scalar>
LossValue<Scalar> weighted_bce(const Matrix<Scalar>& logits, const Matrix<Scalar>& targets,
                               const Vector<double>& weights) {
  require(logits.rows() == targets.rows() && logits.cols() == targets.cols(),
          "weighted_bce: logits and targets differ in shape");
  require(weights.size() == logits.rows(), "weighted_bce: one weight per class required");
  require(detail::all_binary(targets), "weighted_bce: targets must be binary");
  const Index classes = logits.rows();
  const Index batch = logits.cols();
  const Scalar scale = Scalar(1) / static_cast<Scalar>(classes * batch);

  LossValue<Scalar> out;
  out.gradient.resize(classes, batch);
  Scalar total = 0;
  for (Index j = 0; j < batch; ++j) {
    for (Index c = 0; c < classes; ++c) {
      const Scalar z = logits(c, j);
      const Scalar y = targets(c, j);
      const auto w = static_cast<Scalar>(weights(c));
      total += w * (y * detail::softplus(-z) + (Scalar(1) - y) * detail::softplus(z));
      const Scalar p = Scalar(1) / (Scalar(1) + std::exp(-z));
      out.gradient(c, j) = w * (p - y) * scale;
    }
  }
  out.value = total * scale;
  return out;
}

// Softmax cross-entropy against one-hot columns, averaged over the batch.
template <typename Scalar>
LossValue<Scalar> cross_entropy(const Matrix<Scalar>& logits, const Matrix<Scalar>& targets) {
  require(logits.rows() == targets.rows() && logits.cols() == targets.cols(),
          "cross_entropy: logits and targets differ in shape");
  require(detail::all_binary(targets) &&
              (targets.colwise().sum().array() == Scalar(1)).all(),
          "cross_entropy: targets must be one-hot");
  const Index batch = logits.cols();
  LossValue<Scalar> out;
  out.gradient.resize(logits.rows(), batch);
  Scalar total = 0;
  for (Index j = 0; j < batch; ++j) {
    const Scalar peak = logits.col(j).maxCoeff();
    const Vector<Scalar> shifted = logits.col(j).array() - peak;
    const Vector<Scalar> e = shifted.array().exp();
    const Scalar sum = e.sum();
    Index target = 0;
    targets.col(j).maxCoeff(&target);
    total += std::log(sum) - shifted(target);
    out.gradient.col(j) = e / sum - targets.col(j);
  }
  out.gradient /= static_cast<Scalar>(batch);
  out.value = total / static_cast<Scalar>(batch);
  return out;
}

// Batch indices (anchor excluded) sharing / not sharing an active pairing label
// with the anchor.
struct PairPartition {
  std::vector<Index> positive;
  std::vector<Index> negative;
};

template <typename Scalar>
PairPartition partition_pairs(Index anchor, const Matrix<Scalar>& pairing) {
  const Index batch = pairing.cols();
  if (batch < 2) throw DegenerateBatch("pair partition needs a batch of at least 2");
  require(anchor >= 0 && anchor < batch, "anchor index out of range");
  PairPartition part;
  for (Index j = 0; j < batch; ++j) {
    if (j == anchor) continue;
    if (pairing.col(j).dot(pairing.col(anchor)) > Scalar(0)) {
      part.positive.push_back(j);
    } else {
      part.negative.push_back(j);
    }
  }
  return part;
}

template <typename Scalar>
struct PairMeans {
  Vector<Scalar> positive;   // zero when has_positive is false
  Vector<Scalar> negative;   // zero vector for an empty negative set
  bool has_positive = false;
};

template <typename Scalar>
PairMeans<Scalar> pair_means(const Matrix<Scalar>& fused, const PairPartition& part) {
  PairMeans<Scalar> out;
  out.positive = Vector<Scalar>::Zero(fused.rows());
  out.negative = Vector<Scalar>::Zero(fused.rows());
  for (Index j : part.positive) out.positive += fused.col(j);
  for (Index j : part.negative) out.negative += fused.col(j);
  out.has_positive = !part.positive.empty();
  if (out.has_positive) out.positive /= static_cast<Scalar>(part.positive.size());
  if (!part.negative.empty()) out.negative /= static_cast<Scalar>(part.negative.size());
  return out;
}

// Cosine similarity, defined as 0 when either side is the zero vector.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedA>& u,
                                            const Eigen::MatrixBase<DerivedB>& v) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar nu = u.norm();
  const Scalar nv = v.norm();
  if (nu == Scalar(0) || nv == Scalar(0)) return Scalar(0);
  return u.dot(v) / (nu * nv);
}

// Largest value a single anchor term can take: cosines lie in [-1, 1].
inline const double kMaxContrastiveTerm = std::log1p(std::exp(2.0));

// Instance-pair supervised contrastive loss over fused representations
// (F x B) with pairing labels (P x B). For every anchor with at least one
// positive: term = log(1 + exp(sim(x, mean_neg) - sim(x, mean_pos))), i.e. a
// two-logit softmax cross-entropy targeting the positive side. The sum is
// divided by the full batch size. Evaluated with batch-level matrix products.
template <typename Scalar>
LossValue<Scalar> contrastive_loss(const Matrix<Scalar>& fused, const Matrix<Scalar>& pairing,
                                   std::vector<Scalar>* anchor_terms = nullptr) {
  const Index batch = fused.cols();
  if (batch < 2) throw DegenerateBatch("contrastive loss needs a batch of at least 2");
  require(pairing.cols() == batch, "contrastive_loss: label and representation batches differ");

  const Matrix<Scalar> shared = pairing.transpose() * pairing;
  Matrix<Scalar> pos = (shared.array() > Scalar(0)).template cast<Scalar>().matrix();
  Matrix<Scalar> neg = (shared.array() <= Scalar(0)).template cast<Scalar>().matrix();
  pos.diagonal().setZero();
  neg.diagonal().setZero();
  const Vector<Scalar> pos_count = pos.rowwise().sum();
  const Vector<Scalar> neg_count = neg.rowwise().sum();
  const Vector<Scalar> pos_inv = (pos_count.array() > 0).select(pos_count.array().inverse(), 0).matrix();
  const Vector<Scalar> neg_inv = (neg_count.array() > 0).select(neg_count.array().inverse(), 0).matrix();

  // Column a of mean_pos is the mean of the anchor's positives.
  const Matrix<Scalar> mean_pos = (fused * pos.transpose()) * pos_inv.asDiagonal();
  const Matrix<Scalar> mean_neg = (fused * neg.transpose()) * neg_inv.asDiagonal();

  const RowVector<Scalar> norm_x = fused.colwise().norm();
  const RowVector<Scalar> norm_p = mean_pos.colwise().norm();
  const RowVector<Scalar> norm_n = mean_neg.colwise().norm();
  const RowVector<Scalar> dot_p = (fused.array() * mean_pos.array()).colwise().sum();
  const RowVector<Scalar> dot_n = (fused.array() * mean_neg.array()).colwise().sum();

  auto cos = [](const RowVector<Scalar>& dot, const RowVector<Scalar>& na,
                const RowVector<Scalar>& nb) {
    const RowVector<Scalar> denom = (na.array() * nb.array()).matrix();
    return RowVector<Scalar>((denom.array() > 0).select(dot.array() / denom.array(), 0));
  };
  const RowVector<Scalar> sim_p = cos(dot_p, norm_x, norm_p);
  const RowVector<Scalar> sim_n = cos(dot_n, norm_x, norm_n);
  const RowVector<Scalar> active = (pos_count.transpose().array() > 0).template cast<Scalar>();

  const RowVector<Scalar> margin = sim_n - sim_p;
  RowVector<Scalar> terms(batch);
  RowVector<Scalar> weight(batch);  // d term / d sim_n; d term / d sim_p = -weight
  for (Index a = 0; a < batch; ++a) {
    terms(a) = active(a) * detail::softplus(margin(a));
    weight(a) = active(a) / (Scalar(1) + std::exp(-margin(a))) / static_cast<Scalar>(batch);
  }
  if (anchor_terms) anchor_terms->assign(terms.data(), terms.data() + batch);

  LossValue<Scalar> out;
  out.value = terms.sum() / static_cast<Scalar>(batch);

  // d cos(u, v) / d u = v / (|u||v|) - cos * u / |u|^2 (zero when undefined).
  auto cos_grad = [](const Matrix<Scalar>& u, const Matrix<Scalar>& v, const RowVector<Scalar>& nu,
                     const RowVector<Scalar>& nv, const RowVector<Scalar>& sim,
                     const RowVector<Scalar>& coef) {
    Matrix<Scalar> g = Matrix<Scalar>::Zero(u.rows(), u.cols());
    for (Index a = 0; a < u.cols(); ++a) {
      if (nu(a) == 0 || nv(a) == 0 || coef(a) == 0) continue;
      g.col(a) = coef(a) * (v.col(a) / (nu(a) * nv(a)) - sim(a) * u.col(a) / (nu(a) * nu(a)));
    }
    return g;
  };
  const RowVector<Scalar> minus_weight = -weight;
  Matrix<Scalar> grad = cos_grad(fused, mean_pos, norm_x, norm_p, sim_p, minus_weight) +
                        cos_grad(fused, mean_neg, norm_x, norm_n, sim_n, weight);
  const Matrix<Scalar> d_mean_pos = cos_grad(mean_pos, fused, norm_p, norm_x, sim_p, minus_weight);
  const Matrix<Scalar> d_mean_neg = cos_grad(mean_neg, fused, norm_n, norm_x, sim_n, weight);
  grad.noalias() += (d_mean_pos * pos_inv.asDiagonal()) * pos;
  grad.noalias() += (d_mean_neg * neg_inv.asDiagonal()) * neg;
  out.gradient = std::move(grad);
  return out;
}

template <typename Scalar>
struct ObjectiveResult {
  LossBreakdown breakdown;
  HeadLogits<Scalar> logit_grad;
  Matrix<Scalar> fused_grad;
};

// Full objective for one batch and its gradients with respect to logits and
// the fused representation. The contrastive value is always computed when
// the batch has at least two instances so ablations can still log it; its
// gradient only enters when alpha > 0.
template <typename Scalar>
ObjectiveResult<Scalar> total_loss(const HeadLogits<Scalar>& logits, const Matrix<Scalar>& fused,
                                   const LabelBatch<Scalar>& labels, const LossWeights& weights,
                                   const ClassWeightTable& activity_weights,
                                   const ClassWeightTable& context_weights) {
  weights.validate();
  const Index batch = fused.cols();
  require(logits.activity.cols() == batch && logits.context.cols() == batch &&
              logits.user.cols() == batch && labels.activity.cols() == batch,
          "total_loss: inconsistent batch sizes");

  ObjectiveResult<Scalar> out;
  const auto act = weighted_bce(logits.activity, labels.activity, activity_weights.weights);
  const auto ctx = weighted_bce(logits.context, labels.context, context_weights.weights);
  const auto usr = cross_entropy(logits.user, labels.user);

  const auto g1 = static_cast<Scalar>(weights.gamma1);
  const auto g2 = static_cast<Scalar>(weights.gamma2);
  const auto alpha = static_cast<Scalar>(weights.alpha);

  auto& b = out.breakdown;
  b.activity = static_cast<double>(act.value);
  b.context = static_cast<double>(ctx.value);
  b.user = static_cast<double>(usr.value);
  out.logit_grad.activity = act.gradient;
  out.logit_grad.context = g1 * ctx.gradient;
  out.logit_grad.user = g2 * usr.gradient;

  if (batch >= 2) {
    auto con = contrastive_loss(fused, labels.pairing);
    b.contrastive = static_cast<double>(con.value);
    if (weights.alpha > 0.0) out.fused_grad = alpha * con.gradient;
  } else if (weights.alpha > 0.0) {
    throw DegenerateBatch("contrastive loss needs a batch of at least 2");
  }
  b.total = b.activity + weights.gamma1 * b.context + weights.gamma2 * b.user +
            weights.alpha * b.contrastive;
  return out;
}

}  // namespace ucahar
