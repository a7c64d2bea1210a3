#pragma once

#include "ucahar/types.hpp"

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace ucahar {

// Shape of the network. The recurrent encoder always has two stacked layers;
// use_sequence_encoder = false removes it and the heads read the handcrafted
// features alone.
struct ModelConfig {
  static constexpr Index num_layers = 2;

  Index channels = 3;
  Index snapshots = 50;
  Index hidden_size = 64;
  Index encoding_dim = 64;
  Index feature_dim = 0;
  Index num_activities = 0;
  Index num_contexts = 0;
  Index num_users = 0;
  bool use_sequence_encoder = true;
  std::uint64_t seed = 0;

  Index fused_dim() const { return (use_sequence_encoder ? encoding_dim : 0) + feature_dim; }

  void validate() const {
    require(channels > 0 && snapshots > 0, "model input shape must be positive");
    require(hidden_size > 0 && encoding_dim > 0, "hidden and encoding sizes must be positive");
    require(feature_dim > 0, "feature dimension must be positive");
    require(num_activities > 0 && num_contexts > 0 && num_users > 0,
            "head output sizes must be positive");
  }

  bool operator==(const ModelConfig&) const = default;
};

enum class Block : int {
  Layer0Input,
  Layer0Recurrent,
  Layer0Bias,
  Layer1Input,
  Layer1Recurrent,
  Layer1Bias,
  ProjectionWeight,
  ProjectionBias,
  ActivityWeight,
  ActivityBias,
  ContextWeight,
  ContextBias,
  UserWeight,
  UserBias,
};
inline constexpr int kBlockCount = 14;

// Offsets of every weight array inside the flat parameter vector.
struct ParamLayout {
  struct Shape {
    Index rows = 0;
    Index cols = 0;
    Index offset = 0;
    Index size() const { return rows * cols; }
  };

  std::array<Shape, kBlockCount> blocks{};
  Index total = 0;

  ParamLayout() = default;
  explicit ParamLayout(const ModelConfig& config) {
    const Index h = config.hidden_size;
    const Index gates = 4 * h;
    const Index fused = config.fused_dim();
    auto set = [&](Block b, Index rows, Index cols) {
      blocks[static_cast<int>(b)] = {rows, cols, total};
      total += rows * cols;
    };
    const Index enc = config.use_sequence_encoder ? 1 : 0;
    set(Block::Layer0Input, enc * gates, config.channels);
    set(Block::Layer0Recurrent, enc * gates, h);
    set(Block::Layer0Bias, enc * gates, 1);
    set(Block::Layer1Input, enc * gates, h);
    set(Block::Layer1Recurrent, enc * gates, h);
    set(Block::Layer1Bias, enc * gates, 1);
    set(Block::ProjectionWeight, enc * config.encoding_dim, h);
    set(Block::ProjectionBias, enc * config.encoding_dim, 1);
    set(Block::ActivityWeight, config.num_activities, fused);
    set(Block::ActivityBias, config.num_activities, 1);
    set(Block::ContextWeight, config.num_contexts, fused);
    set(Block::ContextBias, config.num_contexts, 1);
    set(Block::UserWeight, config.num_users, fused);
    set(Block::UserBias, config.num_users, 1);
  }

  const Shape& operator[](Block b) const { return blocks[static_cast<int>(b)]; }

  // Parameters belonging to the recurrent encoder and its projection.
  Index encoder_size() const {
    Index n = 0;
    for (int b = 0; b <= static_cast<int>(Block::ProjectionBias); ++b) n += blocks[b].size();
    return n;
  }
};

template <typename Scalar>
Eigen::Map<Matrix<Scalar>> block_view(Vector<Scalar>& flat, const ParamLayout& layout, Block b) {
  const auto& s = layout[b];
  return {flat.data() + s.offset, s.rows, s.cols};
}

template <typename Scalar>
Eigen::Map<const Matrix<Scalar>> block_view(const Vector<Scalar>& flat, const ParamLayout& layout,
                                            Block b) {
  const auto& s = layout[b];
  return {flat.data() + s.offset, s.rows, s.cols};
}

// All trainable weights in one flat vector; block() gives matrix views.
template <typename Scalar>
class ModelParams {
 public:
  ModelParams() = default;

  explicit ModelParams(const ModelConfig& config)
      : config_(config), layout_(config), values_(Vector<Scalar>::Zero(layout_.total)) {
    config_.validate();
  }

  // Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per block, seeded from config.seed.
  static ModelParams initialized(const ModelConfig& config) {
    ModelParams params(config);
    std::mt19937_64 rng(config.seed);
    for (int b = 0; b < kBlockCount; ++b) {
      const auto block = static_cast<Block>(b);
      const auto& shape = params.layout_[block];
      if (shape.size() == 0) continue;
      Index fan_in = config.hidden_size;
      if (block >= Block::ActivityWeight) fan_in = config.fused_dim();
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (Index i = 0; i < shape.size(); ++i) {
        params.values_(shape.offset + i) = static_cast<Scalar>(dist(rng));
      }
    }
    return params;
  }

  const ModelConfig& config() const { return config_; }
  const ParamLayout& layout() const { return layout_; }
  Vector<Scalar>& values() { return values_; }
  const Vector<Scalar>& values() const { return values_; }
  Index size() const { return values_.size(); }

  Eigen::Map<Matrix<Scalar>> block(Block b) { return block_view(values_, layout_, b); }
  Eigen::Map<const Matrix<Scalar>> block(Block b) const { return block_view(values_, layout_, b); }

  Index encoder_parameter_count() const { return layout_.encoder_size(); }
  bool all_finite() const { return values_.allFinite(); }

  template <typename Other>
  ModelParams<Other> cast() const {
    ModelParams<Other> out(config_);
    out.values() = values_.template cast<Other>();
    return out;
  }

 private:
  ModelConfig config_;
  ParamLayout layout_;
  Vector<Scalar> values_;
};

// Model input for a batch: one channels x B matrix per time step plus the
// handcrafted features as D x B. Instances are columns throughout.
template <typename Scalar>
struct SequenceBatch {
  std::vector<Matrix<Scalar>> steps;
  Matrix<Scalar> features;

  Index batch_size() const { return features.cols(); }
};

template <typename Scalar>
struct HeadLogits {
  Matrix<Scalar> activity;
  Matrix<Scalar> context;
  Matrix<Scalar> user;
};

template <typename Scalar>
struct LayerTrace {
  std::vector<Matrix<Scalar>> gates;   // activated i, f, g, o stacked (4H x B)
  std::vector<Matrix<Scalar>> cell;
  std::vector<Matrix<Scalar>> hidden;
};

// Intermediate values kept for the backward pass.
template <typename Scalar>
struct ForwardTrace {
  std::array<LayerTrace<Scalar>, ModelConfig::num_layers> layers;
};

template <typename Scalar>
struct ForwardOutput {
  Matrix<Scalar> fused;  // X_r, (d_t + D) x B
  HeadLogits<Scalar> logits;
};

namespace detail {

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  return (Scalar(1) + (-z).exp()).inverse();
}

template <typename Scalar>
void lstm_layer_forward(const Eigen::Map<const Matrix<Scalar>>& w_in,
                        const Eigen::Map<const Matrix<Scalar>>& w_rec,
                        const Eigen::Map<const Matrix<Scalar>>& bias,
                        const std::vector<Matrix<Scalar>>& inputs, LayerTrace<Scalar>& trace) {
  const Index h = w_rec.cols();
  const Index batch = inputs.front().cols();
  const auto steps = inputs.size();
  trace.gates.resize(steps);
  trace.cell.resize(steps);
  trace.hidden.resize(steps);

  Matrix<Scalar> h_prev = Matrix<Scalar>::Zero(h, batch);
  Matrix<Scalar> c_prev = Matrix<Scalar>::Zero(h, batch);
  Matrix<Scalar> z(4 * h, batch);
  for (size_t t = 0; t < steps; ++t) {
    z.noalias() = w_in * inputs[t];
    z.noalias() += w_rec * h_prev;
    z.colwise() += bias.col(0);

    auto& gates = trace.gates[t];
    gates.resize(4 * h, batch);
    gates.topRows(2 * h) = sigmoid(z.topRows(2 * h).array()).matrix();
    gates.middleRows(2 * h, h) = z.middleRows(2 * h, h).array().tanh().matrix();
    gates.bottomRows(h) = sigmoid(z.bottomRows(h).array()).matrix();

    const auto i = gates.topRows(h).array();
    const auto f = gates.middleRows(h, h).array();
    const auto g = gates.middleRows(2 * h, h).array();
    const auto o = gates.bottomRows(h).array();
    trace.cell[t] = (f * c_prev.array() + i * g).matrix();
    trace.hidden[t] = (o * trace.cell[t].array().tanh()).matrix();
    h_prev = trace.hidden[t];
    c_prev = trace.cell[t];
  }
}

// Backpropagation through time for one layer. hidden_grad[t] is the external
// gradient arriving at h_t (empty matrices mean zero). Returns gradients with
// respect to the layer inputs when want_input_grad is set.
template <typename Scalar>
std::vector<Matrix<Scalar>> lstm_layer_backward(
    const Eigen::Map<const Matrix<Scalar>>& w_in, const Eigen::Map<const Matrix<Scalar>>& w_rec,
    const std::vector<Matrix<Scalar>>& inputs, const LayerTrace<Scalar>& trace,
    const std::vector<Matrix<Scalar>>& hidden_grad, Eigen::Map<Matrix<Scalar>> d_in,
    Eigen::Map<Matrix<Scalar>> d_rec, Eigen::Map<Matrix<Scalar>> d_bias, bool want_input_grad) {
  const Index h = w_rec.cols();
  const Index batch = inputs.front().cols();
  const auto steps = inputs.size();

  std::vector<Matrix<Scalar>> input_grad;
  if (want_input_grad) input_grad.resize(steps);

  Matrix<Scalar> dh_next = Matrix<Scalar>::Zero(h, batch);
  Matrix<Scalar> dc_next = Matrix<Scalar>::Zero(h, batch);
  Matrix<Scalar> dz(4 * h, batch);
  for (size_t step = steps; step-- > 0;) {
    const auto& gates = trace.gates[step];
    const auto i = gates.topRows(h).array();
    const auto f = gates.middleRows(h, h).array();
    const auto g = gates.middleRows(2 * h, h).array();
    const auto o = gates.bottomRows(h).array();

    Matrix<Scalar> dh = dh_next;
    if (hidden_grad[step].size() > 0) dh += hidden_grad[step];
    const Matrix<Scalar> tanh_c = trace.cell[step].array().tanh().matrix();
    const Matrix<Scalar> dc =
        (dh.array() * o * (Scalar(1) - tanh_c.array().square()) + dc_next.array()).matrix();
    const Matrix<Scalar> c_prev =
        step > 0 ? trace.cell[step - 1] : Matrix<Scalar>::Zero(h, batch).eval();
    const Matrix<Scalar> h_prev =
        step > 0 ? trace.hidden[step - 1] : Matrix<Scalar>::Zero(h, batch).eval();

    dz.topRows(h) = (dc.array() * g * i * (Scalar(1) - i)).matrix();
    dz.middleRows(h, h) = (dc.array() * c_prev.array() * f * (Scalar(1) - f)).matrix();
    dz.middleRows(2 * h, h) = (dc.array() * i * (Scalar(1) - g.square())).matrix();
    dz.bottomRows(h) = (dh.array() * tanh_c.array() * o * (Scalar(1) - o)).matrix();

    d_in.noalias() += dz * inputs[step].transpose();
    d_rec.noalias() += dz * h_prev.transpose();
    d_bias.col(0) += dz.rowwise().sum();

    if (want_input_grad) input_grad[step].noalias() = w_in.transpose() * dz;
    dh_next.noalias() = w_rec.transpose() * dz;
    dc_next = (dc.array() * f).matrix();
  }
  return input_grad;
}

}  // namespace detail

// Two stacked LSTM layers over the steps; the top layer's final hidden state
// is projected to encoding_dim. Returns encoding_dim x B.
template <typename Scalar>
Matrix<Scalar> encode_sequence(const ModelParams<Scalar>& params,
                               const std::vector<Matrix<Scalar>>& steps,
                               ForwardTrace<Scalar>* trace = nullptr) {
  const auto& config = params.config();
  require(config.use_sequence_encoder, "model has no sequence encoder");
  require(!steps.empty(), "sequence batch is empty");
  require(static_cast<Index>(steps.size()) == config.snapshots,
          "sequence length does not match the model");
  const Index batch = steps.front().cols();
  require(batch > 0, "sequence batch is empty");
  for (const auto& s : steps) {
    require(s.rows() == config.channels && s.cols() == batch, "sequence step has the wrong shape");
  }

  ForwardTrace<Scalar> local;
  ForwardTrace<Scalar>& tr = trace ? *trace : local;
  detail::lstm_layer_forward<Scalar>(params.block(Block::Layer0Input),
                                     params.block(Block::Layer0Recurrent),
                                     params.block(Block::Layer0Bias), steps, tr.layers[0]);
  detail::lstm_layer_forward<Scalar>(params.block(Block::Layer1Input),
                                     params.block(Block::Layer1Recurrent),
                                     params.block(Block::Layer1Bias), tr.layers[0].hidden,
                                     tr.layers[1]);
  Matrix<Scalar> encoded = params.block(Block::ProjectionWeight) * tr.layers[1].hidden.back();
  encoded.colwise() += params.block(Block::ProjectionBias).col(0);
  return encoded;
}

// Feature concatenation [encoded ; features] per column.
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> fuse(const Eigen::MatrixBase<DerivedA>& encoded,
                                       const Eigen::MatrixBase<DerivedB>& features) {
  require(encoded.cols() == features.cols(), "fuse: batch sizes differ");
  Matrix<typename DerivedA::Scalar> out(encoded.rows() + features.rows(), encoded.cols());
  out << encoded, features;
  return out;
}

template <typename Scalar>
HeadLogits<Scalar> predict_heads(const ModelParams<Scalar>& params, const Matrix<Scalar>& fused) {
  require(fused.rows() == params.config().fused_dim(), "fused representation has the wrong size");
  auto head = [&](Block w, Block b) {
    Matrix<Scalar> out = params.block(w) * fused;
    out.colwise() += params.block(b).col(0);
    return out;
  };
  return {head(Block::ActivityWeight, Block::ActivityBias),
          head(Block::ContextWeight, Block::ContextBias), head(Block::UserWeight, Block::UserBias)};
}

template <typename Scalar>
ForwardOutput<Scalar> forward(const ModelParams<Scalar>& params, const SequenceBatch<Scalar>& batch,
                              ForwardTrace<Scalar>* trace = nullptr) {
  const auto& config = params.config();
  require(batch.features.rows() == config.feature_dim, "feature dimension does not match the model");
  require(batch.batch_size() > 0, "empty batch");
  ForwardOutput<Scalar> out;
  if (config.use_sequence_encoder) {
    out.fused = fuse(encode_sequence(params, batch.steps, trace), batch.features);
  } else {
    out.fused = batch.features;
  }
  out.logits = predict_heads(params, out.fused);
  return out;
}

// Gradient of a scalar objective with respect to every parameter, given the
// objective's gradients with respect to the head logits and to the fused
// representation (either may be empty for zero). The trace must come from
// forward() on the same parameters and batch.
template <typename Scalar>
Vector<Scalar> backward(const ModelParams<Scalar>& params, const SequenceBatch<Scalar>& batch,
                        const ForwardOutput<Scalar>& output, const ForwardTrace<Scalar>& trace,
                        const HeadLogits<Scalar>& logit_grad, const Matrix<Scalar>& fused_grad) {
  const auto& config = params.config();
  const auto& layout = params.layout();
  const Index batch_size = batch.batch_size();
  Vector<Scalar> grad = Vector<Scalar>::Zero(params.size());

  Matrix<Scalar> d_fused = fused_grad.size() > 0
                               ? fused_grad
                               : Matrix<Scalar>::Zero(config.fused_dim(), batch_size).eval();
  auto head = [&](const Matrix<Scalar>& d_logits, Block w, Block b) {
    if (d_logits.size() == 0) return;
    block_view(grad, layout, w).noalias() += d_logits * output.fused.transpose();
    block_view(grad, layout, b).col(0) += d_logits.rowwise().sum();
    d_fused.noalias() += params.block(w).transpose() * d_logits;
  };
  head(logit_grad.activity, Block::ActivityWeight, Block::ActivityBias);
  head(logit_grad.context, Block::ContextWeight, Block::ContextBias);
  head(logit_grad.user, Block::UserWeight, Block::UserBias);

  if (!config.use_sequence_encoder) return grad;

  const Matrix<Scalar> d_encoded = d_fused.topRows(config.encoding_dim);
  const auto& top = trace.layers[1];
  block_view(grad, layout, Block::ProjectionWeight).noalias() +=
      d_encoded * top.hidden.back().transpose();
  block_view(grad, layout, Block::ProjectionBias).col(0) += d_encoded.rowwise().sum();

  std::vector<Matrix<Scalar>> top_grad(top.hidden.size());
  top_grad.back() = params.block(Block::ProjectionWeight).transpose() * d_encoded;
  auto below_grad = detail::lstm_layer_backward<Scalar>(
      params.block(Block::Layer1Input), params.block(Block::Layer1Recurrent),
      trace.layers[0].hidden, top, top_grad, block_view(grad, layout, Block::Layer1Input),
      block_view(grad, layout, Block::Layer1Recurrent), block_view(grad, layout, Block::Layer1Bias),
      true);
  detail::lstm_layer_backward<Scalar>(
      params.block(Block::Layer0Input), params.block(Block::Layer0Recurrent), batch.steps,
      trace.layers[0], below_grad, block_view(grad, layout, Block::Layer0Input),
      block_view(grad, layout, Block::Layer0Recurrent), block_view(grad, layout, Block::Layer0Bias),
      false);
  return grad;
}

}  // namespace ucahar
