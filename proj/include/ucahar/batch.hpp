#pragma once

#include "ucahar/labels.hpp"
#include "ucahar/model.hpp"
#include "ucahar/pipeline.hpp"

#include <span>

namespace ucahar {

// Label matrices for a batch, one column per instance.
template <typename Scalar>
struct LabelBatch {
  Matrix<Scalar> activity;
  Matrix<Scalar> context;
  Matrix<Scalar> user;
  Matrix<Scalar> pairing;
};

template <typename Scalar>
struct Batch {
  SequenceBatch<Scalar> inputs;
  LabelBatch<Scalar> labels;

  Index size() const { return inputs.batch_size(); }
};

// Columns follow the order of `instances`. Sequence steps are only built when
// with_sequence is set (the encoder-free variant never reads them).
template <typename Scalar>
Batch<Scalar> make_batch(std::span<const Instance* const> instances, PairingScope scope,
                         bool with_sequence = true) {
  require(!instances.empty(), "cannot build an empty batch");
  const Instance& first = *instances.front();
  const Index b = static_cast<Index>(instances.size());
  const Index channels = first.window.channels();
  const Index steps = first.window.snapshots();
  const Index dim = first.features.size();

  Batch<Scalar> batch;
  batch.inputs.features.resize(dim, b);
  if (with_sequence) batch.inputs.steps.assign(steps, Matrix<Scalar>(channels, b));
  auto& labels = batch.labels;
  labels.activity.resize(first.labels.activities.size(), b);
  labels.context.resize(first.labels.contexts.size(), b);
  labels.user.resize(first.labels.user.size(), b);
  labels.pairing.resize(pairing_vector(first.labels, scope).size(), b);

  for (Index j = 0; j < b; ++j) {
    const Instance& inst = *instances[static_cast<size_t>(j)];
    require(inst.features.size() == dim, "instances disagree on feature dimension");
    require(inst.window.channels() == channels && inst.window.snapshots() == steps,
            "instances disagree on window shape");
    batch.inputs.features.col(j) = inst.features.values.cast<Scalar>();
    if (with_sequence) {
      for (Index t = 0; t < steps; ++t) {
        batch.inputs.steps[static_cast<size_t>(t)].col(j) = inst.window.data.col(t).cast<Scalar>();
      }
    }
    labels.activity.col(j) = inst.labels.activities.cast<Scalar>();
    labels.context.col(j) = inst.labels.contexts.cast<Scalar>();
    labels.user.col(j) = inst.labels.user.cast<Scalar>();
    labels.pairing.col(j) = pairing_vector(inst.labels, scope).cast<Scalar>();
  }
  return batch;
}

}  // namespace ucahar
