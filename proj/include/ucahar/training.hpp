#pragma once

#include "ucahar/labels.hpp"
#include "ucahar/losses.hpp"
#include "ucahar/metrics.hpp"
#include "ucahar/model.hpp"
#include "ucahar/optim.hpp"
#include "ucahar/pipeline.hpp"

#include <array>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ucahar {

enum class Ablation { None, NoUserId, NoContrastive, NoSequence };

std::string_view to_string(Ablation ablation);
Ablation parse_ablation(std::string_view text);

struct SplitSpec {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DatasetSplit {
  std::vector<Instance> train;
  std::vector<Instance> val;
  std::vector<Instance> test;
};

// Per-user (train, val, test) sizes: floor of each fraction, then the
// leftover instances go one at a time to the largest fractional remainders,
// ties resolved test first, then val, then train.
std::array<Index, 3> split_counts(Index n, const SplitSpec& spec);

// Stratified per user: each user's instances are shuffled with the seed and
// cut by split_counts. Users with fewer than 3 instances go entirely to train
// and produce a warning.
DatasetSplit split_dataset(std::vector<Instance> instances, const SplitSpec& spec,
                           std::vector<std::string>* warnings = nullptr);

// Fits the normalizer on the training split and applies it to all three.
Normalizer normalize_splits(DatasetSplit& split);

// Ordered hyperparameter axes. Known names: alpha, gamma1, gamma2,
// learning_rate, encoding_dim, hidden_size, batch_size.
using Grid = std::vector<std::pair<std::string, std::vector<double>>>;

struct TrainConfig {
  Index batch_size = 128;
  Index max_epochs = 50;
  double learning_rate = 1e-3;
  Index patience = 10;
  LossWeights loss_weights;
  Index hidden_size = 64;
  Index encoding_dim = 64;
  PairingScope pairing_scope = PairingScope::ActivityContext;
  double threshold = 0.5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  std::uint64_t seed = 0;
  Ablation ablation = Ablation::None;
  Grid grid;

  void validate() const;
};

// Config with the ablation switch folded into the loss weights.
TrainConfig apply_ablation(TrainConfig config, Ablation ablation);

// Sets one grid axis on a config; throws InvalidInput for unknown names.
void set_hyperparameter(TrainConfig& config, const std::string& name, double value);

ModelConfig model_config_for(const TrainConfig& config, const LabelSchema& schema,
                             std::span<const Instance> sample);

// Shuffled index batches for one epoch. With drop_short_tail a final batch
// smaller than batch_size is discarded unless it is the only batch.
std::vector<std::vector<Index>> make_batches(Index n, Index batch_size, bool drop_short_tail,
                                             std::mt19937_64& rng);

struct StepRecord {
  Index step = 0;
  Index epoch = 0;
  LossBreakdown loss;
};

struct EpochRecord {
  Index epoch = 0;
  LossBreakdown train_loss;  // mean over the epoch's steps
  std::array<MetricsReport, 3> validation;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::vector<StepRecord> steps;
  Index best_epoch = -1;
  double best_score = 0.0;  // validation activity macro-MCC at best_epoch
  bool early_stopped = false;
};

struct TrainResult {
  ModelParams<double> params;
  TrainHistory history;
};

struct Evaluation {
  std::array<MetricsReport, 3> reports;  // activity, context, user
  Matrix<double> fused;                  // F x N representations
  HeadLogits<double> logits;             // C x N per head
  std::array<BinaryMatrix, 3> predictions;  // N x C per head
};

Evaluation evaluate(const ModelParams<double>& params, const LabelSchema& schema,
                    std::span<const Instance> instances, double threshold = 0.5);

using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batch training with per-epoch validation; returns the parameters of the
// epoch with the best validation activity macro-MCC.
TrainResult train(const TrainConfig& config, const LabelSchema& schema,
                  std::span<const Instance> train_set, std::span<const Instance> val_set,
                  const EpochCallback& on_epoch = {});

struct GridTrial {
  TrainConfig config;
  std::vector<std::pair<std::string, double>> point;
  TrainHistory history;
  double score = 0.0;
};

struct GridResult {
  TrainConfig best;
  Index best_index = 0;
  std::vector<GridTrial> trials;
};

// Exhaustive Cartesian product over config.grid; best validation activity
// macro-MCC wins, ties go to smaller alpha, then smaller learning rate.
GridResult grid_search(const TrainConfig& config, const LabelSchema& schema,
                       std::span<const Instance> train_set, std::span<const Instance> val_set);

struct AblationRow {
  Ablation variant = Ablation::None;
  std::array<MetricsReport, 3> test;
  Index encoder_parameters = 0;
};

// Trains full, no_UI, no_CL and no_TS variants on the same data and seed and
// reports test metrics for each.
std::vector<AblationRow> ablate(const TrainConfig& config, const LabelSchema& schema,
                                std::span<const Instance> train_set,
                                std::span<const Instance> val_set,
                                std::span<const Instance> test_set);

}  // namespace ucahar
