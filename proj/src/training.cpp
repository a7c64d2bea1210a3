#include "ucahar/training.hpp"

#include "ucahar/batch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace ucahar {

std::string_view to_string(Ablation ablation) {
  switch (ablation) {
    case Ablation::None: return "full";
    case Ablation::NoUserId: return "no_UI";
    case Ablation::NoContrastive: return "no_CL";
    case Ablation::NoSequence: return "no_TS";
  }
  return "full";
}

Ablation parse_ablation(std::string_view text) {
  if (text == "none" || text == "full") return Ablation::None;
  if (text == "no_UI") return Ablation::NoUserId;
  if (text == "no_CL") return Ablation::NoContrastive;
  if (text == "no_TS") return Ablation::NoSequence;
  throw InvalidInput("unknown ablation '" + std::string(text) + "'");
}

void SplitSpec::validate() const {
  require(train > 0.0 && val > 0.0 && test > 0.0, "split fractions must be positive");
  require(std::abs(train + val + test - 1.0) < 1e-9, "split fractions must sum to 1");
}

std::array<Index, 3> split_counts(Index n, const SplitSpec& spec) {
  spec.validate();
  const std::array<double, 3> exact = {n * spec.train, n * spec.val, n * spec.test};
  std::array<Index, 3> counts{};
  std::array<double, 3> remainder{};
  Index assigned = 0;
  for (size_t k = 0; k < 3; ++k) {
    counts[k] = static_cast<Index>(std::floor(exact[k] + 1e-9));
    remainder[k] = exact[k] - static_cast<double>(counts[k]);
    assigned += counts[k];
  }
  // Priority on equal remainders: test, val, train.
  std::array<size_t, 3> order = {2, 1, 0};
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return remainder[a] > remainder[b] + 1e-9; });
  for (size_t k = 0; assigned < n; k = (k + 1) % 3, ++assigned) ++counts[order[k]];
  return counts;
}

DatasetSplit split_dataset(std::vector<Instance> instances, const SplitSpec& spec,
                           std::vector<std::string>* warnings) {
  spec.validate();
  require(instances.size() >= 5, "split_dataset needs at least 5 instances");
  std::map<std::string, std::vector<size_t>> by_user;
  for (size_t i = 0; i < instances.size(); ++i) by_user[instances[i].user_id].push_back(i);

  std::mt19937_64 rng(spec.seed);
  DatasetSplit out;
  for (auto& [user, idx] : by_user) {
    const auto n = static_cast<Index>(idx.size());
    if (n < 3) {
      if (warnings) {
        warnings->push_back("user '" + user + "' has only " + std::to_string(n) +
                            " instances; all assigned to train");
      }
      for (auto i : idx) out.train.push_back(std::move(instances[i]));
      continue;
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto counts = split_counts(n, spec);
    for (Index k = 0; k < n; ++k) {
      auto& dest = k < counts[0] ? out.train : (k < counts[0] + counts[1] ? out.val : out.test);
      dest.push_back(std::move(instances[idx[static_cast<size_t>(k)]]));
    }
  }
  return out;
}

Normalizer normalize_splits(DatasetSplit& split) {
  std::vector<FeatureVector> features;
  features.reserve(split.train.size());
  for (const auto& inst : split.train) features.push_back(inst.features);
  const Normalizer norm = fit_normalizer(features);
  for (auto* part : {&split.train, &split.val, &split.test}) {
    for (auto& inst : *part) inst.features = normalize(inst.features, norm);
  }
  return norm;
}

void TrainConfig::validate() const {
  loss_weights.validate();
  require(batch_size >= 1, "batch size must be positive");
  require(batch_size >= 2 || loss_weights.alpha == 0.0,
          "contrastive training needs a batch size of at least 2");
  require(max_epochs >= 1, "max_epochs must be positive");
  require(learning_rate >= 0.0, "learning rate must be nonnegative");
  require(patience >= 1, "patience must be positive");
  require(hidden_size >= 1 && encoding_dim >= 1, "model sizes must be positive");
  require(threshold > 0.0 && threshold < 1.0, "decision threshold must lie in (0, 1)");
}

TrainConfig apply_ablation(TrainConfig config, Ablation ablation) {
  config.ablation = ablation;
  if (ablation == Ablation::NoUserId) config.loss_weights.gamma2 = 0.0;
  if (ablation == Ablation::NoContrastive) config.loss_weights.alpha = 0.0;
  return config;
}

void set_hyperparameter(TrainConfig& config, const std::string& name, double value) {
  if (name == "alpha") {
    config.loss_weights.alpha = value;
  } else if (name == "gamma1") {
    config.loss_weights.gamma1 = value;
  } else if (name == "gamma2") {
    config.loss_weights.gamma2 = value;
  } else if (name == "learning_rate") {
    config.learning_rate = value;
  } else if (name == "encoding_dim") {
    config.encoding_dim = static_cast<Index>(std::lround(value));
  } else if (name == "hidden_size") {
    config.hidden_size = static_cast<Index>(std::lround(value));
  } else if (name == "batch_size") {
    config.batch_size = static_cast<Index>(std::lround(value));
  } else {
    throw InvalidInput("unknown hyperparameter '" + name + "'");
  }
}

ModelConfig model_config_for(const TrainConfig& config, const LabelSchema& schema,
                             std::span<const Instance> sample) {
  require(!sample.empty(), "cannot size a model without instances");
  ModelConfig mc;
  mc.channels = sample.front().window.channels();
  mc.snapshots = sample.front().window.snapshots();
  mc.hidden_size = config.hidden_size;
  mc.encoding_dim = config.encoding_dim;
  mc.feature_dim = sample.front().features.size();
  mc.num_activities = schema.size(LabelKind::Activity);
  mc.num_contexts = schema.size(LabelKind::Context);
  mc.num_users = schema.size(LabelKind::User);
  mc.use_sequence_encoder = config.ablation != Ablation::NoSequence;
  mc.seed = config.seed;
  return mc;
}

std::vector<std::vector<Index>> make_batches(Index n, Index batch_size, bool drop_short_tail,
                                             std::mt19937_64& rng) {
  require(batch_size >= 1, "batch size must be positive");
  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<Index>> batches;
  for (Index start = 0; start < n; start += batch_size) {
    const Index end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  if (drop_short_tail && batches.size() > 1 &&
      static_cast<Index>(batches.back().size()) < batch_size) {
    batches.pop_back();
  }
  return batches;
}

namespace {

constexpr Index kEvalChunk = 256;

std::vector<const Instance*> pointers(std::span<const Instance> instances,
                                      const std::vector<Index>& idx) {
  std::vector<const Instance*> out;
  out.reserve(idx.size());
  for (Index i : idx) out.push_back(&instances[static_cast<size_t>(i)]);
  return out;
}

BinaryMatrix truth_matrix(std::span<const Instance> instances, LabelKind kind) {
  const auto& first = instances.front().labels;
  const Index cols = kind == LabelKind::Activity  ? first.activities.size()
                     : kind == LabelKind::Context ? first.contexts.size()
                                                  : first.user.size();
  BinaryMatrix out(static_cast<Index>(instances.size()), cols);
  for (size_t i = 0; i < instances.size(); ++i) {
    const auto& l = instances[i].labels;
    const auto& v = kind == LabelKind::Activity ? l.activities
                    : kind == LabelKind::Context ? l.contexts
                                                 : l.user;
    out.row(static_cast<Index>(i)) = v.transpose().cast<int>();
  }
  return out;
}

void accumulate(LossBreakdown& sum, const LossBreakdown& x) {
  sum.activity += x.activity;
  sum.context += x.context;
  sum.user += x.user;
  sum.contrastive += x.contrastive;
  sum.total += x.total;
}

LossBreakdown scaled(LossBreakdown b, double factor) {
  b.activity *= factor;
  b.context *= factor;
  b.user *= factor;
  b.contrastive *= factor;
  b.total *= factor;
  return b;
}

bool finite(const LossBreakdown& b) {
  return std::isfinite(b.activity) && std::isfinite(b.context) && std::isfinite(b.user) &&
         std::isfinite(b.contrastive) && std::isfinite(b.total);
}

}  // namespace

Evaluation evaluate(const ModelParams<double>& params, const LabelSchema& schema,
                    std::span<const Instance> instances, double threshold) {
  require(!instances.empty(), "cannot evaluate an empty set");
  const auto& mc = params.config();
  const auto n = static_cast<Index>(instances.size());
  Evaluation ev;
  ev.fused.resize(mc.fused_dim(), n);
  ev.logits.activity.resize(mc.num_activities, n);
  ev.logits.context.resize(mc.num_contexts, n);
  ev.logits.user.resize(mc.num_users, n);

  for (Index start = 0; start < n; start += kEvalChunk) {
    const Index len = std::min(kEvalChunk, n - start);
    std::vector<const Instance*> chunk;
    for (Index i = start; i < start + len; ++i) chunk.push_back(&instances[static_cast<size_t>(i)]);
    const auto batch = make_batch<double>(chunk, PairingScope::ActivityContext, mc.use_sequence_encoder);
    const auto out = forward(params, batch.inputs);
    ev.fused.middleCols(start, len) = out.fused;
    ev.logits.activity.middleCols(start, len) = out.logits.activity;
    ev.logits.context.middleCols(start, len) = out.logits.context;
    ev.logits.user.middleCols(start, len) = out.logits.user;
  }

  const std::array<std::pair<HeadKind, LabelKind>, 3> heads = {
      std::pair{HeadKind::Activity, LabelKind::Activity},
      std::pair{HeadKind::Context, LabelKind::Context}, std::pair{HeadKind::User, LabelKind::User}};
  const std::array<const Matrix<double>*, 3> logits = {&ev.logits.activity, &ev.logits.context,
                                                        &ev.logits.user};
  for (size_t h = 0; h < 3; ++h) {
    ev.predictions[h] = threshold_predictions(logits[h]->transpose(), heads[h].first, threshold);
    ev.reports[h] = make_report(heads[h].first, schema.names(heads[h].second), ev.predictions[h],
                                truth_matrix(instances, heads[h].second));
  }
  return ev;
}

TrainResult train(const TrainConfig& input_config, const LabelSchema& schema,
                  std::span<const Instance> train_set, std::span<const Instance> val_set,
                  const EpochCallback& on_epoch) {
  const TrainConfig config = apply_ablation(input_config, input_config.ablation);
  config.validate();
  require(!train_set.empty() && !val_set.empty(), "train and validation sets must be non-empty");
  const LossWeights& weights = config.loss_weights;
  if (weights.alpha > 0.0 && train_set.size() < 2) {
    throw DegenerateBatch("contrastive training needs at least 2 training instances");
  }

  const ModelConfig mc = model_config_for(config, schema, train_set);
  TrainResult result{ModelParams<double>::initialized(mc), {}};
  ModelParams<double>& params = result.params;
  auto& history = result.history;

  OptimizerConfig oc;
  oc.learning_rate = config.learning_rate;
  oc.beta1 = config.beta1;
  oc.beta2 = config.beta2;
  RAdam<double> optimizer(params.size(), oc);

  Matrix<double> train_act(mc.num_activities, static_cast<Index>(train_set.size()));
  Matrix<double> train_ctx(mc.num_contexts, static_cast<Index>(train_set.size()));
  for (size_t i = 0; i < train_set.size(); ++i) {
    train_act.col(static_cast<Index>(i)) = train_set[i].labels.activities;
    train_ctx.col(static_cast<Index>(i)) = train_set[i].labels.contexts;
  }
  const ClassWeightTable act_weights = class_weights(train_act);
  const ClassWeightTable ctx_weights = class_weights(train_ctx);

  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  Vector<double> best_values = params.values();
  double best_score = -std::numeric_limits<double>::infinity();
  Index stale = 0;
  Index step = 0;
  const bool drop_tail = weights.alpha > 0.0;

  for (Index epoch = 0; epoch < config.max_epochs; ++epoch) {
    const auto batches =
        make_batches(static_cast<Index>(train_set.size()), config.batch_size, drop_tail, rng);
    LossBreakdown sum;
    for (size_t b = 0; b < batches.size(); ++b) {
      const auto members = pointers(train_set, batches[b]);
      const auto batch = make_batch<double>(members, config.pairing_scope, mc.use_sequence_encoder);
      ForwardTrace<double> trace;
      const auto out = forward(params, batch.inputs, &trace);
      const auto objective =
          total_loss(out.logits, out.fused, batch.labels, weights, act_weights, ctx_weights);
      if (!finite(objective.breakdown)) {
        std::ostringstream msg;
        msg << "non-finite loss at epoch " << epoch << ", batch " << b << " (L_A="
            << objective.breakdown.activity << ", L_PP=" << objective.breakdown.context
            << ", L_U=" << objective.breakdown.user << ", L_d=" << objective.breakdown.contrastive
            << ")";
        throw TrainingError(msg.str());
      }
      const auto grad =
          backward(params, batch.inputs, out, trace, objective.logit_grad, objective.fused_grad);
      optimizer.step(params.values(), grad);
      if (!params.all_finite()) {
        throw TrainingError("non-finite parameters after epoch " + std::to_string(epoch) +
                            ", batch " + std::to_string(b));
      }
      history.steps.push_back({step++, epoch, objective.breakdown});
      accumulate(sum, objective.breakdown);
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = scaled(sum, batches.empty() ? 0.0 : 1.0 / static_cast<double>(batches.size()));
    record.validation = evaluate(params, schema, val_set, config.threshold).reports;
    const double score = record.validation[0].macro_mcc;
    if (on_epoch) on_epoch(record);
    history.epochs.push_back(std::move(record));

    if (score > best_score) {
      best_score = score;
      best_values = params.values();
      history.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= config.patience) {
      history.early_stopped = true;
      break;
    }
  }
  history.best_score = best_score;
  params.values() = best_values;
  return result;
}

GridResult grid_search(const TrainConfig& config, const LabelSchema& schema,
                       std::span<const Instance> train_set, std::span<const Instance> val_set) {
  require(!config.grid.empty(), "grid search needs at least one axis");
  for (const auto& [name, values] : config.grid) {
    require(!values.empty(), "grid axis '" + name + "' has no values");
  }

  GridResult result;
  std::vector<size_t> cursor(config.grid.size(), 0);
  while (true) {
    GridTrial trial;
    trial.config = config;
    trial.config.grid.clear();
    for (size_t a = 0; a < config.grid.size(); ++a) {
      const auto& [name, values] = config.grid[a];
      set_hyperparameter(trial.config, name, values[cursor[a]]);
      trial.point.emplace_back(name, values[cursor[a]]);
    }
    auto trained = train(trial.config, schema, train_set, val_set);
    trial.history = std::move(trained.history);
    trial.score = trial.history.best_score;
    result.trials.push_back(std::move(trial));

    size_t axis = config.grid.size();
    while (axis-- > 0) {
      if (++cursor[axis] < config.grid[axis].second.size()) break;
      cursor[axis] = 0;
    }
    if (axis == static_cast<size_t>(-1)) break;
  }

  auto better = [](const GridTrial& a, const GridTrial& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.config.loss_weights.alpha != b.config.loss_weights.alpha) {
      return a.config.loss_weights.alpha < b.config.loss_weights.alpha;
    }
    return a.config.learning_rate < b.config.learning_rate;
  };
  for (size_t i = 1; i < result.trials.size(); ++i) {
    if (better(result.trials[i], result.trials[static_cast<size_t>(result.best_index)])) {
      result.best_index = static_cast<Index>(i);
    }
  }
  result.best = result.trials[static_cast<size_t>(result.best_index)].config;
  return result;
}

std::vector<AblationRow> ablate(const TrainConfig& config, const LabelSchema& schema,
                                std::span<const Instance> train_set,
                                std::span<const Instance> val_set,
                                std::span<const Instance> test_set) {
  std::vector<AblationRow> rows;
  for (auto variant : {Ablation::None, Ablation::NoUserId, Ablation::NoContrastive,
                       Ablation::NoSequence}) {
    TrainConfig variant_config = config;
    variant_config.ablation = variant;
    const auto trained = train(variant_config, schema, train_set, val_set);
    AblationRow row;
    row.variant = variant;
    row.test = evaluate(trained.params, schema, test_set, config.threshold).reports;
    row.encoder_parameters = trained.params.encoder_parameter_count();
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ucahar
