#pragma once

#include "ucahar/labels.hpp"
#include "ucahar/metrics.hpp"
#include "ucahar/pipeline.hpp"
#include "ucahar/training.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace ucahar {

// Per-user perturbation of the activity waveforms.
struct UserSignature {
  double phase_offset = 0.0;     // radians, shared by all channels
  double amplitude_scale = 1.0;
  Vector<double> bias;           // additive, one entry per channel
};

// Synthetic multi-user multi-label dataset description. Empty per-activity,
// per-context and per-user vectors are filled with defaults derived from the
// seed (see resolved()).
struct SynthSpec {
  Index n_users = 4;
  Index n_activities = 4;
  Index n_contexts = 2;
  Index instances_per_user = 200;
  Index channels = 3;
  Index snapshots = 50;
  double sample_rate_hz = 40.0;
  double window_s = 3.0;
  std::vector<double> activity_frequency_hz;  // default (a + 1) * 4/3 Hz
  std::vector<double> activity_amplitude;     // default 1
  std::vector<double> context_damping;        // default linear 1.0 .. 0.4
  std::vector<UserSignature> users;           // default drawn from the seed
  double noise_sigma = 0.3;
  double co_occurrence_rate = 0.2;
  std::vector<std::pair<Index, Index>> holdout_pairs;  // (user, activity)

  // Throws SpecError for non-positive counts, fewer than 2 users or
  // activities, wrong vector lengths, or a holdout that removes every
  // activity of some user or every user of some activity.
  void validate() const;
  SynthSpec resolved(std::uint64_t seed) const;
};

struct SynthDataset {
  LabelSchema schema;
  std::vector<std::string> channel_names;
  ChannelLayout layout;
  std::vector<Instance> instances;  // features not normalized
};

std::vector<std::string> synth_channel_names(Index channels);

// One noiseless-plus-Gaussian window per instance: for every channel c,
// damping(context) * scale(user) * sum_a amp_a * sin(2 pi f_a t + phase(user) + 2 pi c / 3)
// + bias(user, c) + noise. Primary activity uniform, a second distinct one
// with probability co_occurrence_rate, one context uniform and independent.
SynthDataset generate(const SynthSpec& spec, std::uint64_t seed);

// True when the instance's user performs a held-out activity.
bool matches_holdout(const Instance& instance, const LabelSchema& schema,
                     const std::vector<std::pair<Index, Index>>& holdout_pairs);

struct CrossUserBenchmark {
  SynthDataset data;  // instances moved out into split
  DatasetSplit split; // normalized with training statistics
  Normalizer normalizer;
};

// Held-out (user, activity) instances go to test only; the rest is split per
// user with split_dataset. Every user and every activity must remain in train.
CrossUserBenchmark cross_user_benchmark(const SynthSpec& spec, std::uint64_t seed,
                                        const SplitSpec& split);

// Mean over holdout pairs (u, a) of the MCC for activity a restricted to
// user u's test instances. predicted is N x C_A for `test`.
double holdout_activity_mcc(std::span<const Instance> test, const BinaryMatrix& predicted,
                            const LabelSchema& schema,
                            const std::vector<std::pair<Index, Index>>& holdout_pairs);

// Mean cosine similarity of fused representations (F x N) over instance pairs
// with identical non-empty activity sets and different users.
double cross_user_similarity(std::span<const Instance> instances, const Matrix<double>& fused);

// Writes one <user>.stream.csv and <user>.annotations.csv per user. Each user
// records ceil(instances_per_user / episode_windows) episodes of
// episode_windows * window_s seconds with fixed labels per episode.
void write_synth_recordings(const SynthSpec& spec, std::uint64_t seed,
                            const std::filesystem::path& dir, Index episode_windows = 10);

}  // namespace ucahar
