#include "ucahar/synth.hpp"

#include "ucahar/io.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

namespace ucahar {

namespace {

struct Draw {
  std::vector<Index> activities;
  Index context = 0;
};

Draw draw_labels(const SynthSpec& spec, std::mt19937_64& rng) {
  std::uniform_int_distribution<Index> pick_activity(0, spec.n_activities - 1);
  std::uniform_int_distribution<Index> pick_other(0, spec.n_activities - 2);
  std::uniform_int_distribution<Index> pick_context(0, spec.n_contexts - 1);
  std::bernoulli_distribution second(spec.co_occurrence_rate);
  Draw d;
  const Index primary = pick_activity(rng);
  d.activities.push_back(primary);
  if (second(rng)) {
    Index other = pick_other(rng);
    if (other >= primary) ++other;
    d.activities.push_back(other);
  }
  d.context = pick_context(rng);
  return d;
}

double clean_signal(const SynthSpec& spec, Index user, const Draw& d, Index channel, double t) {
  const auto& sig = spec.users[static_cast<size_t>(user)];
  const double channel_phase = 2.0 * std::numbers::pi * static_cast<double>(channel) / 3.0;
  double value = 0.0;
  for (Index a : d.activities) {
    const auto ai = static_cast<size_t>(a);
    value += spec.activity_amplitude[ai] *
             std::sin(2.0 * std::numbers::pi * spec.activity_frequency_hz[ai] * t +
                      sig.phase_offset + channel_phase);
  }
  return spec.context_damping[static_cast<size_t>(d.context)] * sig.amplitude_scale * value +
         sig.bias(channel);
}

std::string user_name(Index u) { return "user_" + std::to_string(u); }
std::string activity_name(Index a) { return "activity_" + std::to_string(a); }
std::string context_name(Index c) { return "context_" + std::to_string(c); }

LabelSchema synth_schema(const SynthSpec& spec) {
  LabelSchema schema;
  for (Index a = 0; a < spec.n_activities; ++a) schema.activity_names.push_back(activity_name(a));
  for (Index c = 0; c < spec.n_contexts; ++c) schema.context_names.push_back(context_name(c));
  for (Index u = 0; u < spec.n_users; ++u) schema.user_ids.push_back(user_name(u));
  return schema;
}

Index samples_per_window(const SynthSpec& spec) {
  return static_cast<Index>(std::lround(spec.window_s * spec.sample_rate_hz));
}

}  // namespace

void SynthSpec::validate() const {
  if (n_users < 2) throw SpecError("synthetic data needs at least 2 users");
  if (n_activities < 2) throw SpecError("synthetic data needs at least 2 activities");
  if (n_contexts < 1 || instances_per_user < 1 || channels < 1 || snapshots < 2) {
    throw SpecError("synthetic counts must be positive");
  }
  if (!(sample_rate_hz > 0.0) || !(window_s > 0.0) || samples_per_window(*this) < 2) {
    throw SpecError("sample rate and window length must give at least 2 samples per window");
  }
  if (noise_sigma < 0.0) throw SpecError("noise sigma must be nonnegative");
  if (co_occurrence_rate < 0.0 || co_occurrence_rate > 1.0) {
    throw SpecError("co-occurrence rate must lie in [0, 1]");
  }
  auto check_len = [](const auto& v, Index n, const char* what) {
    if (!v.empty() && static_cast<Index>(v.size()) != n) {
      throw SpecError(std::string(what) + " has the wrong length");
    }
  };
  check_len(activity_frequency_hz, n_activities, "activity_frequency_hz");
  check_len(activity_amplitude, n_activities, "activity_amplitude");
  check_len(context_damping, n_contexts, "context_damping");
  check_len(users, n_users, "users");
  for (const auto& u : users) {
    if (u.bias.size() != channels) throw SpecError("user bias needs one entry per channel");
  }

  std::vector<std::set<Index>> held_by_user(static_cast<size_t>(n_users));
  std::vector<std::set<Index>> held_by_activity(static_cast<size_t>(n_activities));
  for (const auto& [u, a] : holdout_pairs) {
    if (u < 0 || u >= n_users || a < 0 || a >= n_activities) {
      throw SpecError("holdout pair out of range");
    }
    held_by_user[static_cast<size_t>(u)].insert(a);
    held_by_activity[static_cast<size_t>(a)].insert(u);
  }
  for (Index u = 0; u < n_users; ++u) {
    if (static_cast<Index>(held_by_user[static_cast<size_t>(u)].size()) == n_activities) {
      throw SpecError("holdout covers every activity of " + user_name(u));
    }
  }
  for (Index a = 0; a < n_activities; ++a) {
    if (static_cast<Index>(held_by_activity[static_cast<size_t>(a)].size()) == n_users) {
      throw SpecError("holdout covers every user of " + activity_name(a));
    }
  }
}

SynthSpec SynthSpec::resolved(std::uint64_t seed) const {
  validate();
  SynthSpec out = *this;
  if (out.activity_frequency_hz.empty()) {
    for (Index a = 0; a < n_activities; ++a) {
      out.activity_frequency_hz.push_back(static_cast<double>(a + 1) * 4.0 / 3.0);
    }
  }
  if (out.activity_amplitude.empty()) out.activity_amplitude.assign(static_cast<size_t>(n_activities), 1.0);
  if (out.context_damping.empty()) {
    for (Index c = 0; c < n_contexts; ++c) {
      const double frac = n_contexts > 1 ? static_cast<double>(c) / static_cast<double>(n_contexts - 1) : 0.0;
      out.context_damping.push_back(1.0 - 0.6 * frac);
    }
  }
  if (out.users.empty()) {
    std::mt19937_64 rng(seed ^ 0x5eed5eed5eed5eedULL);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> scale(0.8, 1.2);
    std::uniform_real_distribution<double> bias(-1.0, 1.0);
    for (Index u = 0; u < n_users; ++u) {
      UserSignature sig;
      sig.phase_offset = phase(rng);
      sig.amplitude_scale = scale(rng);
      sig.bias.resize(channels);
      for (Index c = 0; c < channels; ++c) sig.bias(c) = bias(rng);
      out.users.push_back(std::move(sig));
    }
  }
  return out;
}

std::vector<std::string> synth_channel_names(Index channels) {
  static const char* sensors[] = {"acc", "gyro", "mag"};
  static const char* axes[] = {"x", "y", "z"};
  std::vector<std::string> names;
  for (Index c = 0; c < channels; ++c) {
    const Index sensor = c / 3;
    if (sensor < 3 && (sensor + 1) * 3 <= channels) {
      names.push_back(std::string(sensors[sensor]) + "_" + axes[c % 3]);
    } else {
      names.push_back("ch" + std::to_string(c));
    }
  }
  return names;
}

SynthDataset generate(const SynthSpec& input, std::uint64_t seed) {
  const SynthSpec spec = input.resolved(seed);
  SynthDataset out;
  out.schema = synth_schema(spec);
  out.channel_names = synth_channel_names(spec.channels);
  out.layout = ChannelLayout::from_names(out.channel_names);

  const Index n = samples_per_window(spec);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  for (Index u = 0; u < spec.n_users; ++u) {
    for (Index i = 0; i < spec.instances_per_user; ++i) {
      const Draw d = draw_labels(spec, rng);
      Segment seg;
      seg.start_time = static_cast<double>(i) * spec.window_s;
      seg.end_time = seg.start_time + spec.window_s;
      seg.values.resize(spec.channels, n);
      for (Index k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / spec.sample_rate_hz;
        seg.timestamps.push_back(seg.start_time + t);
        for (Index c = 0; c < spec.channels; ++c) {
          seg.values(c, k) = clean_signal(spec, u, d, c, t) + spec.noise_sigma * noise(rng);
        }
      }

      Instance inst;
      inst.window = make_raw_window(seg, spec.snapshots);
      inst.features = extract_features(inst.window, out.layout);
      inst.labels.activities = Vector<double>::Zero(spec.n_activities);
      inst.labels.contexts = Vector<double>::Zero(spec.n_contexts);
      inst.labels.user = Vector<double>::Zero(spec.n_users);
      for (Index a : d.activities) inst.labels.activities(a) = 1.0;
      inst.labels.contexts(d.context) = 1.0;
      inst.labels.user(u) = 1.0;
      inst.user_id = user_name(u);
      out.instances.push_back(std::move(inst));
    }
  }
  return out;
}

bool matches_holdout(const Instance& instance, const LabelSchema& schema,
                     const std::vector<std::pair<Index, Index>>& holdout_pairs) {
  const Index user = schema.index_of(LabelKind::User, instance.user_id);
  return std::any_of(holdout_pairs.begin(), holdout_pairs.end(), [&](const auto& pair) {
    return pair.first == user && instance.labels.activities(pair.second) == 1.0;
  });
}

CrossUserBenchmark cross_user_benchmark(const SynthSpec& spec, std::uint64_t seed,
                                        const SplitSpec& split) {
  CrossUserBenchmark bench;
  bench.data = generate(spec, seed);
  std::vector<Instance> regular;
  std::vector<Instance> held;
  for (auto& inst : bench.data.instances) {
    (matches_holdout(inst, bench.data.schema, spec.holdout_pairs) ? held : regular)
        .push_back(std::move(inst));
  }
  bench.data.instances.clear();
  bench.split = split_dataset(std::move(regular), split);
  for (auto& inst : held) bench.split.test.push_back(std::move(inst));

  std::set<std::string> users;
  Vector<double> activity_seen = Vector<double>::Zero(spec.n_activities);
  for (const auto& inst : bench.split.train) {
    users.insert(inst.user_id);
    activity_seen += inst.labels.activities;
  }
  if (static_cast<Index>(users.size()) != spec.n_users || (activity_seen.array() == 0.0).any()) {
    throw SpecError("holdout leaves a user or an activity without training data");
  }
  bench.normalizer = normalize_splits(bench.split);
  return bench;
}

double holdout_activity_mcc(std::span<const Instance> test, const BinaryMatrix& predicted,
                            const LabelSchema& schema,
                            const std::vector<std::pair<Index, Index>>& holdout_pairs) {
  require(predicted.rows() == static_cast<Index>(test.size()), "one prediction row per instance");
  if (holdout_pairs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [user, activity] : holdout_pairs) {
    ConfusionCounts counts;
    for (size_t i = 0; i < test.size(); ++i) {
      if (schema.index_of(LabelKind::User, test[i].user_id) != user) continue;
      const bool truth = test[i].labels.activities(activity) == 1.0;
      const bool pred = predicted(static_cast<Index>(i), activity) == 1;
      if (truth && pred) ++counts.tp;
      if (!truth && pred) ++counts.fp;
      if (truth && !pred) ++counts.fn;
      if (!truth && !pred) ++counts.tn;
    }
    sum += mcc(counts);
  }
  return sum / static_cast<double>(holdout_pairs.size());
}

double cross_user_similarity(std::span<const Instance> instances, const Matrix<double>& fused) {
  require(fused.cols() == static_cast<Index>(instances.size()), "one representation per instance");
  const Vector<double> norms = fused.colwise().norm().transpose();
  double sum = 0.0;
  Index pairs = 0;
  for (size_t i = 0; i < instances.size(); ++i) {
    const auto& ai = instances[i].labels.activities;
    if (ai.sum() == 0.0) continue;
    for (size_t j = i + 1; j < instances.size(); ++j) {
      if (instances[j].user_id == instances[i].user_id) continue;
      if (instances[j].labels.activities != ai) continue;
      const auto ii = static_cast<Index>(i);
      const auto jj = static_cast<Index>(j);
      const double denom = norms(ii) * norms(jj);
      sum += denom > 0.0 ? fused.col(ii).dot(fused.col(jj)) / denom : 0.0;
      ++pairs;
    }
  }
  return pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
}

void write_synth_recordings(const SynthSpec& input, std::uint64_t seed,
                            const std::filesystem::path& dir, Index episode_windows) {
  require(episode_windows >= 1, "episodes must span at least one window");
  const SynthSpec spec = input.resolved(seed);
  std::filesystem::create_directories(dir);
  const Index per_window = samples_per_window(spec);
  const Index episodes = (spec.instances_per_user + episode_windows - 1) / episode_windows;
  const Index per_episode = per_window * episode_windows;
  const double episode_s = spec.window_s * static_cast<double>(episode_windows);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (Index u = 0; u < spec.n_users; ++u) {
    SensorStream stream;
    stream.sensor_id = user_name(u);
    stream.channel_names = synth_channel_names(spec.channels);
    stream.values.resize(spec.channels, episodes * per_episode);
    std::vector<Annotation> annotations;
    for (Index e = 0; e < episodes; ++e) {
      const Draw d = draw_labels(spec, rng);
      const double start = static_cast<double>(e) * episode_s;
      for (Index k = 0; k < per_episode; ++k) {
        const Index sample = e * per_episode + k;
        const double t = static_cast<double>(sample) / spec.sample_rate_hz;
        stream.timestamps.push_back(t);
        for (Index c = 0; c < spec.channels; ++c) {
          stream.values(c, sample) = clean_signal(spec, u, d, c, t) + spec.noise_sigma * noise(rng);
        }
      }
      for (Index a : d.activities) {
        annotations.push_back({start, start + episode_s, activity_name(a), LabelKind::Activity});
      }
      annotations.push_back({start, start + episode_s, context_name(d.context), LabelKind::Context});
    }
    annotations.push_back({0.0, static_cast<double>(episodes) * episode_s, user_name(u), LabelKind::User});
    write_stream_csv(dir / (user_name(u) + ".stream.csv"), stream);
    write_annotations_csv(dir / (user_name(u) + ".annotations.csv"), annotations);
  }
}

}  // namespace ucahar
