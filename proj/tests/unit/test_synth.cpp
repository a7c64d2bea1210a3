#include "doctest.h"
#include "oracles.hpp"

#include "ucahar/synth.hpp"

#include <unsupported/Eigen/FFT>

using namespace ucahar;

namespace {

// Magnitude spectrum of every channel, concatenated.
Vector<double> spectrum_features(const RawWindow& w) {
  Eigen::FFT<double> fft;
  const Index half = w.snapshots() / 2;
  Vector<double> out(w.channels() * half);
  for (Index c = 0; c < w.channels(); ++c) {
    std::vector<double> x(static_cast<size_t>(w.snapshots()));
    for (Index t = 0; t < w.snapshots(); ++t) x[static_cast<size_t>(t)] = w.data(c, t);
    std::vector<std::complex<double>> s;
    fft.fwd(s, x);
    for (Index k = 1; k <= half; ++k) out(c * half + k - 1) = std::abs(s[static_cast<size_t>(k)]);
  }
  return out;
}

Index primary_activity(const Instance& inst) {
  Index a = 0;
  inst.labels.activities.maxCoeff(&a);
  return a;
}

}  // namespace

TEST_CASE("same seed gives a bit-identical dataset") {
  SynthSpec spec;
  spec.instances_per_user = 20;
  const auto a = generate(spec, 5);
  const auto b = generate(spec, 5);
  const auto c = generate(spec, 6);
  REQUIRE(a.instances.size() == 80);
  bool differs = false;
  for (size_t i = 0; i < a.instances.size(); ++i) {
    CHECK(a.instances[i].window.data == b.instances[i].window.data);
    CHECK(a.instances[i].labels.activities == b.instances[i].labels.activities);
    differs = differs || a.instances[i].window.data != c.instances[i].window.data;
  }
  CHECK(differs);
}

TEST_CASE("without noise one user doing one activity in one context repeats the same window") {
  SynthSpec spec;
  spec.noise_sigma = 0.0;
  spec.co_occurrence_rate = 0.0;
  spec.instances_per_user = 60;
  const auto d = generate(spec, 1);
  const Instance* first = nullptr;
  int matched = 0;
  for (const auto& inst : d.instances) {
    if (inst.user_id != "user_1" || primary_activity(inst) != 2 || inst.labels.contexts(0) != 1.0) continue;
    if (!first) {
      first = &inst;
      continue;
    }
    CHECK(inst.window.data == first->window.data);
    ++matched;
  }
  CHECK(matched > 0);
}

TEST_CASE("generated labels satisfy the label-set invariants and the schema") {
  SynthSpec spec;
  spec.instances_per_user = 50;
  const auto d = generate(spec, 2);
  CHECK(d.schema.size(LabelKind::User) == 4);
  CHECK(d.channel_names == std::vector<std::string>{"acc_x", "acc_y", "acc_z"});
  for (const auto& inst : d.instances) {
    CHECK_NOTHROW(inst.labels.validate());
    CHECK(inst.labels.activities.sum() >= 1.0);
    CHECK(inst.labels.contexts.sum() == 1.0);
    CHECK(d.schema.name_of(LabelKind::User, inst.labels.user_index()) == inst.user_id);
    CHECK(inst.window.snapshots() == 50);
  }
}

TEST_CASE("label frequencies stay within 3 sigma of the generating probabilities") {
  SynthSpec spec;
  spec.instances_per_user = 2500;
  spec.co_occurrence_rate = 0.3;
  spec.snapshots = 8;
  spec.sample_rate_hz = 8.0;
  spec.window_s = 1.0;
  const auto d = generate(spec, 3);
  const auto n = static_cast<double>(d.instances.size());
  const double p_activity = (1.0 + spec.co_occurrence_rate) / 4.0;
  const double p_context = 0.5;
  Vector<double> act = Vector<double>::Zero(4), ctx = Vector<double>::Zero(2);
  for (const auto& inst : d.instances) {
    act += inst.labels.activities;
    ctx += inst.labels.contexts;
  }
  for (Index a = 0; a < 4; ++a) {
    CHECK(std::abs(act(a) - n * p_activity) <= 3.0 * std::sqrt(n * p_activity * (1 - p_activity)));
  }
  for (Index c = 0; c < 2; ++c) {
    CHECK(std::abs(ctx(c) - n * p_context) <= 3.0 * std::sqrt(n * p_context * (1 - p_context)));
  }
}

TEST_CASE("nearest-centroid on spectra separates two activities") {
  SynthSpec spec;
  spec.n_activities = 2;
  spec.co_occurrence_rate = 0.0;
  spec.noise_sigma = 0.3;
  spec.instances_per_user = 100;
  const auto d = generate(spec, 4);
  const auto half = d.instances.size() / 2;
  std::vector<Vector<double>> centroid(2);
  std::vector<double> count(2, 0.0);
  for (size_t i = 0; i < d.instances.size(); i += 2) {
    const auto a = static_cast<size_t>(primary_activity(d.instances[i]));
    const auto f = spectrum_features(d.instances[i].window);
    if (centroid[a].size() == 0) centroid[a] = Vector<double>::Zero(f.size());
    centroid[a] += f;
    count[a] += 1.0;
  }
  for (size_t a = 0; a < 2; ++a) centroid[a] /= count[a];
  int correct = 0;
  for (size_t i = 1; i < d.instances.size(); i += 2) {
    const auto f = spectrum_features(d.instances[i].window);
    const Index guess = (f - centroid[0]).norm() <= (f - centroid[1]).norm() ? 0 : 1;
    if (guess == primary_activity(d.instances[i])) ++correct;
  }
  CHECK(static_cast<double>(correct) / static_cast<double>(half) > 0.95);
}

TEST_CASE("invalid specs are rejected") {
  SynthSpec spec;
  spec.n_users = 1;
  CHECK_THROWS_AS(generate(spec, 0), SpecError);
  spec = SynthSpec{};
  spec.n_activities = 2;
  spec.holdout_pairs = {{0, 0}, {0, 1}};
  CHECK_THROWS_AS(generate(spec, 0), SpecError);
  spec.holdout_pairs = {{0, 5}};
  CHECK_THROWS_AS(generate(spec, 0), SpecError);
}

TEST_CASE("cross-user benchmark keeps holdout pairs out of train") {
  SynthSpec spec;
  spec.n_users = 3;
  spec.n_activities = 3;
  spec.instances_per_user = 60;
  spec.holdout_pairs = {{2, 0}};
  const auto bench = cross_user_benchmark(spec, 7, SplitSpec{0.6, 0.2, 0.2, 7});
  const auto& schema = bench.data.schema;
  for (const auto& inst : bench.split.train) CHECK_FALSE(matches_holdout(inst, schema, spec.holdout_pairs));
  for (const auto& inst : bench.split.val) CHECK_FALSE(matches_holdout(inst, schema, spec.holdout_pairs));

  int held_in_test = 0;
  for (const auto& inst : bench.split.test) held_in_test += matches_holdout(inst, schema, spec.holdout_pairs);
  CHECK(held_in_test > 0);

  auto has = [&](const std::string& user, Index activity) {
    return std::any_of(bench.split.train.begin(), bench.split.train.end(), [&](const Instance& i) {
      return i.user_id == user && i.labels.activities(activity) == 1.0;
    });
  };
  CHECK(has("user_2", 1));
  CHECK(has("user_2", 2));
  CHECK(has("user_0", 0));
  CHECK(has("user_1", 0));
}

TEST_CASE("empty holdout reduces to the plain per-user split") {
  SynthSpec spec;
  spec.instances_per_user = 30;
  const SplitSpec split{0.6, 0.2, 0.2, 9};
  const auto bench = cross_user_benchmark(spec, 9, split);
  auto plain = split_dataset(generate(spec, 9).instances, split);
  normalize_splits(plain);
  REQUIRE(bench.split.test.size() == plain.test.size());
  for (size_t i = 0; i < plain.test.size(); ++i) {
    CHECK(bench.split.test[i].features.values == plain.test[i].features.values);
  }
}

TEST_CASE("holdout MCC and cross-user similarity on hand-built inputs") {
  LabelSchema schema;
  schema.activity_names = {"a0", "a1"};
  schema.context_names = {"c0"};
  schema.user_ids = {"u0", "u1"};
  auto inst = [](const std::string& user, Index activity) {
    Instance i;
    i.user_id = user;
    i.labels.activities = Vector<double>::Unit(2, activity);
    return i;
  };
  const std::vector<Instance> test = {inst("u1", 0), inst("u1", 1), inst("u0", 0), inst("u0", 1)};
  BinaryMatrix pred(4, 2);
  pred << 1, 0,
          0, 1,
          0, 1,
          0, 1;
  CHECK(holdout_activity_mcc(test, pred, schema, {{1, 0}}) == 1.0);
  CHECK(holdout_activity_mcc(test, pred, schema, {{0, 0}}) == 0.0);

  Matrix<double> fused(2, 4);
  fused << 1, 0, 1, 0,
           0, 1, 1, 1;
  // Pairs (0,2) and (1,3): cos 1/sqrt2 and 1.
  CHECK(cross_user_similarity(test, fused) == doctest::Approx((1.0 / std::sqrt(2.0) + 1.0) / 2.0));
}
