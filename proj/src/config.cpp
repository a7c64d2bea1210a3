#include "ucahar/config.hpp"

#include "ucahar/io.hpp"

#include "json.hpp"

namespace ucahar {

namespace {

using Json = nlohmann::ordered_json;

template <typename T>
void read_key(const Json& section, const char* key, T& out) {
  if (auto it = section.find(key); it != section.end()) it->get_to(out);
}

void read_index(const Json& section, const char* key, Index& out) {
  if (auto it = section.find(key); it != section.end()) {
    require(it->is_number_integer(), std::string("'") + key + "' must be an integer");
    out = it->get<Index>();
  }
}

// Rejects keys in `given` that the defaults do not have. The grid section is
// free-form; its names are checked when the grid is applied.
void check_keys(const Json& given, const Json& known, const std::string& prefix) {
  require(given.is_object(), "config section '" + prefix + "' must be an object");
  for (const auto& [key, value] : given.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    auto it = known.find(key);
    if (it == known.end()) throw InvalidInput("unknown config key '" + path + "'");
    if (path != "grid" && it->is_object()) check_keys(value, *it, path);
  }
}

Json to_json(const AppConfig& c) {
  Json j;
  j["seed"] = c.seed;

  Json pairs = Json::array();
  for (const auto& [a, b] : c.pipeline.conflict_pairs) pairs.push_back({a, b});
  j["pipeline"] = {{"window_s", c.pipeline.window_s},
                   {"step_s", c.pipeline.step_s},
                   {"target_len", c.pipeline.target_len},
                   {"conflict_pairs", pairs}};

  j["split"] = {{"train", c.split.train}, {"val", c.split.val}, {"test", c.split.test}};

  const TrainConfig& t = c.train;
  j["model"] = {{"hidden_size", t.hidden_size}, {"encoding_dim", t.encoding_dim}};
  j["train"] = {{"batch_size", t.batch_size},
                {"max_epochs", t.max_epochs},
                {"learning_rate", t.learning_rate},
                {"patience", t.patience},
                {"alpha", t.loss_weights.alpha},
                {"gamma1", t.loss_weights.gamma1},
                {"gamma2", t.loss_weights.gamma2},
                {"pairing_scope", std::string(to_string(t.pairing_scope))},
                {"threshold", t.threshold},
                {"beta1", t.beta1},
                {"beta2", t.beta2},
                {"ablation", std::string(to_string(t.ablation))}};

  Json grid = Json::object();
  for (const auto& [name, values] : t.grid) grid[name] = values;
  j["grid"] = grid;

  const SynthSpec& s = c.synth;
  Json users = Json::array();
  for (const auto& u : s.users) {
    users.push_back({{"phase_offset", u.phase_offset},
                     {"amplitude_scale", u.amplitude_scale},
                     {"bias", std::vector<double>(u.bias.begin(), u.bias.end())}});
  }
  Json holdout = Json::array();
  for (const auto& [u, a] : s.holdout_pairs) holdout.push_back({u, a});
  j["synth"] = {{"n_users", s.n_users},
                {"n_activities", s.n_activities},
                {"n_contexts", s.n_contexts},
                {"instances_per_user", s.instances_per_user},
                {"channels", s.channels},
                {"snapshots", s.snapshots},
                {"sample_rate_hz", s.sample_rate_hz},
                {"window_s", s.window_s},
                {"activity_frequency_hz", s.activity_frequency_hz},
                {"activity_amplitude", s.activity_amplitude},
                {"context_damping", s.context_damping},
                {"users", users},
                {"noise_sigma", s.noise_sigma},
                {"co_occurrence_rate", s.co_occurrence_rate},
                {"holdout_pairs", holdout},
                {"episode_windows", c.episode_windows}};
  return j;
}

AppConfig from_json(const Json& j) {
  check_keys(j, to_json(AppConfig{}), "");
  AppConfig c;
  read_key(j, "seed", c.seed);

  if (auto p = j.find("pipeline"); p != j.end()) {
    read_key(*p, "window_s", c.pipeline.window_s);
    read_key(*p, "step_s", c.pipeline.step_s);
    read_index(*p, "target_len", c.pipeline.target_len);
    if (auto it = p->find("conflict_pairs"); it != p->end()) {
      c.pipeline.conflict_pairs.clear();
      for (const auto& pair : *it) {
        require(pair.is_array() && pair.size() == 2, "conflict pairs are [name, name] lists");
        c.pipeline.conflict_pairs.emplace_back(pair[0].get<std::string>(),
                                               pair[1].get<std::string>());
      }
    }
  }

  if (auto s = j.find("split"); s != j.end()) {
    read_key(*s, "train", c.split.train);
    read_key(*s, "val", c.split.val);
    read_key(*s, "test", c.split.test);
  }

  TrainConfig& t = c.train;
  if (auto m = j.find("model"); m != j.end()) {
    read_index(*m, "hidden_size", t.hidden_size);
    read_index(*m, "encoding_dim", t.encoding_dim);
  }
  if (auto tr = j.find("train"); tr != j.end()) {
    read_index(*tr, "batch_size", t.batch_size);
    read_index(*tr, "max_epochs", t.max_epochs);
    read_key(*tr, "learning_rate", t.learning_rate);
    read_index(*tr, "patience", t.patience);
    read_key(*tr, "alpha", t.loss_weights.alpha);
    read_key(*tr, "gamma1", t.loss_weights.gamma1);
    read_key(*tr, "gamma2", t.loss_weights.gamma2);
    if (auto it = tr->find("pairing_scope"); it != tr->end()) {
      t.pairing_scope = parse_pairing_scope(it->get<std::string>());
    }
    read_key(*tr, "threshold", t.threshold);
    read_key(*tr, "beta1", t.beta1);
    read_key(*tr, "beta2", t.beta2);
    if (auto it = tr->find("ablation"); it != tr->end()) {
      t.ablation = parse_ablation(it->get<std::string>());
    }
  }
  if (auto g = j.find("grid"); g != j.end()) {
    require(g->is_object(), "'grid' must map hyperparameter names to value lists");
    t.grid.clear();
    for (const auto& [name, values] : g->items()) {
      TrainConfig probe;
      set_hyperparameter(probe, name, 0.0);  // rejects unknown names
      t.grid.emplace_back(name, values.get<std::vector<double>>());
    }
  }

  SynthSpec& s = c.synth;
  if (auto sy = j.find("synth"); sy != j.end()) {
    read_index(*sy, "n_users", s.n_users);
    read_index(*sy, "n_activities", s.n_activities);
    read_index(*sy, "n_contexts", s.n_contexts);
    read_index(*sy, "instances_per_user", s.instances_per_user);
    read_index(*sy, "channels", s.channels);
    read_index(*sy, "snapshots", s.snapshots);
    read_key(*sy, "sample_rate_hz", s.sample_rate_hz);
    read_key(*sy, "window_s", s.window_s);
    read_key(*sy, "activity_frequency_hz", s.activity_frequency_hz);
    read_key(*sy, "activity_amplitude", s.activity_amplitude);
    read_key(*sy, "context_damping", s.context_damping);
    if (auto it = sy->find("users"); it != sy->end()) {
      s.users.clear();
      for (const auto& u : *it) {
        UserSignature sig;
        read_key(u, "phase_offset", sig.phase_offset);
        read_key(u, "amplitude_scale", sig.amplitude_scale);
        const auto bias = u.value("bias", std::vector<double>{});
        sig.bias = Eigen::Map<const Vector<double>>(bias.data(), static_cast<Index>(bias.size()));
        s.users.push_back(std::move(sig));
      }
    }
    read_key(*sy, "noise_sigma", s.noise_sigma);
    read_key(*sy, "co_occurrence_rate", s.co_occurrence_rate);
    if (auto it = sy->find("holdout_pairs"); it != sy->end()) {
      s.holdout_pairs.clear();
      for (const auto& pair : *it) {
        require(pair.is_array() && pair.size() == 2, "holdout pairs are [user, activity] lists");
        s.holdout_pairs.emplace_back(pair[0].get<Index>(), pair[1].get<Index>());
      }
    }
    read_index(*sy, "episode_windows", c.episode_windows);
  }

  c.split.seed = c.seed;
  c.train.seed = c.seed;
  return c;
}

}  // namespace

void AppConfig::validate() const {
  require(pipeline.window_s > 0.0 && pipeline.step_s > 0.0, "window and step must be positive");
  require(pipeline.target_len >= 1, "target_len must be positive");
  split.validate();
  train.validate();
  synth.validate();
  require(episode_windows >= 1, "episode_windows must be positive");
}

AppConfig default_config() {
  AppConfig c;
  c.train.grid = {{"alpha", {0.1, 0.5, 1.0}}, {"gamma1", {0.1, 0.5, 1.0}}, {"gamma2", {0.1, 0.5, 1.0}}};
  return c;
}

AppConfig parse_config(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    AppConfig c = from_json(j);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config has a value of the wrong type: ") + e.what());
  }
}

AppConfig load_config(const std::filesystem::path& path) { return parse_config(read_text(path)); }

std::string dump_config(const AppConfig& config) { return to_json(config).dump(2) + "\n"; }

void apply_override(AppConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string_view::npos && eq > 0, "override '" + std::string(assignment) +
                                                      "' must look like section.key=value");
  const std::string path(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));

  Json j = to_json(config);
  Json* node = &j;
  size_t begin = 0;
  while (true) {
    const auto dot = path.find('.', begin);
    const std::string key = path.substr(begin, dot == std::string::npos ? std::string::npos : dot - begin);
    const bool last = dot == std::string::npos;
    const bool in_grid = node != &j && node == &j["grid"];
    if (!node->contains(key) && !(last && in_grid)) {
      throw InvalidInput("unknown config key '" + path + "'");
    }
    node = &(*node)[key];
    if (last) break;
    begin = dot + 1;
  }
  *node = Json::accept(text) ? Json::parse(text) : Json(text);

  // Grid axes are ordered; re-serializing keeps the override in place.
  AppConfig updated;
  try {
    updated = from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("override '" + path + "' has the wrong type: " + e.what());
  }
  updated.validate();
  config = std::move(updated);
}

}  // namespace ucahar
