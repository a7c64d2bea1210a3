#include "ucahar/commands.hpp"
#include "ucahar/config.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

// Flags registered here are shorthands for config keys.
struct Shorthand {
  const char* flag;
  const char* key;
  const char* help;
};

constexpr Shorthand kTrainFlags[] = {
    {"--epochs", "train.max_epochs", "Maximum epochs"},
    {"--batch-size", "train.batch_size", "Mini-batch size"},
    {"--lr", "train.learning_rate", "Learning rate"},
    {"--patience", "train.patience", "Early-stop patience"},
    {"--alpha", "train.alpha", "Contrastive loss weight"},
    {"--gamma1", "train.gamma1", "Context loss weight"},
    {"--gamma2", "train.gamma2", "User loss weight"},
    {"--ablation", "train.ablation", "full, no_UI, no_CL or no_TS"},
    {"--pairing-scope", "train.pairing_scope", "activity, activity+context or all"},
    {"--hidden-size", "model.hidden_size", "LSTM width"},
    {"--encoding-dim", "model.encoding_dim", "Encoder output size"},
};

ucahar::AppConfig resolve(const Common& common,
                          const std::vector<std::pair<std::string, std::string>>& flags) {
  ucahar::AppConfig config =
      common.config_path.empty() ? ucahar::default_config() : ucahar::load_config(common.config_path);
  for (const auto& o : common.overrides) ucahar::apply_override(config, o);
  for (const auto& [key, value] : flags) ucahar::apply_override(config, key + "=" + value);
  if (common.seed) ucahar::apply_override(config, "seed=" + std::to_string(*common.seed));
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-task activity, context and user recognition from sensor windows"};
  app.require_subcommand(1);

  Common common;
  app.add_option("-c,--config", common.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--set", common.overrides, "Config override, section.key=value (repeatable)");
  app.add_option("--seed", common.seed, "Seed for splitting, training and synthesis");

  std::string in_dir, out_dir, data_dir, checkpoint, split = "test";
  std::vector<std::pair<std::string, std::string>> flags;
  std::vector<std::string> flag_values(std::size(kTrainFlags));

  auto* gen = app.add_subcommand("gen-synth", "Write synthetic stream and annotation files");
  gen->add_option("-o,--out", out_dir, "Output directory")->required();

  auto* prepare = app.add_subcommand("prepare", "Raw recordings to instances, schema and normalizer");
  prepare->add_option("-i,--input", in_dir, "Directory of *.stream.csv / *.annotations.csv")
      ->required()
      ->check(CLI::ExistingDirectory);
  prepare->add_option("-o,--out", out_dir, "Prepared-data directory")->required();

  auto* train = app.add_subcommand("train", "Train one model");
  auto* grid = app.add_subcommand("grid", "Grid search over the config's grid section");
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  auto* ablate = app.add_subcommand("ablate", "Train full, no_UI, no_CL and no_TS variants");
  for (auto* sub : {train, grid, eval, ablate}) {
    sub->add_option("-d,--data", data_dir, "Prepared-data directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    sub->add_option("-o,--out", out_dir, "Output directory")->required();
  }
  for (auto* sub : {train, grid, ablate}) {
    for (size_t i = 0; i < std::size(kTrainFlags); ++i) {
      sub->add_option(kTrainFlags[i].flag, flag_values[i], kTrainFlags[i].help);
    }
  }
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("--split", split, "train, val or test")
      ->check(CLI::IsMember({"train", "val", "test"}));

  CLI11_PARSE(app, argc, argv);

  for (size_t i = 0; i < std::size(kTrainFlags); ++i) {
    if (flag_values[i].empty()) continue;
    // String-valued keys need JSON quoting to survive override parsing.
    const std::string key = kTrainFlags[i].key;
    const bool text = key == "train.ablation" || key == "train.pairing_scope";
    flags.emplace_back(key, text ? "\"" + flag_values[i] + "\"" : flag_values[i]);
  }

  try {
    const ucahar::AppConfig config = resolve(common, flags);
    if (gen->parsed()) ucahar::run_gen_synth(config, out_dir, std::cout);
    if (prepare->parsed()) ucahar::run_prepare(config, in_dir, out_dir, std::cout);
    if (train->parsed()) ucahar::run_train(config, data_dir, out_dir, std::cout);
    if (grid->parsed()) ucahar::run_grid(config, data_dir, out_dir, std::cout);
    if (eval->parsed()) ucahar::run_eval(config, data_dir, checkpoint, split, out_dir, std::cout);
    if (ablate->parsed()) ucahar::run_ablate(config, data_dir, out_dir, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
