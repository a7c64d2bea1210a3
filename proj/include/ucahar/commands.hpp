#pragma once

#include "ucahar/config.hpp"
#include "ucahar/reporting.hpp"

#include <filesystem>
#include <ostream>
#include <string>

namespace ucahar {

// Prepared-data directory layout written by run_prepare.
inline constexpr const char* kDatasetFile = "dataset.csv";
inline constexpr const char* kSchemaFile = "schema.csv";
inline constexpr const char* kNormalizerFile = "normalizer.csv";

// Writes <user>.stream.csv / <user>.annotations.csv recordings.
void run_gen_synth(const AppConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

// Pairs every <name>.stream.csv in input_dir with <name>.annotations.csv,
// builds instances, splits per user and normalizes with training statistics.
void run_prepare(const AppConfig& config, const std::filesystem::path& input_dir,
                 const std::filesystem::path& out_dir, std::ostream& log);

// Outputs: config.json, checkpoint.json, history.csv, loss_curves.{csv,svg},
// metrics_val.csv and, when the test split is non-empty, metrics_test.{csv,txt}.
RunArtifact run_train(const AppConfig& config, const std::filesystem::path& data_dir,
                      const std::filesystem::path& out_dir, std::ostream& log);

// Outputs: grid.csv (one row per trial) and best_config.json.
void run_grid(const AppConfig& config, const std::filesystem::path& data_dir,
              const std::filesystem::path& out_dir, std::ostream& log);

// Evaluates a checkpoint on one split ("train", "val" or "test").
// Outputs: metrics_<split>.{csv,txt}.
void run_eval(const AppConfig& config, const std::filesystem::path& data_dir,
              const std::filesystem::path& checkpoint, const std::string& split_name,
              const std::filesystem::path& out_dir, std::ostream& log);

// Outputs: ablation.txt and metrics_<variant>.csv per variant.
void run_ablate(const AppConfig& config, const std::filesystem::path& data_dir,
                const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace ucahar
