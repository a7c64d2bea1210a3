#pragma once

#include "ucahar/pipeline.hpp"
#include "ucahar/synth.hpp"
#include "ucahar/training.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace ucahar {

// Everything a CLI run needs. The top-level seed is copied into the split,
// training and synthetic-data settings.
struct AppConfig {
  std::uint64_t seed = 0;
  PipelineConfig pipeline;
  SplitSpec split;
  TrainConfig train;
  SynthSpec synth;
  Index episode_windows = 10;

  void validate() const;
};

// Defaults plus the stand-in grid alpha, gamma1, gamma2 in {0.1, 0.5, 1.0}.
AppConfig default_config();

// JSON with sections pipeline, split, model, train, grid and synth. Missing
// keys keep their defaults; unknown keys are rejected.
AppConfig parse_config(std::string_view text);
AppConfig load_config(const std::filesystem::path& path);
std::string dump_config(const AppConfig& config);

// "section.key=value". The value is read as JSON when it parses, otherwise as
// a string. Grid axes may be added ("grid.alpha=[0.1,1]").
void apply_override(AppConfig& config, std::string_view assignment);

}  // namespace ucahar
