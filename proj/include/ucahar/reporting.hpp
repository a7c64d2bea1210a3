#pragma once

#include "ucahar/metrics.hpp"
#include "ucahar/training.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace ucahar {

// head,label,tp,fp,tn,fn,precision,recall,f1,mcc at full precision.
void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsReport> reports);
// Macro values are recomputed from the per-label rows.
std::vector<MetricsReport> read_metrics_csv(const std::filesystem::path& path);

// Fixed-width table, three decimals, with a macro row per head.
std::string render_metrics_table(std::span<const MetricsReport> reports);

// "MCC/Macro-F1" cell at three decimals, e.g. "0.592/0.762".
std::string format_cell(double mcc, double f1);

struct ScorePair {
  double mcc = 0.0;
  double f1 = 0.0;
};
// Accepts "0.592/0.762" and ".592/.762".
ScorePair parse_cell(std::string_view cell);

struct AblationTableRow {
  std::string variant;
  std::array<ScorePair, 3> heads;  // activity, context, user
};

// Rows are variants, columns the three heads.
std::string render_ablation_table(std::span<const AblationRow> rows);
std::vector<AblationTableRow> parse_ablation_table(std::string_view text);

// step,L_A,L_PP,L_U,L_d,L_total per optimizer step.
void write_step_history(const std::filesystem::path& path, std::span<const StepRecord> steps);
std::vector<StepRecord> read_step_history(const std::filesystem::path& path);

struct LossCurves {
  std::vector<Index> epochs;
  std::array<std::vector<double>, 5> series;  // L_A, L_PP, L_U, L_d, L_total
};

LossCurves loss_curves(const TrainHistory& history);

// Writes <prefix>.csv (epoch,L_A,L_PP,L_U,L_d,L_total) and <prefix>.svg.
// L_d is drawn even when its weight is zero. Returns {csv, svg}.
std::array<std::filesystem::path, 2> render_loss_curves(const TrainHistory& history,
                                                        const std::filesystem::path& prefix);
LossCurves read_loss_curves(const std::filesystem::path& csv);

// Files produced by one run. verify() checks that every referenced file
// exists and parses.
struct RunArtifact {
  std::string run_id;
  std::filesystem::path config_snapshot;
  std::filesystem::path history;
  std::vector<std::filesystem::path> reports;
  std::filesystem::path checkpoint;

  void verify() const;
};

}  // namespace ucahar
