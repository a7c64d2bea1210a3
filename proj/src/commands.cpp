#include "ucahar/commands.hpp"

#include "ucahar/io.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace ucahar {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kStreamSuffix = ".stream.csv";
constexpr std::string_view kAnnotationSuffix = ".annotations.csv";

struct Prepared {
  PreparedData data;
  LabelSchema schema;
};

Prepared load_prepared(const fs::path& data_dir) {
  return {read_dataset_csv(data_dir / kDatasetFile), read_schema_csv(data_dir / kSchemaFile)};
}

std::string summary(const std::array<MetricsReport, 3>& reports) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "activity %.3f/%.3f  context %.3f/%.3f  user %.3f/%.3f",
                reports[0].macro_mcc, reports[0].macro_f1, reports[1].macro_mcc,
                reports[1].macro_f1, reports[2].macro_mcc, reports[2].macro_f1);
  return buf;
}

void write_reports(const fs::path& stem, const std::array<MetricsReport, 3>& reports) {
  fs::path csv = stem;
  csv += ".csv";
  fs::path txt = stem;
  txt += ".txt";
  write_metrics_csv(csv, reports);
  write_text(txt, render_metrics_table(reports));
}

}  // namespace

void run_gen_synth(const AppConfig& config, const fs::path& out_dir, std::ostream& log) {
  fs::create_directories(out_dir);
  write_synth_recordings(config.synth, config.seed, out_dir, config.episode_windows);
  write_text(out_dir / "config.json", dump_config(config));
  log << "wrote recordings for " << config.synth.n_users << " users to " << out_dir.string() << '\n';
}

void run_prepare(const AppConfig& config, const fs::path& input_dir, const fs::path& out_dir,
                 std::ostream& log) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(input_dir)) {
    const std::string file = entry.path().filename().string();
    if (file.size() > kStreamSuffix.size() && file.ends_with(kStreamSuffix)) {
      names.push_back(file.substr(0, file.size() - kStreamSuffix.size()));
    }
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) throw IoError("no *.stream.csv files in '" + input_dir.string() + "'");

  std::vector<SensorStream> streams;
  std::vector<std::vector<Annotation>> annotations;
  std::vector<Annotation> all;
  for (const auto& name : names) {
    streams.push_back(read_stream_csv(input_dir / (name + std::string(kStreamSuffix))));
    annotations.push_back(read_annotations_csv(input_dir / (name + std::string(kAnnotationSuffix))));
    all.insert(all.end(), annotations.back().begin(), annotations.back().end());
    if (streams.back().channel_names != streams.front().channel_names) {
      throw SchemaError("stream '" + name + "' has different channels than '" + names.front() + "'");
    }
  }
  const LabelSchema schema = LabelSchema::from_annotations(all);
  const auto channel_names = streams.front().channel_names;
  const ChannelLayout layout = ChannelLayout::from_names(channel_names);

  std::vector<Instance> instances;
  PipelineStats total;
  for (size_t i = 0; i < streams.size(); ++i) {
    PipelineStats stats;
    auto built = build_instances(streams[i], annotations[i], schema, layout, config.pipeline, &stats);
    std::move(built.begin(), built.end(), std::back_inserter(instances));
    total.segments += stats.segments;
    total.dropped_conflicts += stats.dropped_conflicts;
    total.dropped_unlabelled += stats.dropped_unlabelled;
  }

  std::vector<std::string> warnings;
  DatasetSplit split = split_dataset(std::move(instances), config.split, &warnings);
  for (const auto& w : warnings) log << "warning: " << w << '\n';
  const Normalizer normalizer = normalize_splits(split);

  fs::create_directories(out_dir);
  write_dataset_csv(out_dir / kDatasetFile, split, channel_names);
  write_schema_csv(out_dir / kSchemaFile, schema);
  write_normalizer_csv(out_dir / kNormalizerFile, normalizer, feature_names(layout, channel_names));
  write_text(out_dir / "config.json", dump_config(config));
  log << "segments " << total.segments << ", dropped (conflict) " << total.dropped_conflicts
      << ", dropped (no user) " << total.dropped_unlabelled << '\n'
      << "instances train " << split.train.size() << ", val " << split.val.size() << ", test "
      << split.test.size() << '\n';
}

RunArtifact run_train(const AppConfig& config, const fs::path& data_dir, const fs::path& out_dir,
                      std::ostream& log) {
  const Prepared prepared = load_prepared(data_dir);
  const DatasetSplit& split = prepared.data.split;
  fs::create_directories(out_dir);

  auto result = train(config.train, prepared.schema, split.train, split.val,
                      [&](const EpochRecord& e) {
                        log << "epoch " << e.epoch << "  loss " << e.train_loss.total << "  val "
                            << summary(e.validation) << '\n';
                      });
  const auto& history = result.history;
  log << "best epoch " << history.best_epoch << " (val activity MCC " << history.best_score
      << ")" << (history.early_stopped ? ", stopped early" : "") << '\n';

  RunArtifact artifact;
  artifact.run_id = "train-seed" + std::to_string(config.seed);
  artifact.config_snapshot = out_dir / "config.json";
  artifact.history = out_dir / "history.csv";
  artifact.checkpoint = out_dir / "checkpoint.json";
  write_text(artifact.config_snapshot, dump_config(config));
  write_step_history(artifact.history, history.steps);
  write_checkpoint(artifact.checkpoint, result.params);
  render_loss_curves(history, out_dir / "loss_curves");

  const double threshold = config.train.threshold;
  const auto val = evaluate(result.params, prepared.schema, split.val, threshold);
  write_reports(out_dir / "metrics_val", val.reports);
  artifact.reports.push_back(out_dir / "metrics_val.csv");
  if (!split.test.empty()) {
    const auto test = evaluate(result.params, prepared.schema, split.test, threshold);
    write_reports(out_dir / "metrics_test", test.reports);
    artifact.reports.push_back(out_dir / "metrics_test.csv");
    log << "test " << summary(test.reports) << '\n';
  }
  artifact.verify();
  return artifact;
}

void run_grid(const AppConfig& config, const fs::path& data_dir, const fs::path& out_dir,
              std::ostream& log) {
  const Prepared prepared = load_prepared(data_dir);
  const auto result =
      grid_search(config.train, prepared.schema, prepared.data.split.train, prepared.data.split.val);
  fs::create_directories(out_dir);

  std::ostringstream table;
  table << "trial";
  for (const auto& [name, values] : config.train.grid) table << ',' << name;
  table << ",best_epoch,val_activity_mcc\n";
  for (size_t i = 0; i < result.trials.size(); ++i) {
    const auto& trial = result.trials[i];
    table << i;
    for (const auto& [name, value] : trial.point) table << ',' << format_double(value);
    table << ',' << trial.history.best_epoch << ',' << format_double(trial.score) << '\n';
    log << "trial " << i << "  val activity MCC " << trial.score << '\n';
  }
  write_text(out_dir / "grid.csv", table.str());

  AppConfig best = config;
  best.train = result.best;
  write_text(out_dir / "best_config.json", dump_config(best));
  log << "best trial " << result.best_index << '\n';
}

void run_eval(const AppConfig& config, const fs::path& data_dir, const fs::path& checkpoint,
              const std::string& split_name, const fs::path& out_dir, std::ostream& log) {
  const Prepared prepared = load_prepared(data_dir);
  const DatasetSplit& split = prepared.data.split;
  const std::vector<Instance>* set = nullptr;
  if (split_name == "train") set = &split.train;
  if (split_name == "val") set = &split.val;
  if (split_name == "test") set = &split.test;
  if (set == nullptr) throw InvalidInput("split must be train, val or test, not '" + split_name + "'");

  const auto params = read_checkpoint(checkpoint);
  const auto ev = evaluate(params, prepared.schema, *set, config.train.threshold);
  fs::create_directories(out_dir);
  write_reports(out_dir / ("metrics_" + split_name), ev.reports);
  log << render_metrics_table(ev.reports);
}

void run_ablate(const AppConfig& config, const fs::path& data_dir, const fs::path& out_dir,
                std::ostream& log) {
  const Prepared prepared = load_prepared(data_dir);
  const DatasetSplit& split = prepared.data.split;
  require(!split.test.empty(), "ablation needs a non-empty test split");
  const auto rows = ablate(config.train, prepared.schema, split.train, split.val, split.test);
  fs::create_directories(out_dir);
  for (const auto& row : rows) {
    write_metrics_csv(out_dir / ("metrics_" + std::string(to_string(row.variant)) + ".csv"),
                      row.test);
  }
  const std::string table = render_ablation_table(rows);
  write_text(out_dir / "ablation.txt", table);
  write_text(out_dir / "config.json", dump_config(config));
  log << table;
}

}  // namespace ucahar
