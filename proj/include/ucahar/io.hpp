#pragma once

#include "ucahar/labels.hpp"
#include "ucahar/model.hpp"
#include "ucahar/pipeline.hpp"
#include "ucahar/training.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ucahar {

// Comma-delimited text. Fields are never quoted, so names must not contain
// commas or line breaks.
std::vector<std::string> split_fields(std::string_view line);
std::string format_double(double value);  // shortest round-trip form
double parse_double(std::string_view text);

// Stream files: header "timestamp,<channel>,...", one row per sample, an
// empty field marks a missing value.
SensorStream read_stream_csv(const std::filesystem::path& path);
void write_stream_csv(const std::filesystem::path& path, const SensorStream& stream);

// Annotation files: header "start_s,end_s,label_name,label_kind".
std::vector<Annotation> read_annotations_csv(const std::filesystem::path& path);
void write_annotations_csv(const std::filesystem::path& path, std::span<const Annotation> annotations);

// Schema files: header "label_kind,name,index".
LabelSchema read_schema_csv(const std::filesystem::path& path);
void write_schema_csv(const std::filesystem::path& path, const LabelSchema& schema);

// Normalizer files: header "feature,mean,scale".
Normalizer read_normalizer_csv(const std::filesystem::path& path);
void write_normalizer_csv(const std::filesystem::path& path, const Normalizer& normalizer,
                          const std::vector<std::string>& feature_names = {});

// Prepared instances of all three splits in one file. Line 1 carries the
// dimensions, line 2 the column header, then one instance per line:
// split,user_id,start_s,end_s,activities,contexts,user,channels_present,
// features_missing,f0..f(D-1),x0..x(S*T-1). Bit columns are 0/1 strings,
// raw samples are channel-major.
struct PreparedData {
  std::vector<std::string> channel_names;
  ChannelLayout layout;
  DatasetSplit split;
};

void write_dataset_csv(const std::filesystem::path& path, const DatasetSplit& split,
                       const std::vector<std::string>& channel_names);
PreparedData read_dataset_csv(const std::filesystem::path& path);

// Checkpoint: JSON object {format, version, model: {...}, parameters: [...]}.
void write_checkpoint(const std::filesystem::path& path, const ModelParams<double>& params);
ModelParams<double> read_checkpoint(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace ucahar
