#pragma once

#include "ucahar/labels.hpp"
#include "ucahar/types.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ucahar {

using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

// Raw multi-channel recording. values is channels x samples; NaN marks a
// missing reading.
struct SensorStream {
  std::string sensor_id;
  std::vector<std::string> channel_names;
  std::vector<double> timestamps;
  Matrix<double> values;

  Index channels() const { return values.rows(); }
  Index samples() const { return static_cast<Index>(timestamps.size()); }

  // Throws DataIntegrityError on non-increasing timestamps or shape mismatch.
  void validate() const;
};

// Variable-length slice of a stream covering [start_time, end_time).
struct Segment {
  double start_time = 0.0;
  double end_time = 0.0;
  std::vector<double> timestamps;
  Matrix<double> values;
};

// Median spacing between consecutive timestamps.
double nominal_sample_period(std::span<const double> timestamps);

// Sliding windows starting at t0 + i * step_s while the window fits inside the
// recorded span (last timestamp plus one nominal period). Windows holding
// fewer than half of window_s / period samples are dropped.
std::vector<Segment> segment_windows(const SensorStream& stream, double window_s, double step_s);

// Fixed-length model input: channels x target_len, channels flagged absent
// are zero rows.
struct RawWindow {
  Matrix<double> data;
  double start_time = 0.0;
  double end_time = 0.0;
  Mask channel_present;

  Index channels() const { return data.rows(); }
  Index snapshots() const { return data.cols(); }
};

// Resamples every channel of a segment to target_len. A channel with fewer
// than half finite samples is marked absent; remaining gaps are filled with
// the channel's finite mean before resampling.
RawWindow make_raw_window(const Segment& segment, Index target_len);

// Grouping of channels into sensors. Groups of exactly three channels are
// treated as tri-axial and get magnitude features.
struct ChannelLayout {
  struct Group {
    std::string name;
    std::vector<Index> channels;
    bool operator==(const Group&) const = default;
  };
  Index channels = 0;
  std::vector<Group> groups;

  // Channels named <prefix>_x, <prefix>_y, <prefix>_z form one tri-axial group;
  // every other channel is a singleton group.
  static ChannelLayout from_names(std::span<const std::string> names);
  static ChannelLayout singletons(Index channels);

  Index tri_axial_groups() const;
  bool operator==(const ChannelLayout&) const = default;
};

struct FeatureVector {
  Vector<double> values;
  Mask missing;

  Index size() const { return values.size(); }
};

// Per channel: mean, std, min, max, median, median absolute deviation,
// interquartile range, energy, dominant FFT bin, spectral entropy.
inline constexpr Index kPerChannelFeatures = 10;
// Per tri-axial sensor: magnitude mean and std.
inline constexpr Index kPerSensorFeatures = 2;

Index feature_dim(const ChannelLayout& layout);
std::vector<std::string> feature_names(const ChannelLayout& layout,
                                       std::span<const std::string> channel_names);

FeatureVector extract_features(const RawWindow& window, const ChannelLayout& layout);

inline constexpr double kStdFloor = 1e-8;

// Per-feature training statistics for z-normalization.
struct Normalizer {
  Vector<double> mean;
  Vector<double> scale;
};

Normalizer fit_normalizer(std::span<const FeatureVector> train_features);

// (f - mean) / scale on present entries, exactly 0 on missing ones.
FeatureVector normalize(const FeatureVector& features, const Normalizer& normalizer);

using ConflictTable = std::vector<std::pair<std::string, std::string>>;

enum class ConflictDecision { Keep, Drop };

// Drop iff both names of any configured pair are active.
ConflictDecision filter_conflicts(std::span<const std::string> active_names,
                                  const ConflictTable& conflicts);
ConflictDecision filter_conflicts(const LabelSet& labels, const LabelSchema& schema,
                                  const ConflictTable& conflicts);

struct Instance {
  RawWindow window;
  FeatureVector features;
  LabelSet labels;
  std::string user_id;
};

struct PipelineConfig {
  double window_s = 3.0;
  double step_s = 1.5;
  Index target_len = 50;
  ConflictTable conflict_pairs;
};

struct PipelineStats {
  Index segments = 0;
  Index dropped_conflicts = 0;
  Index dropped_unlabelled = 0;
};

// Segments, resamples, extracts features and encodes labels for one stream.
// Windows without an active user annotation are skipped; features are left
// unnormalized.
std::vector<Instance> build_instances(const SensorStream& stream,
                                      std::span<const Annotation> annotations,
                                      const LabelSchema& schema, const ChannelLayout& layout,
                                      const PipelineConfig& config, PipelineStats* stats = nullptr);

}  // namespace ucahar
