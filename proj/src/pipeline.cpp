#include "ucahar/pipeline.hpp"

#include "ucahar/resample.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ucahar {

void SensorStream::validate() const {
  if (values.cols() != samples()) {
    throw DataIntegrityError("stream '" + sensor_id + "': " + std::to_string(values.cols()) +
                             " value columns for " + std::to_string(samples()) + " timestamps");
  }
  if (!channel_names.empty() && static_cast<Index>(channel_names.size()) != channels()) {
    throw DataIntegrityError("stream '" + sensor_id + "': channel name count mismatch");
  }
  for (size_t i = 1; i < timestamps.size(); ++i) {
    if (!(timestamps[i] > timestamps[i - 1])) {
      throw DataIntegrityError("stream '" + sensor_id + "': timestamps not strictly increasing at sample " +
                               std::to_string(i));
    }
  }
}

double nominal_sample_period(std::span<const double> timestamps) {
  require(timestamps.size() >= 2, "need at least two timestamps to estimate a sample period");
  std::vector<double> diffs(timestamps.size() - 1);
  for (size_t i = 1; i < timestamps.size(); ++i) diffs[i - 1] = timestamps[i] - timestamps[i - 1];
  const size_t mid = diffs.size() / 2;
  std::nth_element(diffs.begin(), diffs.begin() + static_cast<std::ptrdiff_t>(mid), diffs.end());
  double median = diffs[mid];
  if (diffs.size() % 2 == 0) {
    const double lower = *std::max_element(diffs.begin(), diffs.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  return median;
}

std::vector<Segment> segment_windows(const SensorStream& stream, double window_s, double step_s) {
  require(window_s > 0.0, "window length must be positive");
  require(step_s > 0.0 && step_s <= window_s, "step must be in (0, window]");
  stream.validate();
  if (stream.samples() < 2) return {};

  const auto& ts = stream.timestamps;
  const double period = nominal_sample_period(ts);
  const double expected = std::round(window_s / period);
  const double t0 = ts.front();
  const double record_end = ts.back() + period;
  const double tol = 1e-9 * std::max(1.0, std::abs(record_end));

  std::vector<Segment> out;
  for (Index i = 0;; ++i) {
    const double start = t0 + static_cast<double>(i) * step_s;
    const double end = start + window_s;
    if (end > record_end + tol) break;
    const auto first = std::lower_bound(ts.begin(), ts.end(), start);
    const auto last = std::lower_bound(ts.begin(), ts.end(), end);
    const Index count = static_cast<Index>(last - first);
    if (2.0 * static_cast<double>(count) < expected) continue;

    Segment seg;
    seg.start_time = start;
    seg.end_time = end;
    seg.timestamps.assign(first, last);
    seg.values = stream.values.middleCols(first - ts.begin(), count);
    out.push_back(std::move(seg));
  }
  return out;
}

RawWindow make_raw_window(const Segment& segment, Index target_len) {
  const Index channels = segment.values.rows();
  const Index n = segment.values.cols();
  require(n >= 2, "segment needs at least 2 samples to resample");

  RawWindow window;
  window.start_time = segment.start_time;
  window.end_time = segment.end_time;
  window.data = Matrix<double>::Zero(channels, target_len);
  window.channel_present = Mask::Constant(channels, false);

  for (Index c = 0; c < channels; ++c) {
    Vector<double> row = segment.values.row(c).transpose();
    const auto finite = row.array().isFinite();
    const Index present = finite.count();
    if (2 * present < n) continue;
    if (present < n) {
      const double mean = finite.select(row.array(), 0.0).sum() / static_cast<double>(present);
      row = finite.select(row.array(), mean).matrix();
    }
    window.data.row(c) = resample_fourier(row, target_len).transpose();
    window.channel_present(c) = true;
  }
  return window;
}

ConflictDecision filter_conflicts(std::span<const std::string> active_names,
                                  const ConflictTable& conflicts) {
  const std::set<std::string> active(active_names.begin(), active_names.end());
  for (const auto& [a, b] : conflicts) {
    if (active.contains(a) && active.contains(b)) return ConflictDecision::Drop;
  }
  return ConflictDecision::Keep;
}

ConflictDecision filter_conflicts(const LabelSet& labels, const LabelSchema& schema,
                                  const ConflictTable& conflicts) {
  const auto names = decode_labels(labels, schema);
  return filter_conflicts(names, conflicts);
}

std::vector<Instance> build_instances(const SensorStream& stream,
                                      std::span<const Annotation> annotations,
                                      const LabelSchema& schema, const ChannelLayout& layout,
                                      const PipelineConfig& config, PipelineStats* stats) {
  require(layout.channels == stream.channels(), "channel layout does not match the stream");
  PipelineStats local;
  std::vector<Instance> out;
  for (const auto& segment : segment_windows(stream, config.window_s, config.step_s)) {
    ++local.segments;
    const auto active = active_annotations(annotations, segment.start_time, segment.end_time);
    const bool has_user = std::any_of(active.begin(), active.end(),
                                      [](const Annotation& a) { return a.kind == LabelKind::User; });
    if (!has_user) {
      ++local.dropped_unlabelled;
      continue;
    }
    Instance inst;
    inst.labels = encode_labels(active, schema);
    if (filter_conflicts(inst.labels, schema, config.conflict_pairs) == ConflictDecision::Drop) {
      ++local.dropped_conflicts;
      continue;
    }
    inst.window = make_raw_window(segment, config.target_len);
    inst.features = extract_features(inst.window, layout);
    inst.user_id = schema.name_of(LabelKind::User, inst.labels.user_index());
    out.push_back(std::move(inst));
  }
  if (stats) {
    stats->segments += local.segments;
    stats->dropped_conflicts += local.dropped_conflicts;
    stats->dropped_unlabelled += local.dropped_unlabelled;
  }
  return out;
}

}  // namespace ucahar
