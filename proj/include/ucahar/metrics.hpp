#pragma once

#include "ucahar/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ucahar {

enum class HeadKind { Activity, Context, User };

std::string_view to_string(HeadKind head);
HeadKind parse_head_kind(std::string_view text);

using BinaryMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

// Per-label counts from N x C binary matrices (rows are instances).
std::vector<ConfusionCounts> confusion_counts(const BinaryMatrix& predicted, const BinaryMatrix& truth);

// Matthews correlation; 0 whenever a denominator factor vanishes.
double mcc(const ConfusionCounts& c);

double precision(const ConfusionCounts& c);  // 0 when tp + fp = 0
double recall(const ConfusionCounts& c);     // 0 when tp + fn = 0
double f1(const ConfusionCounts& c);         // 0 when precision + recall = 0

double macro_f1(const std::vector<ConfusionCounts>& counts);
double macro_mcc(const std::vector<ConfusionCounts>& counts);

// N x C logits to binary predictions. Binary heads: logit > logit(threshold).
// User head: one-hot argmax, ties to the lowest index.
BinaryMatrix threshold_predictions(const Matrix<double>& logits, HeadKind head,
                                   double threshold = 0.5);

struct LabelMetrics {
  std::string label;
  ConfusionCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double mcc = 0.0;
};

struct MetricsReport {
  HeadKind head = HeadKind::Activity;
  std::vector<LabelMetrics> per_label;
  double macro_mcc = 0.0;
  double macro_f1 = 0.0;
};

MetricsReport make_report(HeadKind head, const std::vector<std::string>& label_names,
                          const BinaryMatrix& predicted, const BinaryMatrix& truth);

}  // namespace ucahar
