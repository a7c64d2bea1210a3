#include "ucahar/metrics.hpp"

#include <cmath>

namespace ucahar {

std::string_view to_string(HeadKind head) {
  switch (head) {
    case HeadKind::Activity: return "activity";
    case HeadKind::Context: return "context";
    case HeadKind::User: return "user";
  }
  return "activity";
}

HeadKind parse_head_kind(std::string_view text) {
  if (text == "activity") return HeadKind::Activity;
  if (text == "context") return HeadKind::Context;
  if (text == "user") return HeadKind::User;
  throw InvalidInput("unknown head '" + std::string(text) + "'");
}

std::vector<ConfusionCounts> confusion_counts(const BinaryMatrix& predicted, const BinaryMatrix& truth) {
  require(predicted.rows() == truth.rows() && predicted.cols() == truth.cols(),
          "confusion_counts: prediction and truth shapes differ");
  require(((predicted.array() == 0) || (predicted.array() == 1)).all() &&
              ((truth.array() == 0) || (truth.array() == 1)).all(),
          "confusion_counts: entries must be binary");
  std::vector<ConfusionCounts> out(static_cast<size_t>(truth.cols()));
  for (Index c = 0; c < truth.cols(); ++c) {
    auto& k = out[static_cast<size_t>(c)];
    const auto p = predicted.col(c).array();
    const auto t = truth.col(c).array();
    k.tp = (p * t).count();
    k.fp = (p * (1 - t)).count();
    k.fn = ((1 - p) * t).count();
    k.tn = truth.rows() - k.tp - k.fp - k.fn;
  }
  return out;
}

double mcc(const ConfusionCounts& c) {
  const auto tp = static_cast<double>(c.tp);
  const auto fp = static_cast<double>(c.fp);
  const auto tn = static_cast<double>(c.tn);
  const auto fn = static_cast<double>(c.fn);
  const double a = tp + fp, b = tp + fn, d = tn + fp, e = tn + fn;
  if (a == 0.0 || b == 0.0 || d == 0.0 || e == 0.0) return 0.0;
  // Square roots taken pairwise so the product cannot overflow.
  return (tp * tn - fp * fn) / (std::sqrt(a * b) * std::sqrt(d * e));
}

double precision(const ConfusionCounts& c) {
  const auto denom = c.tp + c.fp;
  return denom == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(denom);
}

double recall(const ConfusionCounts& c) {
  const auto denom = c.tp + c.fn;
  return denom == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(denom);
}

double f1(const ConfusionCounts& c) {
  const double p = precision(c);
  const double r = recall(c);
  return p + r == 0.0 ? 0.0 : 2.0 * (p * r) / (p + r);
}

double macro_f1(const std::vector<ConfusionCounts>& counts) {
  if (counts.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : counts) sum += f1(c);
  return sum / static_cast<double>(counts.size());
}

double macro_mcc(const std::vector<ConfusionCounts>& counts) {
  if (counts.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : counts) sum += mcc(c);
  return sum / static_cast<double>(counts.size());
}

BinaryMatrix threshold_predictions(const Matrix<double>& logits, HeadKind head, double threshold) {
  require(logits.allFinite(), "threshold_predictions: logits must be finite");
  BinaryMatrix out = BinaryMatrix::Zero(logits.rows(), logits.cols());
  if (head == HeadKind::User) {
    for (Index i = 0; i < logits.rows(); ++i) {
      Index best = 0;
      logits.row(i).maxCoeff(&best);  // first maximum
      out(i, best) = 1;
    }
    return out;
  }
  require(threshold > 0.0 && threshold < 1.0, "decision threshold must lie in (0, 1)");
  const double cut = std::log(threshold / (1.0 - threshold));
  out = (logits.array() > cut).cast<int>().matrix();
  return out;
}

MetricsReport make_report(HeadKind head, const std::vector<std::string>& label_names,
                          const BinaryMatrix& predicted, const BinaryMatrix& truth) {
  require(static_cast<Index>(label_names.size()) == truth.cols(), "one name per label required");
  const auto counts = confusion_counts(predicted, truth);
  MetricsReport report;
  report.head = head;
  for (size_t c = 0; c < counts.size(); ++c) {
    const auto& k = counts[c];
    report.per_label.push_back({label_names[c], k, precision(k), recall(k), f1(k), mcc(k)});
  }
  report.macro_mcc = macro_mcc(counts);
  report.macro_f1 = macro_f1(counts);
  return report;
}

}  // namespace ucahar
