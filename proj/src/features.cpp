#include "ucahar/pipeline.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>

namespace ucahar {

namespace {

// Linear-interpolated quantile of sorted data (position q * (n - 1)).
double sorted_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return sorted_quantile(values, 0.5);
}

void channel_features(const Vector<double>& x, Eigen::Ref<Vector<double>> out) {
  const auto n = static_cast<double>(x.size());
  const double mean = x.mean();
  const double var = (x.array() - mean).square().sum() / n;

  std::vector<double> sorted(x.data(), x.data() + x.size());
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted_quantile(sorted, 0.5);
  std::vector<double> deviations(sorted.size());
  std::transform(sorted.begin(), sorted.end(), deviations.begin(),
                 [median](double v) { return std::abs(v - median); });

  // Power over the positive-frequency bins, DC excluded.
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  const std::vector<double> samples(x.data(), x.data() + x.size());
  fft.fwd(spectrum, samples);
  const size_t half = samples.size() / 2;
  std::vector<double> power(half + 1, 0.0);
  double total = 0.0;
  for (size_t k = 1; k <= half; ++k) {
    power[k] = std::norm(spectrum[k]);
    total += power[k];
  }
  // Constant signals leave only round-off in the AC bins.
  const double floor = 1e-20 * std::max(1.0, std::norm(spectrum[0]));
  double dominant = 0.0;
  double entropy = 0.0;
  if (total > floor) {
    size_t best = 1;
    for (size_t k = 2; k <= half; ++k) {
      if (power[k] > power[best]) best = k;
    }
    dominant = static_cast<double>(best);
    for (size_t k = 1; k <= half; ++k) {
      const double p = power[k] / total;
      if (p > 0.0) entropy -= p * std::log(p);
    }
  }

  out(0) = mean;
  out(1) = std::sqrt(var);
  out(2) = sorted.front();
  out(3) = sorted.back();
  out(4) = median;
  out(5) = median_of(std::move(deviations));
  out(6) = sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
  out(7) = x.squaredNorm() / n;
  out(8) = dominant;
  out(9) = entropy;
}

}  // namespace

ChannelLayout ChannelLayout::from_names(std::span<const std::string> names) {
  ChannelLayout layout;
  layout.channels = static_cast<Index>(names.size());
  std::map<std::string, std::array<Index, 3>> axes;
  std::map<std::string, int> axis_count;
  auto axis_of = [](const std::string& name) -> int {
    if (name.size() < 3 || name[name.size() - 2] != '_') return -1;
    switch (name.back()) {
      case 'x': return 0;
      case 'y': return 1;
      case 'z': return 2;
      default: return -1;
    }
  };
  for (size_t i = 0; i < names.size(); ++i) {
    const int axis = axis_of(names[i]);
    if (axis < 0) continue;
    const auto prefix = names[i].substr(0, names[i].size() - 2);
    if (!axes.contains(prefix)) axes[prefix] = {-1, -1, -1};
    axes[prefix][static_cast<size_t>(axis)] = static_cast<Index>(i);
    ++axis_count[prefix];
  }
  std::vector<bool> grouped(names.size(), false);
  for (size_t i = 0; i < names.size(); ++i) {
    if (grouped[i]) continue;
    const int axis = axis_of(names[i]);
    if (axis >= 0) {
      const auto prefix = names[i].substr(0, names[i].size() - 2);
      const auto& idx = axes[prefix];
      if (axis_count[prefix] == 3 && idx[0] >= 0 && idx[1] >= 0 && idx[2] >= 0) {
        layout.groups.push_back({prefix, {idx[0], idx[1], idx[2]}});
        for (auto c : idx) grouped[static_cast<size_t>(c)] = true;
        continue;
      }
    }
    layout.groups.push_back({names[i], {static_cast<Index>(i)}});
    grouped[i] = true;
  }
  return layout;
}

ChannelLayout ChannelLayout::singletons(Index channels) {
  ChannelLayout layout;
  layout.channels = channels;
  for (Index c = 0; c < channels; ++c) layout.groups.push_back({"ch" + std::to_string(c), {c}});
  return layout;
}

Index ChannelLayout::tri_axial_groups() const {
  return static_cast<Index>(std::count_if(groups.begin(), groups.end(),
                                          [](const Group& g) { return g.channels.size() == 3; }));
}

Index feature_dim(const ChannelLayout& layout) {
  return layout.channels * kPerChannelFeatures + layout.tri_axial_groups() * kPerSensorFeatures;
}

std::vector<std::string> feature_names(const ChannelLayout& layout,
                                       std::span<const std::string> channel_names) {
  static const char* per_channel[] = {"mean", "std", "min", "max", "median",
                                      "mad", "iqr", "energy", "dominant_bin", "spectral_entropy"};
  std::vector<std::string> names;
  for (Index c = 0; c < layout.channels; ++c) {
    const std::string base = c < static_cast<Index>(channel_names.size())
                                 ? channel_names[static_cast<size_t>(c)]
                                 : "ch" + std::to_string(c);
    for (const char* f : per_channel) names.push_back(base + ":" + f);
  }
  for (const auto& g : layout.groups) {
    if (g.channels.size() != 3) continue;
    names.push_back(g.name + ":magnitude_mean");
    names.push_back(g.name + ":magnitude_std");
  }
  return names;
}

FeatureVector extract_features(const RawWindow& window, const ChannelLayout& layout) {
  require(window.channels() == layout.channels, "window channel count does not match layout");
  require(window.channel_present.size() == window.channels(), "channel presence mask has wrong size");
  require(window.snapshots() >= 2, "window needs at least 2 snapshots");

  const Index dim = feature_dim(layout);
  FeatureVector out;
  out.values = Vector<double>::Zero(dim);
  out.missing = Mask::Constant(dim, false);

  for (Index c = 0; c < layout.channels; ++c) {
    const Index offset = c * kPerChannelFeatures;
    if (!window.channel_present(c)) {
      out.missing.segment(offset, kPerChannelFeatures).setConstant(true);
      continue;
    }
    const Vector<double> row = window.data.row(c).transpose();
    channel_features(row, out.values.segment(offset, kPerChannelFeatures));
  }

  Index offset = layout.channels * kPerChannelFeatures;
  for (const auto& g : layout.groups) {
    if (g.channels.size() != 3) continue;
    const bool present = std::all_of(g.channels.begin(), g.channels.end(),
                                      [&](Index c) { return window.channel_present(c); });
    if (!present) {
      out.missing.segment(offset, kPerSensorFeatures).setConstant(true);
    } else {
      Vector<double> magnitude = Vector<double>::Zero(window.snapshots());
      for (Index c : g.channels) magnitude += window.data.row(c).transpose().cwiseAbs2();
      magnitude = magnitude.cwiseSqrt();
      const double mean = magnitude.mean();
      out.values(offset) = mean;
      out.values(offset + 1) =
          std::sqrt((magnitude.array() - mean).square().sum() / static_cast<double>(magnitude.size()));
    }
    offset += kPerSensorFeatures;
  }
  return out;
}

Normalizer fit_normalizer(std::span<const FeatureVector> train_features) {
  require(train_features.size() >= 2, "normalizer needs at least 2 training instances");
  const Index dim = train_features.front().size();
  Vector<double> sum = Vector<double>::Zero(dim);
  Vector<double> count = Vector<double>::Zero(dim);
  for (const auto& f : train_features) {
    require(f.size() == dim && f.missing.size() == dim, "feature dimension mismatch");
    for (Index i = 0; i < dim; ++i) {
      if (f.missing(i)) continue;
      sum(i) += f.values(i);
      count(i) += 1.0;
    }
  }
  Normalizer norm;
  norm.mean = Vector<double>::Zero(dim);
  for (Index i = 0; i < dim; ++i) {
    if (count(i) > 0.0) norm.mean(i) = sum(i) / count(i);
  }
  Vector<double> sq = Vector<double>::Zero(dim);
  for (const auto& f : train_features) {
    for (Index i = 0; i < dim; ++i) {
      if (f.missing(i)) continue;
      const double d = f.values(i) - norm.mean(i);
      sq(i) += d * d;
    }
  }
  norm.scale = Vector<double>::Ones(dim);
  for (Index i = 0; i < dim; ++i) {
    if (count(i) > 0.0) norm.scale(i) = std::max(std::sqrt(sq(i) / count(i)), kStdFloor);
  }
  return norm;
}

FeatureVector normalize(const FeatureVector& features, const Normalizer& normalizer) {
  const Index dim = features.size();
  require(normalizer.mean.size() == dim && normalizer.scale.size() == dim,
          "normalizer dimension does not match features");
  require(features.missing.size() == dim, "missing mask dimension does not match features");
  FeatureVector out = features;
  const auto scaled = (features.values - normalizer.mean).array() / normalizer.scale.array();
  out.values = features.missing.select(0.0, scaled).matrix();
  return out;
}

}  // namespace ucahar
