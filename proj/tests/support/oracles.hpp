#pragma once

// Independent scalar-loop references used by the unit and acceptance tests.
// Nothing here calls the vectorized code it checks against.

#include "ucahar/batch.hpp"
#include "ucahar/labels.hpp"
#include "ucahar/metrics.hpp"
#include "ucahar/model.hpp"
#include "ucahar/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using ucahar::Index;
using ucahar::Matrix;
using ucahar::Vector;

inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

inline double weighted_bce(const Matrix<double>& logits, const Matrix<double>& targets,
                           const Vector<double>& weights) {
  double sum = 0.0;
  for (Index j = 0; j < logits.cols(); ++j) {
    for (Index c = 0; c < logits.rows(); ++c) {
      const double p = 1.0 / (1.0 + std::exp(-logits(c, j)));
      const double y = targets(c, j);
      sum += -weights(c) * (y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    }
  }
  return sum / static_cast<double>(logits.size());
}

inline double cross_entropy(const Matrix<double>& logits, const Matrix<double>& one_hot) {
  double sum = 0.0;
  for (Index j = 0; j < logits.cols(); ++j) {
    double z = 0.0;
    for (Index c = 0; c < logits.rows(); ++c) z += std::exp(logits(c, j));
    for (Index c = 0; c < logits.rows(); ++c) {
      if (one_hot(c, j) == 1.0) sum += -std::log(std::exp(logits(c, j)) / z);
    }
  }
  return sum / static_cast<double>(logits.cols());
}

struct Sets {
  std::vector<Index> positive;
  std::vector<Index> negative;
};

// Positive iff the two label vectors share an active position.
inline Sets pair_sets(Index anchor, const Matrix<double>& labels) {
  Sets s;
  for (Index j = 0; j < labels.cols(); ++j) {
    if (j == anchor) continue;
    bool shared = false;
    for (Index k = 0; k < labels.rows(); ++k) {
      if (labels(k, anchor) == 1.0 && labels(k, j) == 1.0) shared = true;
    }
    (shared ? s.positive : s.negative).push_back(j);
  }
  return s;
}

inline double cosine(const std::vector<double>& u, const std::vector<double>& v) {
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

inline std::vector<double> column(const Matrix<double>& m, Index j) {
  std::vector<double> out(static_cast<size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) out[static_cast<size_t>(i)] = m(i, j);
  return out;
}

inline std::vector<double> mean_of(const Matrix<double>& m, const std::vector<Index>& cols) {
  std::vector<double> out(static_cast<size_t>(m.rows()), 0.0);
  for (Index j : cols) {
    for (Index i = 0; i < m.rows(); ++i) out[static_cast<size_t>(i)] += m(i, j);
  }
  for (auto& v : out) v = cols.empty() ? 0.0 : v / static_cast<double>(cols.size());
  return out;
}

// One anchor at a time: two-way softmax over (sim to positive mean, sim to
// negative mean), cross-entropy on the positive side.
inline double contrastive(const Matrix<double>& fused, const Matrix<double>& labels) {
  double sum = 0.0;
  for (Index a = 0; a < fused.cols(); ++a) {
    const Sets s = pair_sets(a, labels);
    if (s.positive.empty()) continue;
    const auto x = column(fused, a);
    const double sp = cosine(x, mean_of(fused, s.positive));
    const double sn = cosine(x, mean_of(fused, s.negative));
    sum += -std::log(std::exp(sp) / (std::exp(sp) + std::exp(sn)));
  }
  return sum / static_cast<double>(fused.cols());
}

struct Counts {
  long long tp = 0, fp = 0, tn = 0, fn = 0;
};

inline double mcc(const Counts& c) {
  const long double tp = c.tp, fp = c.fp, tn = c.tn, fn = c.fn;
  const long double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (den == 0) return 0.0;
  return static_cast<double>((tp * tn - fp * fn) / std::sqrt(den));
}

inline double f1(const Counts& c) {
  const double d = 2.0 * static_cast<double>(c.tp) + static_cast<double>(c.fp + c.fn);
  return d == 0.0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / d;
}

inline std::vector<Counts> count(const ucahar::BinaryMatrix& pred, const ucahar::BinaryMatrix& truth) {
  std::vector<Counts> out(static_cast<size_t>(pred.cols()));
  for (Index c = 0; c < pred.cols(); ++c) {
    for (Index i = 0; i < pred.rows(); ++i) {
      auto& k = out[static_cast<size_t>(c)];
      const int p = pred(i, c), t = truth(i, c);
      if (p && t) ++k.tp;
      if (p && !t) ++k.fp;
      if (!p && !t) ++k.tn;
      if (!p && t) ++k.fn;
    }
  }
  return out;
}

// Every (start, end) pair produced by stepping a window across a regular grid,
// found by testing each candidate start independently.
struct WindowRef {
  double start;
  Index count;
};

inline std::vector<WindowRef> windows(const std::vector<double>& ts, double window_s, double step_s) {
  std::vector<double> diffs;
  for (size_t i = 1; i < ts.size(); ++i) diffs.push_back(ts[i] - ts[i - 1]);
  std::sort(diffs.begin(), diffs.end());
  const size_t n = diffs.size();
  const double period = n % 2 ? diffs[n / 2] : 0.5 * (diffs[n / 2 - 1] + diffs[n / 2]);
  const double limit = ts.back() + period + 1e-9 * std::max(1.0, std::abs(ts.back() + period));
  const auto expected = static_cast<Index>(std::lround(window_s / period));
  std::vector<WindowRef> out;
  for (Index i = 0;; ++i) {
    const double start = ts.front() + static_cast<double>(i) * step_s;
    if (start + window_s > limit) break;
    Index count = 0;
    for (double t : ts) {
      if (t >= start && t < start + window_s) ++count;
    }
    if (2 * count >= expected) out.push_back({start, count});
  }
  return out;
}

// Two-pass population mean and standard deviation of each row.
inline std::pair<std::vector<double>, std::vector<double>> two_pass(const Matrix<double>& rows_by_n) {
  std::vector<double> mean, sd;
  for (Index r = 0; r < rows_by_n.rows(); ++r) {
    double m = 0.0;
    for (Index j = 0; j < rows_by_n.cols(); ++j) m += rows_by_n(r, j);
    m /= static_cast<double>(rows_by_n.cols());
    double v = 0.0;
    for (Index j = 0; j < rows_by_n.cols(); ++j) v += (rows_by_n(r, j) - m) * (rows_by_n(r, j) - m);
    mean.push_back(m);
    sd.push_back(std::sqrt(v / static_cast<double>(rows_by_n.cols())));
  }
  return {mean, sd};
}

// Central differences of f at x with step h.
inline Vector<double> numeric_gradient(const std::function<double(const Vector<double>&)>& f,
                                       Vector<double> x, double h = 1e-4) {
  Vector<double> g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double keep = x(i);
    x(i) = keep + h;
    const double up = f(x);
    x(i) = keep - h;
    const double down = f(x);
    x(i) = keep;
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

// ||a - n|| / max(||a||, ||n||), 0 when both vanish.
inline double relative_error(const Vector<double>& analytic, const Vector<double>& numeric) {
  const double scale = std::max(analytic.norm(), numeric.norm());
  return scale == 0.0 ? 0.0 : (analytic - numeric).norm() / scale;
}

inline Matrix<double> random_binary(Index rows, Index cols, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution bit(p);
  Matrix<double> m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = bit(rng) ? 1.0 : 0.0;
  }
  return m;
}

inline Matrix<double> random_one_hot(Index rows, Index cols, std::mt19937_64& rng) {
  std::uniform_int_distribution<Index> pick(0, rows - 1);
  Matrix<double> m = Matrix<double>::Zero(rows, cols);
  for (Index j = 0; j < cols; ++j) m(pick(rng), j) = 1.0;
  return m;
}

inline Matrix<double> random_normal(Index rows, Index cols, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  Matrix<double> m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  }
  return m;
}

// Small random model input with matching shapes.
inline ucahar::SequenceBatch<double> random_sequence(const ucahar::ModelConfig& mc, Index batch,
                                                     std::mt19937_64& rng) {
  ucahar::SequenceBatch<double> b;
  for (Index t = 0; t < mc.snapshots; ++t) b.steps.push_back(random_normal(mc.channels, batch, rng));
  b.features = random_normal(mc.feature_dim, batch, rng);
  return b;
}

// Frozen outputs of scipy.signal.resample (FFT method) for short signals
// covering odd/even lengths in both directions.
struct ResampleCase {
  std::vector<double> input;
  std::vector<double> expected;
};

inline const std::vector<ResampleCase>& scipy_resample_cases() {
  static const std::vector<ResampleCase> cases = {
      {{0.0012, 0.2987, -0.2741, -0.8906, -0.4547, -0.9916, 0.0601},
       {0.0012000000000001215, 0.04782424990456389, 0.36135810353039555, 0.06597182791525533,
        -0.7233078117445207, -0.9323843097585176, -0.5169514545371359, -0.49756229736497515,
        -0.9384875535965281, -0.8365060876638336, -0.11323985508078213, 0.22322804553893616}},
      {{1.3402, -0.4922, -0.6205, 0.4898, 0.3569, 0.1054, -0.9305, -0.0293, 0.6953, -1.3442,
        -0.4576, -1.9012},
       {-0.36810828910761184, 0.17089013967692215, -0.08668014100036506, -0.11414280736326987,
        -0.7635839022056756}},
      {{-1.2895, -1.8417, -0.2351, -1.2674, 0.2713, 0.1568, -0.1869, -2.5168},
       {-1.7931124999999999, -1.1258729144502846, -0.7026373935707801, -0.2323124999999999,
        0.4566214795326209, -1.784661171511556}},
      {{-0.5387, -0.0485, 0.1133, -1.5301, -0.4778, -0.9785, -0.8088, 1.0609, -0.8075, -0.0325},
       {-0.5386999999999998, -0.5745882541622171, 0.3039264097694528, 0.29845611790635423,
        -0.8960802859106342, -1.540375090307457, -0.8399538724851002, -0.2587996670882173,
        -0.9785, -1.4445548618104551, -0.11177986273148287, 1.0824003552146124,
        0.17776130211172553, -0.8948671988965176, -0.35523369075396105, 0.09376859914389762}},
      {{0.8844, -0.5836, -0.1117, 0.1105, 0.0638, -1.2251, 0.0761, 1.3588, -1.5471},
       {-0.36902876964391246, 0.1767171886849493, -0.5764557865032447, 0.33592292301776366}},
  };
  return cases;
}

}  // namespace oracle
