#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "techval/core/common.hpp"

namespace techval {

struct ConfusionMatrix {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;

  std::size_t total() const noexcept { return tp + tn + fp + fn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline constexpr double kDecisionThreshold = 0.5;

/// prob >= threshold predicts VP.
inline ConfusionMatrix confusion(const Targets& y, std::span<const double> probs,
                                 double threshold = kDecisionThreshold) {
  if (y.size() != probs.size()) throw DataError("confusion: labels and probabilities differ in length");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const bool predicted = probs[i] >= threshold;
    if (y[i]) {
      ++(predicted ? cm.tp : cm.fn);
    } else {
      ++(predicted ? cm.fp : cm.tn);
    }
  }
  return cm;
}

namespace detail {
inline double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }
}  // namespace detail

inline double accuracy(const ConfusionMatrix& cm) {
  return detail::ratio(static_cast<double>(cm.tp + cm.tn), static_cast<double>(cm.total()));
}
inline double precision(const ConfusionMatrix& cm) {
  return detail::ratio(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fp));
}
inline double recall(const ConfusionMatrix& cm) {
  return detail::ratio(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fn));
}
inline double f1(const ConfusionMatrix& cm) {
  return detail::ratio(2.0 * static_cast<double>(cm.tp), static_cast<double>(2 * cm.tp + cm.fp + cm.fn));
}

/// Sensitivity + specificity - 1. Undefined (throws) without both classes.
inline double youdens_j(const ConfusionMatrix& cm) {
  if (cm.tp + cm.fn == 0 || cm.tn + cm.fp == 0) throw DataError("Youden's J needs both classes in the truth");
  return static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn) +
         static_cast<double>(cm.tn) / static_cast<double>(cm.tn + cm.fp) - 1.0;
}

/// Matthews correlation; 0 when any marginal is empty.
inline double mcc(const ConfusionMatrix& cm) {
  const double tp = static_cast<double>(cm.tp), tn = static_cast<double>(cm.tn);
  const double fp = static_cast<double>(cm.fp), fn = static_cast<double>(cm.fn);
  const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (den == 0.0) return 0.0;
  return std::clamp((tp * tn - fp * fn) / std::sqrt(den), -1.0, 1.0);
}

struct ReliabilityBin {
  double lower = 0.0, upper = 0.0;
  std::size_t count = 0;
  double mean_confidence = 0.0;
  double positive_fraction = 0.0;

  friend bool operator==(const ReliabilityBin&, const ReliabilityBin&) = default;
};

/// Bin j of m covers (j/m, (j+1)/m]; the first bin also takes 0.
inline std::size_t bin_index(double p, std::size_t m) {
  if (p <= 0.0) return 0;
  if (p >= 1.0) return m - 1;
  auto j = static_cast<std::size_t>(std::ceil(p * static_cast<double>(m))) - 1;
  j = std::min(j, m - 1);
  // Repair floating-point misplacement against the exact edges.
  while (j > 0 && p <= static_cast<double>(j) / static_cast<double>(m)) --j;
  while (j + 1 < m && p > static_cast<double>(j + 1) / static_cast<double>(m)) ++j;
  return j;
}

inline std::vector<ReliabilityBin> reliability_bins(const Targets& y, std::span<const double> probs,
                                                    std::size_t m_bins = 10) {
  if (m_bins < 1) throw ConfigError("ece_bins must be >= 1");
  if (y.size() != probs.size()) throw DataError("reliability: labels and probabilities differ in length");
  std::vector<ReliabilityBin> bins(m_bins);
  std::vector<double> conf(m_bins, 0.0), pos(m_bins, 0.0);
  for (std::size_t j = 0; j < m_bins; ++j) {
    bins[j].lower = static_cast<double>(j) / static_cast<double>(m_bins);
    bins[j].upper = static_cast<double>(j + 1) / static_cast<double>(m_bins);
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(probs[i] >= 0.0 && probs[i] <= 1.0)) throw DataError("probability outside [0, 1]");
    const auto j = bin_index(probs[i], m_bins);
    ++bins[j].count;
    conf[j] += probs[i];
    pos[j] += y[i];
  }
  for (std::size_t j = 0; j < m_bins; ++j) {
    if (bins[j].count == 0) continue;
    const auto n = static_cast<double>(bins[j].count);
    bins[j].mean_confidence = std::clamp(conf[j] / n, bins[j].lower, bins[j].upper);
    bins[j].positive_fraction = pos[j] / n;
  }
  return bins;
}

inline double ece(const std::vector<ReliabilityBin>& bins) {
  std::size_t n = 0;
  for (const auto& b : bins) n += b.count;
  if (n == 0) return 0.0;
  double s = 0.0;
  for (const auto& b : bins) {
    s += static_cast<double>(b.count) / static_cast<double>(n) * std::abs(b.positive_fraction - b.mean_confidence);
  }
  return s;
}

struct MetricSet {
  double accuracy = 0, precision = 0, recall = 0, f1 = 0, youdens_j = 0, mcc = 0, ece = 0;
  ConfusionMatrix confusion;
  std::vector<ReliabilityBin> bins;

  friend bool operator==(const MetricSet&, const MetricSet&) = default;
};

inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"accuracy", "precision", "recall", "f1", "youdens_j", "mcc", "ece"};
  return names;
}

inline std::vector<double> metric_values(const MetricSet& m) {
  return {m.accuracy, m.precision, m.recall, m.f1, m.youdens_j, m.mcc, m.ece};
}

inline MetricSet evaluate(const Targets& y, std::span<const double> probs, std::size_t m_bins = 10,
                          double threshold = kDecisionThreshold) {
  MetricSet m;
  m.confusion = confusion(y, probs, threshold);
  m.accuracy = accuracy(m.confusion);
  m.precision = precision(m.confusion);
  m.recall = recall(m.confusion);
  m.f1 = f1(m.confusion);
  m.youdens_j = youdens_j(m.confusion);
  m.mcc = mcc(m.confusion);
  m.bins = reliability_bins(y, probs, m_bins);
  m.ece = ece(m.bins);
  return m;
}

}  // namespace techval
