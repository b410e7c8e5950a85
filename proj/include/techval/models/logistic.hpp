#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "techval/core/common.hpp"
#include "techval/models/scaler.hpp"

namespace techval {

struct LogisticParams {
  double alpha = 0.0;   // L1 share of the penalty, in [0, 1]
  double lambda = 0.0;  // penalty strength
  int epochs = 100;
  double learning_rate = 1.0;  // initial proximal step; shrunk by backtracking

  friend bool operator==(const LogisticParams&, const LogisticParams&) = default;
};

inline void validate(const LogisticParams& p) {
  if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) throw ConfigError("logistic alpha must lie in [0, 1]");
  if (!(p.lambda >= 0.0)) throw ConfigError("logistic lambda must be >= 0");
  if (p.epochs < 1) throw ConfigError("logistic epochs must be >= 1");
  if (!(p.learning_rate > 0.0)) throw ConfigError("logistic learning_rate must be > 0");
}

/// Elastic-net logistic regression on standardized inputs.
struct LogisticModel {
  LogisticParams params;
  Scaler scaler;
  std::vector<double> weights;  // on the standardized scale
  double intercept = 0.0;
  std::vector<double> loss_trace;  // penalized objective after each epoch

  double predict_one(std::span<const double> x) const {
    double z = intercept;
    for (std::size_t c = 0; c < weights.size(); ++c) z += weights[c] * scaler.apply(c, x[c]);
    return sigmoid(z);
  }

  /// Coefficients and intercept in the units of the raw features.
  std::pair<std::vector<double>, double> raw_coefficients() const {
    std::vector<double> w(weights.size());
    double b = intercept;
    for (std::size_t c = 0; c < weights.size(); ++c) {
      if (scaler.scale[c] == 0.0) {
        w[c] = weights[c];
      } else {
        w[c] = weights[c] / scaler.scale[c];
        b -= w[c] * scaler.mean[c];
      }
    }
    return {w, b};
  }

  friend bool operator==(const LogisticModel&, const LogisticModel&) = default;
};

namespace logistic {

/// Smooth part of the objective: mean logistic loss + lambda (1 - alpha) / 2 |w|^2.
inline double smooth_loss(const Matrix& Z, const Targets& y, std::span<const double> w, double b,
                          const LogisticParams& p) {
  double loss = 0.0;
  for (std::size_t r = 0; r < Z.rows(); ++r) {
    double z = b;
    const auto x = Z.row(r);
    for (std::size_t c = 0; c < w.size(); ++c) z += w[c] * x[c];
    loss += logistic_loss(z, y[r]);
  }
  double ridge = 0.0;
  for (double v : w) ridge += v * v;
  return loss / static_cast<double>(Z.rows()) + 0.5 * p.lambda * (1.0 - p.alpha) * ridge;
}

/// Gradient of smooth_loss; the last entry is the intercept derivative.
inline std::vector<double> smooth_gradient(const Matrix& Z, const Targets& y, std::span<const double> w, double b,
                                           const LogisticParams& p) {
  std::vector<double> g(w.size() + 1, 0.0);
  for (std::size_t r = 0; r < Z.rows(); ++r) {
    double z = b;
    const auto x = Z.row(r);
    for (std::size_t c = 0; c < w.size(); ++c) z += w[c] * x[c];
    const double residual = sigmoid(z) - y[r];
    for (std::size_t c = 0; c < w.size(); ++c) g[c] += residual * x[c];
    g.back() += residual;
  }
  const auto n = static_cast<double>(Z.rows());
  for (auto& v : g) v /= n;
  for (std::size_t c = 0; c < w.size(); ++c) g[c] += p.lambda * (1.0 - p.alpha) * w[c];
  return g;
}

inline double l1_penalty(std::span<const double> w, const LogisticParams& p) {
  double s = 0.0;
  for (double v : w) s += std::abs(v);
  return p.lambda * p.alpha * s;
}

inline double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace logistic

/// Proximal gradient descent (one full-batch step per epoch) with
/// backtracking, which keeps the penalized objective nonincreasing.
inline LogisticModel train_logistic(const Matrix& X, const Targets& y, const LogisticParams& params) {
  validate(params);
  if (X.rows() != y.size() || X.empty()) throw DataError("logistic: empty or misaligned training data");
  std::size_t pos = 0;
  for (int v : y) pos += v;
  if (pos == 0 || pos == y.size()) throw DataError("logistic: both classes must be present");

  LogisticModel m;
  m.params = params;
  m.scaler = Scaler::fit(X);
  const Matrix Z = m.scaler.transform(X);
  const std::size_t d = X.cols();
  m.weights.assign(d, 0.0);
  const double base = static_cast<double>(pos) / static_cast<double>(y.size());
  m.intercept = std::log(base / (1.0 - base));

  double step = params.learning_rate;
  double f = logistic::smooth_loss(Z, y, m.weights, m.intercept, params);
  std::vector<double> w_new(d);
  for (int epoch = 1; epoch <= params.epochs; ++epoch) {
    const auto g = logistic::smooth_gradient(Z, y, m.weights, m.intercept, params);
    step = std::min(params.learning_rate, step * 2.0);
    double f_new = f, b_new = m.intercept;
    for (int attempt = 0; attempt < 60; ++attempt) {
      for (std::size_t c = 0; c < d; ++c) {
        w_new[c] = logistic::soft_threshold(m.weights[c] - step * g[c], step * params.lambda * params.alpha);
      }
      b_new = m.intercept - step * g.back();
      f_new = logistic::smooth_loss(Z, y, w_new, b_new, params);
      // Sufficient-decrease test of the quadratic upper bound.
      double lin = 0.0, quad = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double delta = w_new[c] - m.weights[c];
        lin += g[c] * delta;
        quad += delta * delta;
      }
      const double db = b_new - m.intercept;
      lin += g.back() * db;
      quad += db * db;
      if (f_new <= f + lin + quad / (2.0 * step) + 1e-15) break;
      step *= 0.5;
    }
    if (!std::isfinite(f_new)) throw NumericError("logistic: nonfinite loss at epoch " + std::to_string(epoch));
    m.weights = w_new;
    m.intercept = b_new;
    f = f_new;
    m.loss_trace.push_back(f + logistic::l1_penalty(m.weights, params));
  }
  return m;
}

}  // namespace techval
