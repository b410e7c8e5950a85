#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "techval/core/common.hpp"
#include "techval/core/random.hpp"
#include "techval/models/scaler.hpp"

namespace techval {

struct MlpParams {
  int hidden = 100;
  double dropout = 0.0;  // applied to the inputs of the hidden layer while training
  int epochs = 30;
  double learning_rate = 0.005;
  int batch_size = 64;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

inline void validate(const MlpParams& p) {
  if (p.hidden < 1) throw ConfigError("mlp hidden must be >= 1");
  if (!(p.dropout >= 0.0 && p.dropout < 1.0)) throw ConfigError("mlp dropout must lie in [0, 1)");
  if (p.epochs < 1) throw ConfigError("mlp epochs must be >= 1");
  if (!(p.learning_rate > 0.0)) throw ConfigError("mlp learning_rate must be > 0");
  if (p.batch_size < 1) throw ConfigError("mlp batch_size must be >= 1");
}

/// Weights of a one-hidden-layer network, flattened as
/// [w1 (hidden x inputs, row-major) | b1 (hidden) | w2 (hidden) | b2].
struct MlpWeights {
  std::size_t inputs = 0, hidden = 0;
  std::vector<double> v;

  MlpWeights() = default;
  MlpWeights(std::size_t in, std::size_t h) : inputs(in), hidden(h), v(h * in + 2 * h + 1, 0.0) {}

  double* w1() { return v.data(); }
  const double* w1() const { return v.data(); }
  double* b1() { return v.data() + hidden * inputs; }
  const double* b1() const { return v.data() + hidden * inputs; }
  double* w2() { return b1() + hidden; }
  const double* w2() const { return b1() + hidden; }
  double& b2() { return v.back(); }
  double b2() const { return v.back(); }

  /// Output logit for an (already scaled, already masked) input row.
  double logit(std::span<const double> x, std::vector<double>* activations = nullptr) const {
    double z = b2();
    for (std::size_t j = 0; j < hidden; ++j) {
      const double* row = w1() + j * inputs;
      double a = b1()[j];
      for (std::size_t i = 0; i < inputs; ++i) a += row[i] * x[i];
      a = a > 0.0 ? a : 0.0;
      if (activations) (*activations)[j] = a;
      z += w2()[j] * a;
    }
    return z;
  }

  friend bool operator==(const MlpWeights&, const MlpWeights&) = default;
};

struct MlpModel {
  MlpParams params;
  std::uint64_t seed = 0;
  Scaler scaler;
  MlpWeights weights;
  std::vector<double> loss_trace;  // mean minibatch loss per epoch

  double predict_one(std::span<const double> x) const {
    std::vector<double> z(x.size());
    scaler.apply_row(x, z);
    return sigmoid(weights.logit(z));
  }

  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

namespace mlp {

/// Mean logistic loss over rows of Z and its gradient w.r.t. every weight
/// (no dropout). Rows are optionally masked/rescaled inputs.
inline double loss_and_gradient(const MlpWeights& w, const Matrix& Z, const Targets& y,
                                std::span<const std::size_t> rows, std::vector<double>& grad) {
  grad.assign(w.v.size(), 0.0);
  std::vector<double> act(w.hidden);
  const std::size_t in = w.inputs, h = w.hidden;
  double loss = 0.0;
  for (auto r : rows) {
    const auto x = Z.row(r);
    const double z = w.logit(x, &act);
    loss += logistic_loss(z, y[r]);
    const double dz = sigmoid(z) - y[r];
    double* g_w1 = grad.data();
    double* g_b1 = g_w1 + h * in;
    double* g_w2 = g_b1 + h;
    for (std::size_t j = 0; j < h; ++j) {
      g_w2[j] += dz * act[j];
      if (act[j] <= 0.0) continue;
      const double da = dz * w.w2()[j];
      g_b1[j] += da;
      double* gr = g_w1 + j * in;
      for (std::size_t i = 0; i < in; ++i) gr[i] += da * x[i];
    }
    grad.back() += dz;
  }
  const auto n = static_cast<double>(rows.size());
  for (auto& g : grad) g /= n;
  return loss / n;
}

}  // namespace mlp

/// Adam on minibatches of the standardized inputs. Inverted dropout on the
/// input layer: kept inputs are scaled by 1 / (1 - rate) during training,
/// prediction uses the full network unscaled.
inline MlpModel train_mlp(const Matrix& X, const Targets& y, const MlpParams& params, std::uint64_t seed) {
  validate(params);
  if (X.empty() || X.rows() != y.size()) throw DataError("mlp: empty or misaligned training data");
  MlpModel m;
  m.params = params;
  m.seed = seed;
  m.scaler = Scaler::fit(X);
  const Matrix Z = m.scaler.transform(X);
  const std::size_t in = X.cols(), h = static_cast<std::size_t>(params.hidden);
  m.weights = MlpWeights(in, h);
  Rng rng(seed);
  const double s1 = std::sqrt(2.0 / static_cast<double>(in));
  for (std::size_t k = 0; k < h * in; ++k) m.weights.w1()[k] = rng.normal() * s1;
  const double s2 = std::sqrt(1.0 / static_cast<double>(h));
  for (std::size_t j = 0; j < h; ++j) m.weights.w2()[j] = rng.normal() * s2;

  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::vector<double> mom(m.weights.v.size(), 0.0), vel(m.weights.v.size(), 0.0), grad;
  std::vector<std::size_t> order(X.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Matrix masked(static_cast<std::size_t>(params.batch_size), in);
  std::vector<std::size_t> batch_rows;
  Targets batch_y;
  const double keep = 1.0 - params.dropout;
  long long t = 0;
  for (int epoch = 1; epoch <= params.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(params.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(params.batch_size));
      const std::size_t b = end - start;
      batch_rows.resize(b);
      batch_y.resize(b);
      for (std::size_t k = 0; k < b; ++k) {
        const auto src = Z.row(order[start + k]);
        auto dst = masked.row(k);
        for (std::size_t i = 0; i < in; ++i) {
          dst[i] = params.dropout > 0.0 ? (rng.uniform() < keep ? src[i] / keep : 0.0) : src[i];
        }
        batch_rows[k] = k;
        batch_y[k] = y[order[start + k]];
      }
      const double loss = mlp::loss_and_gradient(m.weights, masked, batch_y, batch_rows, grad);
      if (!std::isfinite(loss)) throw NumericError("mlp: nonfinite loss at epoch " + std::to_string(epoch));
      epoch_loss += loss * static_cast<double>(b);
      ++t;
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
      for (std::size_t k = 0; k < grad.size(); ++k) {
        mom[k] = beta1 * mom[k] + (1.0 - beta1) * grad[k];
        vel[k] = beta2 * vel[k] + (1.0 - beta2) * grad[k] * grad[k];
        m.weights.v[k] -= params.learning_rate * (mom[k] / c1) / (std::sqrt(vel[k] / c2) + eps);
      }
    }
    m.loss_trace.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return m;
}

}  // namespace techval
