#pragma once

#include <cmath>
#include <vector>

#include "techval/core/common.hpp"

namespace techval {

/// Per-column standardization fitted on training rows. Columns with zero
/// variance pass through unchanged.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> scale;  // population std; 0 marks a pass-through column

  static Scaler fit(const Matrix& X) {
    if (X.empty()) throw DataError("cannot fit a scaler on zero rows");
    Scaler s;
    const auto n = static_cast<double>(X.rows());
    s.mean.assign(X.cols(), 0.0);
    s.scale.assign(X.cols(), 0.0);
    for (std::size_t r = 0; r < X.rows(); ++r) {
      for (std::size_t c = 0; c < X.cols(); ++c) s.mean[c] += X(r, c);
    }
    for (auto& m : s.mean) m /= n;
    for (std::size_t r = 0; r < X.rows(); ++r) {
      for (std::size_t c = 0; c < X.cols(); ++c) {
        const double d = X(r, c) - s.mean[c];
        s.scale[c] += d * d;
      }
    }
    for (std::size_t c = 0; c < X.cols(); ++c) {
      s.scale[c] = std::sqrt(s.scale[c] / n);
      // Relative guard: a column that is constant up to rounding is constant.
      if (s.scale[c] <= 1e-12 * std::max(1.0, std::abs(s.mean[c]))) s.scale[c] = 0.0;
    }
    return s;
  }

  std::size_t width() const noexcept { return mean.size(); }

  double apply(std::size_t c, double v) const noexcept {
    return scale[c] == 0.0 ? v : (v - mean[c]) / scale[c];
  }

  void apply_row(std::span<const double> in, std::span<double> out) const {
    for (std::size_t c = 0; c < in.size(); ++c) out[c] = apply(c, in[c]);
  }

  Matrix transform(const Matrix& X) const {
    if (X.cols() != width()) throw DataError("scaler width mismatch");
    Matrix out(X.rows(), X.cols());
    for (std::size_t r = 0; r < X.rows(); ++r) apply_row(X.row(r), out.row(r));
    return out;
  }

  friend bool operator==(const Scaler&, const Scaler&) = default;
};

}  // namespace techval
