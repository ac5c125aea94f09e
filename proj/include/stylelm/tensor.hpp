#pragma once

// Small dense row-major matrices of doubles and the handful of kernels the
// recurrent cells need. Sizes here are ~100, so plain loops are enough.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "stylelm/errors.hpp"

namespace stylelm {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  std::span<double> flat() noexcept { return data_; }
  std::span<const double> flat() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double sigmoid(double x) noexcept {
  // Split by sign so exp never overflows.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline Vector sigmoid(std::span<const double> v) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = sigmoid(v[i]);
  return out;
}

inline Vector tanh(std::span<const double> v) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::tanh(v[i]);
  return out;
}

/// Numerically stable softmax (max shifted).
inline Vector softmax(std::span<const double> logits) {
  Vector out(logits.size());
  if (logits.empty()) return out;
  double mx = logits[0];
  for (double z : logits) mx = z > mx ? z : mx;
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

/// out = M[:, col_begin : col_begin + x.size()] * x, accumulated into out.
inline void gemv_acc(const Matrix& m, std::size_t col_begin, std::span<const double> x, std::span<double> out) noexcept {
  const std::size_t n = x.size();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double* w = m.row(r).data() + col_begin;
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += w[c] * x[c];
    out[r] += s;
  }
}

/// out += M[:, col_begin : col_begin + out.size()]^T * y.
inline void gemv_t_acc(const Matrix& m, std::size_t col_begin, std::span<const double> y, std::span<double> out) noexcept {
  const std::size_t n = out.size();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double* w = m.row(r).data() + col_begin;
    const double yr = y[r];
    for (std::size_t c = 0; c < n; ++c) out[c] += w[c] * yr;
  }
}

/// M[:, col_begin : col_begin + x.size()] += y x^T.
inline void outer_acc(Matrix& m, std::size_t col_begin, std::span<const double> y, std::span<const double> x) noexcept {
  const std::size_t n = x.size();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double* w = m.row(r).data() + col_begin;
    const double yr = y[r];
    for (std::size_t c = 0; c < n; ++c) w[c] += yr * x[c];
  }
}

inline bool all_finite(std::span<const double> v) noexcept {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline void require_shape(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

}  // namespace stylelm
