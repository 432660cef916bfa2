#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "signspot/core.hpp"

namespace signspot {

/// Dense row-major matrix of doubles.
class Tensor2D {
 public:
  Tensor2D() = default;
  Tensor2D(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Tensor2D(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw ValidationError("Tensor2D: data size mismatch");
  }
  Tensor2D(std::initializer_list<std::initializer_list<double>> rows);

  static Tensor2D identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Tensor2D& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool operator==(const Tensor2D&) const = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

Tensor2D matmul(const Tensor2D& a, const Tensor2D& b);
/// a * b^T
Tensor2D matmul_nt(const Tensor2D& a, const Tensor2D& b);
/// a^T * b
Tensor2D matmul_tn(const Tensor2D& a, const Tensor2D& b);
Tensor2D transpose(const Tensor2D& a);
Tensor2D operator+(const Tensor2D& a, const Tensor2D& b);
Tensor2D operator-(const Tensor2D& a, const Tensor2D& b);
Tensor2D operator*(const Tensor2D& a, double s);
/// Elementwise product.
Tensor2D hadamard(const Tensor2D& a, const Tensor2D& b);
/// Columns [begin, begin + width).
Tensor2D slice_cols(const Tensor2D& a, std::size_t begin, std::size_t width);
/// Horizontal concatenation; all parts share the row count.
Tensor2D concat_cols(std::span<const Tensor2D> parts);
/// Sum of elementwise products.
double dot(const Tensor2D& a, const Tensor2D& b);
double max_abs_diff(const Tensor2D& a, const Tensor2D& b);

}  // namespace signspot
