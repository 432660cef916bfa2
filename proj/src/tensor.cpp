#include "signspot/tensor.hpp"

#include <cmath>

namespace signspot {

Tensor2D::Tensor2D(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ValidationError("Tensor2D: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Tensor2D Tensor2D::identity(std::size_t n) {
  Tensor2D t(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

Tensor2D matmul(const Tensor2D& a, const Tensor2D& b) {
  if (a.cols() != b.rows()) throw ValidationError("matmul: shape mismatch");
  Tensor2D out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double x = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += x * b(k, j);
    }
  return out;
}

Tensor2D matmul_nt(const Tensor2D& a, const Tensor2D& b) {
  if (a.cols() != b.cols()) throw ValidationError("matmul_nt: shape mismatch");
  Tensor2D out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
      out(i, j) = s;
    }
  return out;
}

Tensor2D matmul_tn(const Tensor2D& a, const Tensor2D& b) {
  if (a.rows() != b.rows()) throw ValidationError("matmul_tn: shape mismatch");
  Tensor2D out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k)
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double x = a(k, i);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += x * b(k, j);
    }
  return out;
}

Tensor2D transpose(const Tensor2D& a) {
  Tensor2D out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

namespace {
template <typename Op>
Tensor2D zip(const Tensor2D& a, const Tensor2D& b, Op op, const char* what) {
  if (!a.same_shape(b)) throw ValidationError(std::string(what) + ": shape mismatch");
  Tensor2D out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = op(a.data()[i], b.data()[i]);
  return out;
}
}  // namespace

Tensor2D operator+(const Tensor2D& a, const Tensor2D& b) {
  return zip(a, b, [](double x, double y) { return x + y; }, "add");
}
Tensor2D operator-(const Tensor2D& a, const Tensor2D& b) {
  return zip(a, b, [](double x, double y) { return x - y; }, "subtract");
}
Tensor2D hadamard(const Tensor2D& a, const Tensor2D& b) {
  return zip(a, b, [](double x, double y) { return x * y; }, "hadamard");
}

Tensor2D operator*(const Tensor2D& a, double s) {
  Tensor2D out = a;
  for (double& x : out.data()) x *= s;
  return out;
}

Tensor2D slice_cols(const Tensor2D& a, std::size_t begin, std::size_t width) {
  if (begin + width > a.cols()) throw ValidationError("slice_cols: out of range");
  Tensor2D out(a.rows(), width);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < width; ++j) out(i, j) = a(i, begin + j);
  return out;
}

Tensor2D concat_cols(std::span<const Tensor2D> parts) {
  if (parts.empty()) return {};
  std::size_t width = 0;
  for (const auto& p : parts) {
    if (p.rows() != parts[0].rows()) throw ValidationError("concat_cols: row mismatch");
    width += p.cols();
  }
  Tensor2D out(parts[0].rows(), width);
  std::size_t off = 0;
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < p.rows(); ++i)
      for (std::size_t j = 0; j < p.cols(); ++j) out(i, off + j) = p(i, j);
    off += p.cols();
  }
  return out;
}

double dot(const Tensor2D& a, const Tensor2D& b) {
  if (!a.same_shape(b)) throw ValidationError("dot: shape mismatch");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

double max_abs_diff(const Tensor2D& a, const Tensor2D& b) {
  if (!a.same_shape(b)) throw ValidationError("max_abs_diff: shape mismatch");
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace signspot
