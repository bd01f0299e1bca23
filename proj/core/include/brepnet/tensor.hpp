#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

#include "brepnet/types.hpp"

namespace brepnet {

/// Row-major dense matrix. Double precision is the default throughout the
/// network (alias Tensor2); float is available for inference.
template <typename T>
class Matrix {
 public:
  Matrix() = default;

  Matrix(Index rows, Index cols)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, T{}) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative shape");
  }

  Matrix(Index rows, Index cols, std::initializer_list<T> values) : Matrix(rows, cols) {
    if (values.size() != data_.size()) throw std::invalid_argument("Matrix: initializer size mismatch");
    std::copy(values.begin(), values.end(), data_.begin());
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(Index r, Index c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const T& operator()(Index r, Index c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  std::span<T> row(Index r) { return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)}; }
  std::span<const T> row(Index r) const {
    return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)};
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  bool same_shape(const Matrix& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }

  bool operator==(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
  }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<T> data_;
};

using Tensor2 = Matrix<double>;
using Tensor2f = Matrix<float>;

template <typename To, typename From>
Matrix<To> cast(const Matrix<From>& m) {
  Matrix<To> out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) out.data()[i] = static_cast<To>(m.data()[i]);
  return out;
}

/// C = A * B with A m-by-k, B k-by-n.
template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
  Matrix<T> c(a.rows(), b.cols());
  const Index m = a.rows(), k = a.cols(), n = b.cols();
  for (Index i = 0; i < m; ++i) {
    T* ci = c.data() + static_cast<std::size_t>(i) * n;
    const T* ai = a.data() + static_cast<std::size_t>(i) * k;
    for (Index p = 0; p < k; ++p) {
      const T av = ai[p];
      if (av == T{}) continue;
      const T* bp = b.data() + static_cast<std::size_t>(p) * n;
      for (Index j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
  return c;
}

/// C = A^T * B with A k-by-m, B k-by-n (used for weight gradients).
template <typename T>
Matrix<T> matmul_at(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("matmul_at: row counts differ");
  Matrix<T> c(a.cols(), b.cols());
  const Index k = a.rows(), m = a.cols(), n = b.cols();
  for (Index p = 0; p < k; ++p) {
    const T* ap = a.data() + static_cast<std::size_t>(p) * m;
    const T* bp = b.data() + static_cast<std::size_t>(p) * n;
    for (Index i = 0; i < m; ++i) {
      const T av = ap[i];
      if (av == T{}) continue;
      T* ci = c.data() + static_cast<std::size_t>(i) * n;
      for (Index j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
  return c;
}

/// C = A * B^T with A m-by-n, B k-by-n (used for input gradients).
template <typename T>
Matrix<T> matmul_bt(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul_bt: column counts differ");
  Matrix<T> c(a.rows(), b.rows());
  const Index m = a.rows(), n = a.cols(), k = b.rows();
  for (Index i = 0; i < m; ++i) {
    const T* ai = a.data() + static_cast<std::size_t>(i) * n;
    T* ci = c.data() + static_cast<std::size_t>(i) * k;
    for (Index p = 0; p < k; ++p) {
      const T* bp = b.data() + static_cast<std::size_t>(p) * n;
      T acc{};
      for (Index j = 0; j < n; ++j) acc += ai[j] * bp[j];
      ci[p] = acc;
    }
  }
  return c;
}

/// Horizontal concatenation; all parts must share a row count.
template <typename T>
Matrix<T> hconcat(std::span<const Matrix<T>> parts) {
  if (parts.empty()) throw std::invalid_argument("hconcat: no parts");
  const Index rows = parts.front().rows();
  Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw std::invalid_argument("hconcat: row counts differ");
    cols += p.cols();
  }
  Matrix<T> out(rows, cols);
  Index at = 0;
  for (const auto& p : parts) {
    for (Index r = 0; r < rows; ++r) {
      auto src = p.row(r);
      std::copy(src.begin(), src.end(), out.row(r).begin() + at);
    }
    at += p.cols();
  }
  return out;
}

/// Vertical concatenation; all parts must share a column count.
template <typename T>
Matrix<T> vconcat(std::span<const Matrix<T>> parts) {
  if (parts.empty()) throw std::invalid_argument("vconcat: no parts");
  const Index cols = parts.front().cols();
  Index rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw std::invalid_argument("vconcat: column counts differ");
    rows += p.rows();
  }
  Matrix<T> out(rows, cols);
  Index at = 0;
  for (const auto& p : parts) {
    for (Index r = 0; r < p.rows(); ++r) {
      auto src = p.row(r);
      std::copy(src.begin(), src.end(), out.row(at + r).begin());
    }
    at += p.rows();
  }
  return out;
}

/// Copy of columns [c0, c1) of m.
template <typename T>
Matrix<T> slice_cols(const Matrix<T>& m, Index c0, Index c1) {
  if (c0 < 0 || c1 < c0 || c1 > m.cols()) throw std::invalid_argument("slice_cols: bad range");
  Matrix<T> out(m.rows(), c1 - c0);
  for (Index r = 0; r < m.rows(); ++r) {
    auto src = m.row(r);
    std::copy(src.begin() + c0, src.begin() + c1, out.row(r).begin());
  }
  return out;
}

template <typename T>
void add_inplace(Matrix<T>& dst, const Matrix<T>& src) {
  if (!dst.same_shape(src)) throw std::invalid_argument("add_inplace: shape mismatch");
  for (std::size_t i = 0; i < dst.size(); ++i) dst.data()[i] += src.data()[i];
}

template <typename T>
void scale_inplace(Matrix<T>& m, T factor) {
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] *= factor;
}

}  // namespace brepnet
