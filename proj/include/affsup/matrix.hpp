#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "affsup/error.hpp"
#include "affsup/kernels.hpp"

namespace affsup {

// Row-major dense matrix. Float carries training state, double carries
// gradient checks and oracle comparisons.
template <class T>
class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, T fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::size_t rows, std::size_t cols, std::initializer_list<T> values)
      : rows_(rows), cols_(cols), data_(values) {
    if (data_.size() != rows * cols)
      throw ShapeError("matrix initializer has " +
                       std::to_string(data_.size()) + " values, expected " +
                       std::to_string(rows * cols));
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  T operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  T* row(std::size_t i) { return data_.data() + i * cols_; }
  const T* row(std::size_t i) const { return data_.data() + i * cols_; }

  bool same_shape(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  bool all_finite() const {
    for (T v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  void fill(T v) { data_.assign(data_.size(), v); }

  bool operator==(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using MatF = Matrix<float>;
using MatD = Matrix<double>;

template <class T>
void check_same_shape(const Matrix<T>& a, const Matrix<T>& b,
                      const char* what) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(what) + ": shape mismatch " +
                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
}

template <class T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " times " +
                     std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  Matrix<T> c(a.rows(), b.cols());
  kernels::matmul(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
  return c;
}

template <class T>
Matrix<T> transpose(const Matrix<T>& m) {
  Matrix<T> t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

// a += alpha * b
template <class T>
void add_in_place(Matrix<T>& a, const Matrix<T>& b, T alpha = T(1)) {
  check_same_shape(a, b, "add_in_place");
  kernels::axpy(alpha, b.data(), a.data(), a.size());
}

template <class T>
Matrix<T> add(const Matrix<T>& a, const Matrix<T>& b) {
  Matrix<T> c = a;
  add_in_place(c, b);
  return c;
}

template <class T>
Matrix<T> sub(const Matrix<T>& a, const Matrix<T>& b) {
  Matrix<T> c = a;
  add_in_place(c, b, T(-1));
  return c;
}

template <class T>
Matrix<T> scaled(const Matrix<T>& a, T alpha) {
  Matrix<T> c = a;
  kernels::scale(alpha, c.data(), c.size());
  return c;
}

inline MatD to_double(const MatF& m) {
  MatD d(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) d.data()[i] = m.data()[i];
  return d;
}

inline MatF to_float(const MatD& m) {
  MatF f(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i)
    f.data()[i] = static_cast<float>(m.data()[i]);
  return f;
}

}  // namespace affsup
