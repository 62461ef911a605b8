#include "affsup/softmax.hpp"

#include "affsup/kernels.hpp"

namespace affsup {

template <class T>
Matrix<T> softmax_matrix(const Matrix<T>& w) {
  if (w.empty()) throw ShapeError("softmax_matrix: empty matrix");
  Matrix<T> out(w.rows(), w.cols());
  const T mx = kernels::max_value(w.data(), w.size());
  const T s = kernels::exp_shift_sum(w.data(), mx, out.data(), w.size());
  kernels::scale(T(1) / s, out.data(), out.size());
  return out;
}

template <class T>
Matrix<T> softmax_rows(const Matrix<T>& w) {
  if (w.rows() == 0 || w.cols() == 0)
    throw ShapeError("softmax_rows: zero-width rows");
  Matrix<T> out(w.rows(), w.cols());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    const T mx = kernels::max_value(w.row(i), w.cols());
    const T s = kernels::exp_shift_sum(w.row(i), mx, out.row(i), w.cols());
    kernels::scale(T(1) / s, out.row(i), w.cols());
  }
  return out;
}

template Matrix<float> softmax_matrix(const Matrix<float>&);
template Matrix<double> softmax_matrix(const Matrix<double>&);
template Matrix<float> softmax_rows(const Matrix<float>&);
template Matrix<double> softmax_rows(const Matrix<double>&);

}  // namespace affsup
