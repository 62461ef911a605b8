#include <cmath>
#include <cstring>
#include <limits>

#include "kernels_detail.hpp"

namespace affsup::kernels::scalar {

template <class T>
T dot(const T* a, const T* b, std::size_t n) {
  T acc = T(0);
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <class T>
T sum(const T* x, std::size_t n) {
  T acc = T(0);
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

template <class T>
T max_value(const T* x, std::size_t n) {
  T m = std::numeric_limits<T>::lowest();
  for (std::size_t i = 0; i < n; ++i) m = x[i] > m ? x[i] : m;
  return m;
}

template <class T>
T sq_l2(const T* a, const T* b, std::size_t n) {
  T acc = T(0);
  for (std::size_t i = 0; i < n; ++i) {
    const T d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

template <class T>
void axpy(T alpha, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <class T>
void scale(T alpha, T* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

template <class T>
T exp_shift_sum(const T* in, T shift, T* out, std::size_t n) {
  T acc = T(0);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(in[i] - shift);
    acc += out[i];
  }
  return acc;
}

template <class T>
void matmul(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
            std::size_t n) {
  std::memset(c, 0, m * n * sizeof(T));
  for (std::size_t i = 0; i < m; ++i) {
    T* ci = c + i * n;
    for (std::size_t l = 0; l < k; ++l) {
      const T ail = a[i * k + l];
      const T* bl = b + l * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += ail * bl[j];
    }
  }
}

template float dot(const float*, const float*, std::size_t);
template double dot(const double*, const double*, std::size_t);
template float sum(const float*, std::size_t);
template double sum(const double*, std::size_t);
template float max_value(const float*, std::size_t);
template double max_value(const double*, std::size_t);
template float sq_l2(const float*, const float*, std::size_t);
template double sq_l2(const double*, const double*, std::size_t);
template void axpy(float, const float*, float*, std::size_t);
template void axpy(double, const double*, double*, std::size_t);
template void scale(float, float*, std::size_t);
template void scale(double, double*, std::size_t);
template float exp_shift_sum(const float*, float, float*, std::size_t);
template double exp_shift_sum(const double*, double, double*, std::size_t);
template void matmul(const float*, const float*, float*, std::size_t,
                     std::size_t, std::size_t);
template void matmul(const double*, const double*, double*, std::size_t,
                     std::size_t, std::size_t);

}  // namespace affsup::kernels::scalar
