#pragma once

#include <cstddef>

// Internal: per-implementation entry points behind the dispatch layer.
namespace affsup::kernels::scalar {

template <class T>
T dot(const T* a, const T* b, std::size_t n);
template <class T>
T sum(const T* x, std::size_t n);
template <class T>
T max_value(const T* x, std::size_t n);
template <class T>
T sq_l2(const T* a, const T* b, std::size_t n);
template <class T>
void axpy(T alpha, const T* x, T* y, std::size_t n);
template <class T>
void scale(T alpha, T* x, std::size_t n);
template <class T>
T exp_shift_sum(const T* in, T shift, T* out, std::size_t n);
template <class T>
void matmul(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
            std::size_t n);

}  // namespace affsup::kernels::scalar

namespace affsup::kernels::avx2 {

bool compiled_in();

float dot(const float* a, const float* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
float sum(const float* x, std::size_t n);
double sum(const double* x, std::size_t n);
float max_value(const float* x, std::size_t n);
double max_value(const double* x, std::size_t n);
float sq_l2(const float* a, const float* b, std::size_t n);
double sq_l2(const double* a, const double* b, std::size_t n);
void axpy(float alpha, const float* x, float* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(float alpha, float* x, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
float exp_shift_sum(const float* in, float shift, float* out, std::size_t n);
double exp_shift_sum(const double* in, double shift, double* out,
                     std::size_t n);
void matmul(const float* a, const float* b, float* c, std::size_t m,
            std::size_t k, std::size_t n);
void matmul(const double* a, const double* b, double* c, std::size_t m,
            std::size_t k, std::size_t n);

}  // namespace affsup::kernels::avx2
