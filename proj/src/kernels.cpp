#include "affsup/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "affsup/error.hpp"
#include "kernels_detail.hpp"

namespace affsup::kernels {

namespace {

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Impl detect() {
  if (const char* env = std::getenv("AFFSUP_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Impl::Scalar;
    if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return Impl::Avx2;
    return Impl::Scalar;
  }
  return avx2_supported() ? Impl::Avx2 : Impl::Scalar;
}

Impl g_impl = detect();

}  // namespace

bool avx2_supported() { return avx2::compiled_in() && cpu_has_avx2_fma(); }

Impl active() { return g_impl; }

void set_impl(Impl impl) {
  if (impl == Impl::Avx2 && !avx2_supported())
    throw ConfigError("avx2 kernels not supported on this CPU/build");
  g_impl = impl;
}

const char* name(Impl impl) {
  return impl == Impl::Avx2 ? "avx2" : "scalar";
}

template <class T>
T dot(const T* a, const T* b, std::size_t n) {
  return g_impl == Impl::Avx2 ? avx2::dot(a, b, n) : scalar::dot(a, b, n);
}

template <class T>
T sum(const T* x, std::size_t n) {
  return g_impl == Impl::Avx2 ? avx2::sum(x, n) : scalar::sum(x, n);
}

template <class T>
T max_value(const T* x, std::size_t n) {
  return g_impl == Impl::Avx2 ? avx2::max_value(x, n) : scalar::max_value(x, n);
}

template <class T>
T sq_l2(const T* a, const T* b, std::size_t n) {
  return g_impl == Impl::Avx2 ? avx2::sq_l2(a, b, n) : scalar::sq_l2(a, b, n);
}

template <class T>
void axpy(T alpha, const T* x, T* y, std::size_t n) {
  g_impl == Impl::Avx2 ? avx2::axpy(alpha, x, y, n)
                       : scalar::axpy(alpha, x, y, n);
}

template <class T>
void scale(T alpha, T* x, std::size_t n) {
  g_impl == Impl::Avx2 ? avx2::scale(alpha, x, n) : scalar::scale(alpha, x, n);
}

template <class T>
T exp_shift_sum(const T* in, T shift, T* out, std::size_t n) {
  return g_impl == Impl::Avx2 ? avx2::exp_shift_sum(in, shift, out, n)
                              : scalar::exp_shift_sum(in, shift, out, n);
}

template <class T>
void matmul(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
            std::size_t n) {
  g_impl == Impl::Avx2 ? avx2::matmul(a, b, c, m, k, n)
                       : scalar::matmul(a, b, c, m, k, n);
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

}  // namespace affsup::kernels
