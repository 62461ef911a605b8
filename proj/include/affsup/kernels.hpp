#pragma once

#include <cstddef>

// Dense arithmetic kernels. Every operation has a scalar reference
// implementation and an AVX2 variant; the active one is selected at runtime
// (AFFSUP_KERNELS=scalar|avx2 overrides auto-detection). The two variants are
// equivalence-tested against each other in tests/test_kernels.cpp.
namespace affsup::kernels {

enum class Impl { Scalar, Avx2 };

bool avx2_supported();
Impl active();
// Throws ConfigError if the implementation is not supported on this CPU.
// Not thread-safe; intended for startup and tests.
void set_impl(Impl impl);
const char* name(Impl impl);

template <class T>
T dot(const T* a, const T* b, std::size_t n);

template <class T>
T sum(const T* x, std::size_t n);

// Largest entry; lowest representable value when n == 0.
template <class T>
T max_value(const T* x, std::size_t n);

// Squared Euclidean distance between a and b.
template <class T>
T sq_l2(const T* a, const T* b, std::size_t n);

// y += alpha * x
template <class T>
void axpy(T alpha, const T* x, T* y, std::size_t n);

// x *= alpha
template <class T>
void scale(T alpha, T* x, std::size_t n);

// out[i] = exp(in[i] - shift); returns the sum of out.
// Float inputs are clamped to exp's safe range [-87.33, 88].
template <class T>
T exp_shift_sum(const T* in, T shift, T* out, std::size_t n);

// c = a(m x k) * b(k x n), all row-major; c is overwritten.
template <class T>
void matmul(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
            std::size_t n);

}  // namespace affsup::kernels
