#include "affsup/attention.hpp"

#include <cmath>

#include "affsup/kernels.hpp"
#include "affsup/softmax.hpp"

namespace affsup {

template <class T>
AttentionParams<T> AttentionParams<T>::init(std::size_t d, std::size_t d_k,
                                            RngStream& rng) {
  const T bound = T(1) / std::sqrt(static_cast<T>(d));
  Matrix<T> wk(d, d_k), wq(d, d_k);
  rng.fill_uniform(wk, -bound, bound);
  rng.fill_uniform(wq, -bound, bound);
  return AttentionParams<T>(std::move(wk), std::move(wq));
}

template <class T>
AttentionCache<T> attention_forward(const Matrix<T>& features,
                                    const AttentionParams<T>& params) {
  if (params.wk.rows() != features.cols())
    throw ShapeError("attention_forward: feature width does not match wk");
  AttentionCache<T> cache;
  cache.features = features;
  cache.k = matmul(features, params.wk);
  cache.q = matmul(features, params.wq);
  const std::size_t n = features.rows();
  const T inv_sqrt_dk = T(1) / std::sqrt(static_cast<T>(params.d_k));
  cache.raw = Matrix<T>(n, n);
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t j = 0; j < n; ++j)
      cache.raw(m, j) =
          kernels::dot(cache.k.row(m), cache.q.row(j), params.d_k) *
          inv_sqrt_dk;
  cache.weights = softmax_rows(cache.raw);
  cache.out = matmul(cache.weights, features);
  cache.valid = true;
  return cache;
}

template <class T>
AttentionGrads<T> attention_backward(const AttentionParams<T>& params,
                                     const AttentionCache<T>& cache,
                                     const Matrix<T>& d_out,
                                     const Matrix<T>& d_raw_extra) {
  if (!cache.valid) throw StateError("attention_backward: invalid cache");
  const std::size_t n = cache.features.rows();
  if (d_out.rows() != n || d_out.cols() != cache.features.cols())
    throw StateError("attention_backward: d_out does not match cached forward");
  if (!d_raw_extra.empty() &&
      (d_raw_extra.rows() != n || d_raw_extra.cols() != n))
    throw StateError("attention_backward: d_raw_extra shape mismatch");

  // out = A * F
  Matrix<T> d_weights = matmul(d_out, transpose(cache.features));
  AttentionGrads<T> grads;
  grads.d_features = matmul(transpose(cache.weights), d_out);

  // Row-softmax backward: dS_ij = A_ij (dA_ij - sum_k dA_ik A_ik).
  Matrix<T> d_raw(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const T inner = kernels::dot(d_weights.row(i), cache.weights.row(i), n);
    for (std::size_t j = 0; j < n; ++j)
      d_raw(i, j) = cache.weights(i, j) * (d_weights(i, j) - inner);
  }
  if (!d_raw_extra.empty()) add_in_place(d_raw, d_raw_extra);

  // raw = K Q^T / sqrt(d_k)
  const T inv_sqrt_dk = T(1) / std::sqrt(static_cast<T>(params.d_k));
  Matrix<T> d_k_proj = scaled(matmul(d_raw, cache.q), inv_sqrt_dk);
  Matrix<T> d_q_proj = scaled(matmul(transpose(d_raw), cache.k), inv_sqrt_dk);

  grads.d_wk = matmul(transpose(cache.features), d_k_proj);
  grads.d_wq = matmul(transpose(cache.features), d_q_proj);
  add_in_place(grads.d_features, matmul(d_k_proj, transpose(params.wk)));
  add_in_place(grads.d_features, matmul(d_q_proj, transpose(params.wq)));
  return grads;
}

template struct AttentionParams<float>;
template struct AttentionParams<double>;
template AttentionCache<float> attention_forward(const MatF&,
                                                 const AttentionParams<float>&);
template AttentionCache<double> attention_forward(
    const MatD&, const AttentionParams<double>&);
template AttentionGrads<float> attention_backward(const AttentionParams<float>&,
                                                  const AttentionCache<float>&,
                                                  const MatF&, const MatF&);
template AttentionGrads<double> attention_backward(
    const AttentionParams<double>&, const AttentionCache<double>&, const MatD&,
    const MatD&);

}  // namespace affsup
