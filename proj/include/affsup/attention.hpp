#pragma once

#include "affsup/affinity.hpp"
#include "affsup/rng.hpp"

namespace affsup {

// Single-head scaled dot-product attention over appearance features.
template <class T>
struct AttentionParams {
  Matrix<T> wk;  // d x d_k
  Matrix<T> wq;  // d x d_k
  std::size_t d_k = 0;

  AttentionParams() = default;
  AttentionParams(Matrix<T> wk_in, Matrix<T> wq_in)
      : wk(std::move(wk_in)), wq(std::move(wq_in)), d_k(wk.cols()) {
    if (!wk.same_shape(wq) || d_k == 0)
      throw ShapeError("attention params: wk/wq must share shape, d_k >= 1");
  }

  // Entries uniform in +-1/sqrt(d).
  static AttentionParams init(std::size_t d, std::size_t d_k, RngStream& rng);
};

template <class T>
struct AttentionCache {
  Matrix<T> features;  // N x d
  Matrix<T> k, q;      // N x d_k projections
  Matrix<T> raw;       // N x N scaled dot products
  Matrix<T> weights;   // row softmax of raw
  Matrix<T> out;       // weights * features
  bool valid = false;
};

template <class T>
struct AttentionGrads {
  Matrix<T> d_features;
  Matrix<T> d_wk;
  Matrix<T> d_wq;
};

// raw[m,n] = <wk^T f_m, wq^T f_n>/sqrt(d_k); weights = row softmax of raw
// (aggregation always row-wise regardless of the loss scope); out = weights
// times features.
template <class T>
AttentionCache<T> attention_forward(const Matrix<T>& features,
                                    const AttentionParams<T>& params);

// Backward through aggregation and scores. d_raw_extra is the (already
// lambda-scaled) affinity-loss gradient on the raw scores; pass an empty
// matrix when there is none. Throws StateError on an invalid cache.
template <class T>
AttentionGrads<T> attention_backward(const AttentionParams<T>& params,
                                     const AttentionCache<T>& cache,
                                     const Matrix<T>& d_out,
                                     const Matrix<T>& d_raw_extra);

}  // namespace affsup
