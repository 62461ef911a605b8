#include "affsup/model.hpp"

#include <cmath>

#include "affsup/kernels.hpp"

namespace affsup {

namespace {

// x * w + b (b broadcast over rows)
MatF linear(const MatF& x, const MatF& w, const MatF& b) {
  MatF y = matmul(x, w);
  for (std::size_t i = 0; i < y.rows(); ++i)
    kernels::axpy(1.0f, b.data(), y.row(i), y.cols());
  return y;
}

MatF relu(const MatF& x) {
  MatF y = x;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y.data()[i] < 0.0f) y.data()[i] = 0.0f;
  return y;
}

void relu_backward_inplace(MatF& d, const MatF& pre) {
  for (std::size_t i = 0; i < d.size(); ++i)
    if (pre.data()[i] <= 0.0f) d.data()[i] = 0.0f;
}

MatF col_sums(const MatF& x) {
  MatF s(1, x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    kernels::axpy(1.0f, x.row(i), s.data(), x.cols());
  return s;
}

MatF init_linear(std::size_t fan_in, std::size_t fan_out, RngStream& rng) {
  MatF w(fan_in, fan_out);
  const float bound = 1.0f / std::sqrt(static_cast<float>(fan_in));
  rng.fill_uniform(w, -bound, bound);
  return w;
}

}  // namespace

float cross_entropy(const MatF& logits, const std::vector<int>& labels,
                    MatF* d_logits) {
  if (logits.rows() != labels.size())
    throw ShapeError("cross_entropy: label count mismatch");
  const std::size_t n = logits.rows(), c = logits.cols();
  if (d_logits) *d_logits = MatF(n, c);
  double loss = 0.0;
  const float inv_n = 1.0f / static_cast<float>(n);
  std::vector<float> p(c);
  for (std::size_t i = 0; i < n; ++i) {
    const float mx = kernels::max_value(logits.row(i), c);
    const float z = kernels::exp_shift_sum(logits.row(i), mx, p.data(), c);
    const float log_z = std::log(z) + mx;
    loss -= static_cast<double>(logits(i, labels[i]) - log_z);
    if (d_logits) {
      const float inv_z = 1.0f / z;
      for (std::size_t j = 0; j < c; ++j)
        (*d_logits)(i, j) = p[j] * inv_z * inv_n;
      (*d_logits)(i, labels[i]) -= inv_n;
    }
  }
  return static_cast<float>(loss / n);
}

double accuracy(const MatF& logits, const std::vector<int>& labels) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.cols(); ++j)
      if (logits(i, j) > logits(i, best)) best = j;
    if (static_cast<int>(best) == labels[i]) ++hits;
  }
  return logits.rows() ? static_cast<double>(hits) / logits.rows() : 0.0;
}

BatchNet BatchNet::init(int in_dim, int hidden, int emb, int classes,
                        RngStream& rng) {
  BatchNet net;
  net.in_dim = in_dim;
  net.hidden = hidden;
  net.emb = hidden > 0 ? emb : 0;
  net.classes = classes;
  if (hidden > 0) {
    net.w1 = init_linear(in_dim, hidden, rng);
    net.b1 = MatF(1, hidden);
    if (net.emb > 0) {
      // small init keeps all embedding distances near zero, so every
      // same-class pair starts with usable softmax weight
      net.w3 = init_linear(hidden, net.emb, rng);
      kernels::scale(0.1f, net.w3.data(), net.w3.size());
    }
    net.w2 = init_linear(hidden, classes, rng);
  } else {
    net.w2 = init_linear(in_dim, classes, rng);
  }
  net.b2 = MatF(1, classes);
  return net;
}

std::vector<MatF*> BatchNet::params() {
  if (hidden > 0 && emb > 0) return {&w1, &b1, &w3, &w2, &b2};
  if (hidden > 0) return {&w1, &b1, &w2, &b2};
  return {&w2, &b2};
}

BatchNetCache batch_forward(const BatchNet& net, const MatF& x) {
  BatchNetCache cache;
  cache.x = x;
  if (net.hidden > 0) {
    cache.h_pre = linear(x, net.w1, net.b1);
    cache.h = relu(cache.h_pre);
    if (net.emb > 0) cache.z = matmul(cache.h, net.w3);
    cache.logits = linear(cache.h, net.w2, net.b2);
  } else {
    cache.logits = linear(x, net.w2, net.b2);
  }
  return cache;
}

std::vector<MatF> batch_backward(const BatchNet& net, const BatchNetCache& cache,
                                 const MatF& d_logits,
                                 const MatF& d_repr_extra) {
  const MatF& pen = net.hidden > 0 ? cache.h : cache.x;
  MatF d_w2 = matmul(transpose(pen), d_logits);
  MatF d_b2 = col_sums(d_logits);
  if (net.hidden == 0) return {std::move(d_w2), std::move(d_b2)};

  MatF d_h = matmul(d_logits, transpose(net.w2));
  MatF d_w3;
  if (net.emb > 0) {
    d_w3 = MatF(net.w3.rows(), net.w3.cols());
    if (!d_repr_extra.empty()) {
      d_w3 = matmul(transpose(cache.h), d_repr_extra);
      add_in_place(d_h, matmul(d_repr_extra, transpose(net.w3)));
    }
  } else if (!d_repr_extra.empty()) {
    add_in_place(d_h, d_repr_extra);
  }
  relu_backward_inplace(d_h, cache.h_pre);
  MatF d_w1 = matmul(transpose(cache.x), d_h);
  MatF d_b1 = col_sums(d_h);
  if (net.emb > 0)
    return {std::move(d_w1), std::move(d_b1), std::move(d_w3), std::move(d_w2),
            std::move(d_b2)};
  return {std::move(d_w1), std::move(d_b1), std::move(d_w2), std::move(d_b2)};
}

RelationNet RelationNet::init(int in_dim, int hidden, int d_k, int classes,
                              RngStream& rng) {
  RelationNet net;
  net.in_dim = in_dim;
  net.hidden = hidden;
  net.classes = classes;
  net.w1 = init_linear(in_dim, hidden, rng);
  net.b1 = MatF(1, hidden);
  net.attn = AttentionParams<float>::init(hidden, d_k, rng);
  net.w2 = init_linear(hidden, classes, rng);
  net.b2 = MatF(1, classes);
  return net;
}

std::vector<MatF*> RelationNet::params() {
  return {&w1, &b1, &attn.wk, &attn.wq, &w2, &b2};
}

RelationCache relation_forward(const RelationNet& net, const MatF& x) {
  RelationCache cache;
  cache.x = x;
  cache.e_pre = linear(x, net.w1, net.b1);
  cache.e = relu(cache.e_pre);
  cache.att = attention_forward(cache.e, net.attn);
  cache.rep = add(cache.e, cache.att.out);
  cache.logits = linear(cache.rep, net.w2, net.b2);
  return cache;
}

std::vector<MatF> relation_backward(const RelationNet& net,
                                    const RelationCache& cache,
                                    const MatF& d_logits,
                                    const MatF& d_raw_extra) {
  MatF d_w2 = matmul(transpose(cache.rep), d_logits);
  MatF d_b2 = col_sums(d_logits);
  MatF d_rep = matmul(d_logits, transpose(net.w2));

  AttentionGrads<float> att =
      attention_backward(net.attn, cache.att, d_rep, d_raw_extra);

  MatF d_e = d_rep;  // residual path
  add_in_place(d_e, att.d_features);
  relu_backward_inplace(d_e, cache.e_pre);
  MatF d_w1 = matmul(transpose(cache.x), d_e);
  MatF d_b1 = col_sums(d_e);
  return {std::move(d_w1),     std::move(d_b1), std::move(att.d_wk),
          std::move(att.d_wq), std::move(d_w2), std::move(d_b2)};
}

}  // namespace affsup
