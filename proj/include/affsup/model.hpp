#pragma once

#include <vector>

#include "affsup/attention.hpp"
#include "affsup/matrix.hpp"
#include "affsup/rng.hpp"

namespace affsup {

// Mean cross entropy over rows; writes d loss / d logits into d_logits when
// non-null. Ties in argmax resolve to the lowest index.
float cross_entropy(const MatF& logits, const std::vector<int>& labels,
                    MatF* d_logits);
double accuracy(const MatF& logits, const std::vector<int>& labels);


// Classifier for the mini-batch affinity task: an optional ReLU hidden layer
// with a linear classification head, plus a linear graph head z = h * w3 that
// carries the batch affinity graph. Only the affinity loss trains w3, so the
// metric space can contract within classes without fighting the classifier.
// hidden == 0 gives a linear probe without a graph head.
struct BatchNet {
  int in_dim = 0;
  int hidden = 0;
  int emb = 0;  // graph head width; 0 disables the head
  int classes = 0;
  MatF w1, b1;  // empty when hidden == 0
  MatF w3;      // hidden x emb graph head
  MatF w2, b2;

  static BatchNet init(int in_dim, int hidden, int emb, int classes,
                       RngStream& rng);
  std::vector<MatF*> params();
};

struct BatchNetCache {
  MatF x;
  MatF h_pre, h;  // empty when hidden == 0
  MatF z;         // graph embedding h * w3; empty without a head
  MatF logits;

  // Representation the batch affinity graph is built on: the graph embedding
  // when present, otherwise the (non-learnable) input.
  const MatF& repr() const { return z.empty() ? x : z; }
};

BatchNetCache batch_forward(const BatchNet& net, const MatF& x);

// Gradients aligned with params(). d_repr_extra, when non-empty, is an extra
// gradient on the affinity representation (ignored for a probe, whose
// representation is the input).
std::vector<MatF> batch_backward(const BatchNet& net, const BatchNetCache& cache,
                                 const MatF& d_logits,
                                 const MatF& d_repr_extra);

// Relation model: ReLU embedding, attention head, residual aggregation, then
// per-proposal classification. Raw attention scores feed the affinity loss.
struct RelationNet {
  int in_dim = 0;
  int hidden = 0;
  int classes = 0;
  MatF w1, b1;
  AttentionParams<float> attn;
  MatF w2, b2;

  static RelationNet init(int in_dim, int hidden, int d_k, int classes,
                          RngStream& rng);
  std::vector<MatF*> params();
};

struct RelationCache {
  MatF x;
  MatF e_pre, e;
  AttentionCache<float> att;
  MatF rep;  // e + attention output
  MatF logits;
};

RelationCache relation_forward(const RelationNet& net, const MatF& x);

// d_raw_extra: already lambda-scaled affinity gradient on the raw attention
// scores (empty for none).
std::vector<MatF> relation_backward(const RelationNet& net,
                                    const RelationCache& cache,
                                    const MatF& d_logits,
                                    const MatF& d_raw_extra);

}  // namespace affsup
