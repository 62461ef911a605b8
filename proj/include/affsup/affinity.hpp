#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "affsup/matrix.hpp"

namespace affsup {

// Normalization scope of the affinity scores. MatrixWise normalizes over all
// N^2 entries jointly (used by the mass loss); RowWise normalizes each row
// (used by attention aggregation, and by the row-wise loss variant).
enum class SoftmaxScope { MatrixWise, RowWise };

// Pairwise affinity scores: raw entries and, once normalize() has run, their
// softmax under a given scope.
template <class T>
struct AffinityMatrix {
  Matrix<T> raw;
  Matrix<T> normalized;  // empty until normalize()
  SoftmaxScope scope = SoftmaxScope::MatrixWise;

  AffinityMatrix() = default;
  explicit AffinityMatrix(Matrix<T> raw_scores) : raw(std::move(raw_scores)) {}

  bool has_normalized() const { return !normalized.empty(); }
  void normalize(SoftmaxScope s);
};

// Binary N x N supervision target. The diagonal is forced to zero under the
// default policy; Keep exists for hypothetical targets in tests.
class TargetMatrix {
 public:
  enum class DiagPolicy { ZeroDiagonal, Keep };

  explicit TargetMatrix(std::size_t n,
                        DiagPolicy policy = DiagPolicy::ZeroDiagonal)
      : n_(n), policy_(policy), entries_(n * n, 0) {}

  std::size_t n() const { return n_; }
  DiagPolicy diag_policy() const { return policy_; }

  bool at(std::size_t i, std::size_t j) const {
    return entries_[i * n_ + j] != 0;
  }

  // Sets one entry; self-pairs are dropped under ZeroDiagonal.
  void set(std::size_t i, std::size_t j, bool on = true) {
    if (i == j && policy_ == DiagPolicy::ZeroDiagonal) return;
    entries_[i * n_ + j] = on ? 1 : 0;
  }

  void set_pair(std::size_t i, std::size_t j, bool on = true) {
    set(i, j, on);
    set(j, i, on);
  }

  // |S|: number of selected entries.
  std::size_t count() const {
    std::size_t c = 0;
    for (std::uint8_t e : entries_) c += e;
    return c;
  }

  bool row_has_target(std::size_t i) const {
    for (std::size_t j = 0; j < n_; ++j)
      if (entries_[i * n_ + j]) return true;
    return false;
  }

  bool operator==(const TargetMatrix& o) const {
    return n_ == o.n_ && entries_ == o.entries_;
  }

 private:
  std::size_t n_;
  DiagPolicy policy_;
  std::vector<std::uint8_t> entries_;
};

enum class LossForm { L2, SmoothL1, Focal, RowFocal, EntryBCE };

const char* loss_form_name(LossForm form);
LossForm loss_form_from_name(const std::string& name);
const char* scope_name(SoftmaxScope scope);
SoftmaxScope scope_from_name(const std::string& name);

struct LossConfig {
  LossForm form = LossForm::Focal;
  double gamma = 2.0;         // focal exponent
  double lambda = 0.01;       // balance weight for the combined loss
  double mass_floor = 1e-12;  // clamp for log arguments
  SoftmaxScope scope = SoftmaxScope::MatrixWise;
  bool bce_normalize = true;  // divide EntryBCE by N^2

  void validate() const;
};

// Target affinity mass. Under MatrixWise scope `mass` is the selected sum of
// the matrix softmax; under RowWise it is the mean of the per-row masses over
// rows that have at least one target entry (those rows are listed in
// row_indices, aligned with row_masses).
struct MassReport {
  double mass = 0.0;
  std::vector<double> row_masses;
  std::vector<std::size_t> row_indices;
  std::size_t selected_count = 0;
};

template <class T>
struct MassLossResult {
  T loss = T(0);
  Matrix<T> grad_raw;  // d loss / d raw scores
  MassReport report;
};

// Scaled dot-product affinity: raw[m,n] = <wk^T f_m, wq^T f_n> / sqrt(d_k)
// with d_k = wk.cols(). Features are rows of `features`.
template <class T>
AffinityMatrix<T> affinity_dot(const Matrix<T>& features, const Matrix<T>& wk,
                               const Matrix<T>& wq);

// L2 affinity: raw[m,n] = -||f_m - f_n||^2 / 2. Symmetric, zero diagonal,
// non-positive.
template <class T>
AffinityMatrix<T> affinity_l2(const Matrix<T>& features);

// Mass of the normalized scores over the target entries. Normalizes a copy
// under `scope` if w has no matching normalization yet.
template <class T>
MassReport target_mass(const AffinityMatrix<T>& w, const TargetMatrix& t,
                       SoftmaxScope scope);

// Convenience: uses w.scope when already normalized, MatrixWise otherwise.
template <class T>
MassReport target_mass(const AffinityMatrix<T>& w, const TargetMatrix& t);

// Loss over the target mass (or per-entry BCE), with the analytic gradient
// w.r.t. the raw scores, chained through the scope's softmax.
template <class T>
MassLossResult<T> mass_loss(const AffinityMatrix<T>& w, const TargetMatrix& t,
                            const LossConfig& cfg);

// total = main + lambda * aff; merged gradients elementwise over matching
// parameter lists.
template <class T>
std::pair<T, std::vector<Matrix<T>>> combine_losses(
    T main_loss, const std::vector<Matrix<T>>& main_grads, T aff_loss,
    const std::vector<Matrix<T>>& aff_grads, const LossConfig& cfg);

// Backward of affinity_l2: gradient on the features given the gradient on the
// raw scores. d raw[m,n] / d f_m = f_n - f_m (and symmetrically for f_n).
template <class T>
Matrix<T> affinity_l2_feature_grad(const Matrix<T>& features,
                                   const Matrix<T>& grad_raw);

}  // namespace affsup
