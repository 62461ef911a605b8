#include "affsup/affinity.hpp"

#include <algorithm>
#include <cmath>

#include "affsup/kernels.hpp"
#include "affsup/softmax.hpp"

namespace affsup {

const char* loss_form_name(LossForm form) {
  switch (form) {
    case LossForm::L2: return "l2";
    case LossForm::SmoothL1: return "smooth_l1";
    case LossForm::Focal: return "focal";
    case LossForm::RowFocal: return "row_focal";
    case LossForm::EntryBCE: return "entry_bce";
  }
  return "?";
}

LossForm loss_form_from_name(const std::string& name) {
  if (name == "l2") return LossForm::L2;
  if (name == "smooth_l1") return LossForm::SmoothL1;
  if (name == "focal") return LossForm::Focal;
  if (name == "row_focal") return LossForm::RowFocal;
  if (name == "entry_bce") return LossForm::EntryBCE;
  throw ConfigError("unknown loss form: " + name);
}

const char* scope_name(SoftmaxScope scope) {
  return scope == SoftmaxScope::MatrixWise ? "matrix" : "row";
}

SoftmaxScope scope_from_name(const std::string& name) {
  if (name == "matrix") return SoftmaxScope::MatrixWise;
  if (name == "row") return SoftmaxScope::RowWise;
  throw ConfigError("unknown softmax scope: " + name);
}

void LossConfig::validate() const {
  if (gamma < 0.0) throw ConfigError("gamma must be >= 0");
  if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
  if (!(mass_floor > 0.0 && mass_floor <= 1e-6))
    throw ConfigError("mass_floor must be in (0, 1e-6]");
}

template <class T>
void AffinityMatrix<T>::normalize(SoftmaxScope s) {
  normalized = s == SoftmaxScope::MatrixWise ? softmax_matrix(raw)
                                             : softmax_rows(raw);
  scope = s;
}

template <class T>
AffinityMatrix<T> affinity_dot(const Matrix<T>& features, const Matrix<T>& wk,
                               const Matrix<T>& wq) {
  if (wk.rows() != features.cols() || !wk.same_shape(wq))
    throw ShapeError("affinity_dot: projection shapes do not match features");
  if (wk.cols() == 0) throw ShapeError("affinity_dot: d_k must be >= 1");
  const Matrix<T> k = matmul(features, wk);
  const Matrix<T> q = matmul(features, wq);
  const T inv_sqrt_dk = T(1) / std::sqrt(static_cast<T>(wk.cols()));
  const std::size_t n = features.rows();
  Matrix<T> raw(n, n);
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t j = 0; j < n; ++j)
      raw(m, j) = kernels::dot(k.row(m), q.row(j), k.cols()) * inv_sqrt_dk;
  return AffinityMatrix<T>(std::move(raw));
}

template <class T>
AffinityMatrix<T> affinity_l2(const Matrix<T>& features) {
  const std::size_t n = features.rows();
  Matrix<T> raw(n, n);
  for (std::size_t m = 0; m < n; ++m) {
    raw(m, m) = T(0);
    for (std::size_t j = m + 1; j < n; ++j) {
      const T w =
          T(-0.5) * kernels::sq_l2(features.row(m), features.row(j),
                                   features.cols());
      raw(m, j) = w;
      raw(j, m) = w;
    }
  }
  return AffinityMatrix<T>(std::move(raw));
}

namespace {

template <class T>
void check_square_match(const Matrix<T>& raw, const TargetMatrix& t) {
  if (raw.rows() != raw.cols() || raw.rows() != t.n())
    throw ShapeError("affinity/target shape mismatch");
}

template <class T>
MassReport mass_from_normalized(const Matrix<T>& wt, const TargetMatrix& t,
                                SoftmaxScope scope) {
  MassReport rep;
  rep.selected_count = t.count();
  const std::size_t n = t.n();
  if (scope == SoftmaxScope::MatrixWise) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (t.at(i, j)) m += static_cast<double>(wt(i, j));
    rep.mass = std::clamp(m, 0.0, 1.0);
  } else {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!t.row_has_target(i)) continue;
      double mi = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (t.at(i, j)) mi += static_cast<double>(wt(i, j));
      mi = std::clamp(mi, 0.0, 1.0);
      rep.row_indices.push_back(i);
      rep.row_masses.push_back(mi);
      total += mi;
    }
    rep.mass = rep.row_masses.empty()
                   ? 0.0
                   : std::clamp(total / rep.row_masses.size(), 0.0, 1.0);
  }
  return rep;
}

// Loss of the aggregate-mass forms evaluated at mass m; writes dL/dm.
double aggregate_loss(double m, LossForm form, const LossConfig& cfg,
                      double* d_loss_d_mass) {
  const double x = 1.0 - m;
  switch (form) {
    case LossForm::L2:
      *d_loss_d_mass = -2.0 * x;
      return x * x;
    case LossForm::SmoothL1:
      if (std::abs(x) < 0.5) {
        *d_loss_d_mass = -2.0 * x;
        return x * x;
      }
      *d_loss_d_mass = x >= 0.0 ? -1.0 : 1.0;
      return std::abs(x) - 0.25;
    default: {  // focal: -(1 - m)^gamma * log(max(m, floor))
      const double mc = std::max(m, cfg.mass_floor);
      const double logm = std::log(mc);
      const double xg = std::pow(x, cfg.gamma);
      double t1 = 0.0;
      if (cfg.gamma > 0.0 && x > 0.0)
        t1 = cfg.gamma * std::pow(x, cfg.gamma - 1.0) * logm;
      const double t2 = m > cfg.mass_floor ? xg / mc : 0.0;
      *d_loss_d_mass = t1 - t2;
      return -xg * logm;
    }
  }
}

template <class T>
MassLossResult<T> entry_bce_loss(const AffinityMatrix<T>& w,
                                 const TargetMatrix& t, const LossConfig& cfg) {
  const std::size_t n = t.n();
  const double norm = cfg.bce_normalize ? 1.0 / static_cast<double>(n * n) : 1.0;
  MassLossResult<T> res;
  res.grad_raw = Matrix<T>(n, n);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double o = static_cast<double>(w.raw(i, j));
      const double y = t.at(i, j) ? 1.0 : 0.0;
      // stable binary cross entropy with logits
      loss += std::max(o, 0.0) - o * y + std::log1p(std::exp(-std::abs(o)));
      const double p = o >= 0.0 ? 1.0 / (1.0 + std::exp(-o))
                                : std::exp(o) / (1.0 + std::exp(o));
      res.grad_raw(i, j) = static_cast<T>((p - y) * norm);
    }
  }
  res.loss = static_cast<T>(loss * norm);
  // mass still tracked for reporting/ablation, under the configured scope
  const Matrix<T> wt = cfg.scope == SoftmaxScope::MatrixWise
                           ? softmax_matrix(w.raw)
                           : softmax_rows(w.raw);
  res.report = mass_from_normalized(wt, t, cfg.scope);
  return res;
}

}  // namespace

template <class T>
MassReport target_mass(const AffinityMatrix<T>& w, const TargetMatrix& t,
                       SoftmaxScope scope) {
  check_square_match(w.raw, t);
  if (w.has_normalized() && w.scope == scope)
    return mass_from_normalized(w.normalized, t, scope);
  const Matrix<T> wt = scope == SoftmaxScope::MatrixWise
                           ? softmax_matrix(w.raw)
                           : softmax_rows(w.raw);
  return mass_from_normalized(wt, t, scope);
}

template <class T>
MassReport target_mass(const AffinityMatrix<T>& w, const TargetMatrix& t) {
  return target_mass(w, t,
                     w.has_normalized() ? w.scope : SoftmaxScope::MatrixWise);
}

template <class T>
MassLossResult<T> mass_loss(const AffinityMatrix<T>& w, const TargetMatrix& t,
                            const LossConfig& cfg) {
  cfg.validate();
  check_square_match(w.raw, t);
  if (cfg.form == LossForm::EntryBCE) return entry_bce_loss(w, t, cfg);

  const std::size_t n = t.n();
  const bool log_based =
      cfg.form == LossForm::Focal || cfg.form == LossForm::RowFocal;
  if (log_based && t.count() == 0)
    throw DegenerateTargetError(
        "mass loss: target selects no entries (log undefined at mass 0)");

  const Matrix<T> wt = cfg.scope == SoftmaxScope::MatrixWise
                           ? softmax_matrix(w.raw)
                           : softmax_rows(w.raw);
  MassLossResult<T> res;
  res.report = mass_from_normalized(wt, t, cfg.scope);
  res.grad_raw = Matrix<T>(n, n);

  if (cfg.form == LossForm::RowFocal) {
    // Sum of per-row focal terms over rows that have targets.
    const auto& rows = res.report.row_indices;
    const auto& masses = res.report.row_masses;
    // RowWise reports per-row masses already; recompute them for MatrixWise.
    std::vector<std::size_t> idx;
    std::vector<double> mi;
    if (cfg.scope == SoftmaxScope::RowWise) {
      idx = rows;
      mi = masses;
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        if (!t.row_has_target(i)) continue;
        double m = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          if (t.at(i, j)) m += static_cast<double>(wt(i, j));
        idx.push_back(i);
        mi.push_back(std::clamp(m, 0.0, 1.0));
      }
    }
    double loss = 0.0;
    std::vector<double> dldm(mi.size());
    for (std::size_t r = 0; r < mi.size(); ++r)
      loss += aggregate_loss(mi[r], LossForm::Focal, cfg, &dldm[r]);
    res.loss = static_cast<T>(loss);

    if (cfg.scope == SoftmaxScope::RowWise) {
      for (std::size_t r = 0; r < idx.size(); ++r) {
        const std::size_t i = idx[r];
        for (std::size_t j = 0; j < n; ++j) {
          const double tij = t.at(i, j) ? 1.0 : 0.0;
          res.grad_raw(i, j) = static_cast<T>(
              dldm[r] * static_cast<double>(wt(i, j)) * (tij - mi[r]));
        }
      }
    } else {
      // Matrix softmax couples every entry to every row mass:
      // dL/dw[c,d] = wt[c,d] * (elig(c) ? l'(M_c) T[c,d] : 0) - wt[c,d] * s,
      // s = sum_i l'(M_i) M_i.
      double s = 0.0;
      for (std::size_t r = 0; r < mi.size(); ++r) s += dldm[r] * mi[r];
      std::vector<double> row_dldm(n, 0.0);
      std::vector<bool> eligible(n, false);
      for (std::size_t r = 0; r < idx.size(); ++r) {
        eligible[idx[r]] = true;
        row_dldm[idx[r]] = dldm[r];
      }
      for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t d = 0; d < n; ++d) {
          const double tcd = t.at(c, d) ? 1.0 : 0.0;
          const double direct = eligible[c] ? row_dldm[c] * tcd : 0.0;
          res.grad_raw(c, d) =
              static_cast<T>(static_cast<double>(wt(c, d)) * (direct - s));
        }
      }
    }
    return res;
  }

  // Aggregate-mass forms: L2, SmoothL1, Focal.
  double dldm = 0.0;
  const double loss = aggregate_loss(res.report.mass, cfg.form, cfg, &dldm);
  res.loss = static_cast<T>(loss);

  if (cfg.scope == SoftmaxScope::MatrixWise) {
    const double m = res.report.mass;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double tij = t.at(i, j) ? 1.0 : 0.0;
        res.grad_raw(i, j) =
            static_cast<T>(dldm * static_cast<double>(wt(i, j)) * (tij - m));
      }
  } else {
    // Mean of per-row masses: each eligible row contributes 1/R of the mass.
    const std::size_t r_count = res.report.row_indices.size();
    if (r_count > 0) {
      const double inv_r = 1.0 / static_cast<double>(r_count);
      for (std::size_t r = 0; r < r_count; ++r) {
        const std::size_t i = res.report.row_indices[r];
        const double mi = res.report.row_masses[r];
        for (std::size_t j = 0; j < n; ++j) {
          const double tij = t.at(i, j) ? 1.0 : 0.0;
          res.grad_raw(i, j) = static_cast<T>(
              dldm * inv_r * static_cast<double>(wt(i, j)) * (tij - mi));
        }
      }
    }
  }
  return res;
}

template <class T>
std::pair<T, std::vector<Matrix<T>>> combine_losses(
    T main_loss, const std::vector<Matrix<T>>& main_grads, T aff_loss,
    const std::vector<Matrix<T>>& aff_grads, const LossConfig& cfg) {
  cfg.validate();
  if (main_grads.size() != aff_grads.size())
    throw ShapeError("combine_losses: parameter-set size mismatch");
  const T lambda = static_cast<T>(cfg.lambda);
  std::vector<Matrix<T>> merged = main_grads;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    check_same_shape(merged[i], aff_grads[i], "combine_losses");
    add_in_place(merged[i], aff_grads[i], lambda);
  }
  return {main_loss + lambda * aff_loss, std::move(merged)};
}

template <class T>
Matrix<T> affinity_l2_feature_grad(const Matrix<T>& features,
                                   const Matrix<T>& grad_raw) {
  const std::size_t n = features.rows();
  if (grad_raw.rows() != n || grad_raw.cols() != n)
    throw ShapeError("affinity_l2_feature_grad: grad shape mismatch");
  // dL/df_m = sum_n (g[m,n] + g[n,m]) (f_n - f_m)
  Matrix<T> c(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) c(i, j) = grad_raw(i, j) + grad_raw(j, i);
  Matrix<T> out = matmul(c, features);
  for (std::size_t i = 0; i < n; ++i) {
    const T s = kernels::sum(c.row(i), n);
    kernels::axpy(-s, features.row(i), out.row(i), features.cols());
  }
  return out;
}

template struct AffinityMatrix<float>;
template struct AffinityMatrix<double>;
template AffinityMatrix<float> affinity_dot(const MatF&, const MatF&,
                                            const MatF&);
template AffinityMatrix<double> affinity_dot(const MatD&, const MatD&,
                                             const MatD&);
template AffinityMatrix<float> affinity_l2(const MatF&);
template AffinityMatrix<double> affinity_l2(const MatD&);
template MassReport target_mass(const AffinityMatrix<float>&,
                                const TargetMatrix&, SoftmaxScope);
template MassReport target_mass(const AffinityMatrix<double>&,
                                const TargetMatrix&, SoftmaxScope);
template MassReport target_mass(const AffinityMatrix<float>&,
                                const TargetMatrix&);
template MassReport target_mass(const AffinityMatrix<double>&,
                                const TargetMatrix&);
template MassLossResult<float> mass_loss(const AffinityMatrix<float>&,
                                         const TargetMatrix&,
                                         const LossConfig&);
template MassLossResult<double> mass_loss(const AffinityMatrix<double>&,
                                          const TargetMatrix&,
                                          const LossConfig&);
template std::pair<float, std::vector<MatF>> combine_losses(
    float, const std::vector<MatF>&, float, const std::vector<MatF>&,
    const LossConfig&);
template std::pair<double, std::vector<MatD>> combine_losses(
    double, const std::vector<MatD>&, double, const std::vector<MatD>&,
    const LossConfig&);
template MatF affinity_l2_feature_grad(const MatF&, const MatF&);
template MatD affinity_l2_feature_grad(const MatD&, const MatD&);

}  // namespace affsup
