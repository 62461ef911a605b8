#include "affsup/optim.hpp"

#include "affsup/kernels.hpp"

namespace affsup {

void SgdConfig::validate() const {
  if (!(lr > 0.0f)) throw ConfigError("sgd: lr must be > 0");
  if (!(momentum >= 0.0f && momentum < 1.0f))
    throw ConfigError("sgd: momentum must be in [0, 1)");
  if (weight_decay < 0.0f) throw ConfigError("sgd: weight_decay must be >= 0");
}

SgdState SgdState::init(const std::vector<MatF*>& params,
                        const SgdConfig& cfg) {
  cfg.validate();
  SgdState st;
  st.lr = cfg.lr;
  st.velocity.reserve(params.size());
  for (const MatF* p : params) st.velocity.emplace_back(p->rows(), p->cols());
  return st;
}

float lr_at_epoch(const SgdConfig& cfg, int epoch) {
  float lr = cfg.lr;
  for (const auto& [e, v] : cfg.schedule)
    if (epoch >= e) lr = v;
  return lr;
}

void sgd_step(const std::vector<MatF*>& params, const std::vector<MatF>& grads,
              SgdState& state, const SgdConfig& cfg) {
  if (params.size() != grads.size() ||
      params.size() != state.velocity.size())
    throw ShapeError("sgd_step: parameter/gradient count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    check_same_shape(*params[i], grads[i], "sgd_step");
    if (!grads[i].all_finite())
      throw NumericError("sgd_step: non-finite gradient, step aborted");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    MatF& v = state.velocity[i];
    MatF& p = *params[i];
    const std::size_t n = p.size();
    kernels::scale(cfg.momentum, v.data(), n);
    kernels::axpy(1.0f, grads[i].data(), v.data(), n);
    if (cfg.weight_decay != 0.0f)
      kernels::axpy(cfg.weight_decay, p.data(), v.data(), n);
    kernels::axpy(-state.lr, v.data(), p.data(), n);
  }
}

}  // namespace affsup
