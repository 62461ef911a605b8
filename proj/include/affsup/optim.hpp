#pragma once

#include <utility>
#include <vector>

#include "affsup/matrix.hpp"

namespace affsup {

struct SgdConfig {
  float lr = 0.1f;
  float momentum = 0.9f;
  float weight_decay = 5e-4f;
  // (epoch, lr) steps; the last step at or before the current epoch wins.
  std::vector<std::pair<int, float>> schedule;

  void validate() const;
};

struct SgdState {
  std::vector<MatF> velocity;
  float lr = 0.0f;

  static SgdState init(const std::vector<MatF*>& params, const SgdConfig& cfg);
};

float lr_at_epoch(const SgdConfig& cfg, int epoch);

// v <- momentum*v + grad + weight_decay*param; param <- param - lr*v.
// Non-finite gradients abort the step (NumericError) before any mutation.
void sgd_step(const std::vector<MatF*>& params, const std::vector<MatF>& grads,
              SgdState& state, const SgdConfig& cfg);

}  // namespace affsup
