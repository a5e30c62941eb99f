#pragma once

#include "cqr/tensor.hpp"

namespace cqr {

struct AdamState {
  Tensor m, v;
  int64_t t = 0;
};

struct AdamConfig {
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Standard bias-corrected adaptive-moment update.
void adam_step(Tensor& param, const Tensor& grad, AdamState& state, const AdamConfig& cfg);

}  // namespace cqr
