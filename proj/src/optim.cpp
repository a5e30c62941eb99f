#include "cqr/optim.hpp"

#include <cmath>

namespace cqr {

void adam_step(Tensor& param, const Tensor& grad, AdamState& state, const AdamConfig& cfg) {
  check_shapes(param.rows == grad.rows && param.cols == grad.cols, "adam_step", param, grad);
  if (state.t == 0) {
    state.m = Tensor(param.rows, param.cols);
    state.v = Tensor(param.rows, param.cols);
  }
  ++state.t;
  double c1 = 1.0 - std::pow(cfg.beta1, double(state.t));
  double c2 = 1.0 - std::pow(cfg.beta2, double(state.t));
  for (size_t i = 0; i < param.size(); ++i) {
    double g = grad.data[i];
    state.m.data[i] = cfg.beta1 * state.m.data[i] + (1.0 - cfg.beta1) * g;
    state.v.data[i] = cfg.beta2 * state.v.data[i] + (1.0 - cfg.beta2) * g * g;
    double mhat = state.m.data[i] / c1;
    double vhat = state.v.data[i] / c2;
    param.data[i] -= cfg.step_size * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

}  // namespace cqr
