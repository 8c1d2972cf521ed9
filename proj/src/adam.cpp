// SPDX-License-Identifier: Apache-2.0
#include "sis/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace sis {

void adam_step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad, AdamState& state,
               const AdamConfig& cfg) {
  if (grad.size() != theta.size()) throw std::invalid_argument("adam_step: gradient shape mismatch");
  if (state.m.size() != theta.size()) state = AdamState::fresh(theta.size());
  ++state.t;
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
  state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  theta.array() -= cfg.learning_rate * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + cfg.epsilon);
}

}  // namespace sis
