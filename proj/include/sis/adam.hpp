// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

namespace sis {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long t = 0;

  static AdamState fresh(Eigen::Index n) {
    return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0};
  }
};

/// One bias-corrected Adam update of theta in place.
void adam_step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad, AdamState& state,
               const AdamConfig& cfg);

}  // namespace sis
