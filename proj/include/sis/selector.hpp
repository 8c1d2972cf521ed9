// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "sis/influence.hpp"
#include "sis/model.hpp"
#include "sis/pomcp.hpp"

namespace sis {

struct SelectorConfig {
  double lambda = 0.7;
  double c_meta = 0.3;
  double ema_alpha = 0.1;
  bool literal_paper_sign = false;   // V_IALS = +lhat + bonus
  bool literal_paper_bonus = false;  // bonus = c * sqrt(ln n_arm / i)

  void validate() const;
};

/// Meta-bandit state. Counters are per real step; lhat persists.
struct SelectorStats {
  SelectorConfig cfg;
  int i = 0;
  int n_gs = 0;
  int n_ials = 0;
  std::optional<double> lhat;  // empty until the first sample
};

/// Per-trajectory sample of the KL upper bound (nats): mean over steps of
/// -log I(src_k | d_k) - H(S_src | s_{k-1}, a_{k-1}).
double kl_sample(const TrajectoryRecord& traj, const InfluencePredictor& predictor, const DomainModel& domain);
/// Same, starting from a predictor state that already consumed traj.prefix().
double kl_sample(const TrajectoryRecord& traj, const InfluencePredictor& predictor, const DomainModel& domain,
                 PredictorCarry prefix_carry);

void update_lhat(SelectorStats& stats, double l);

/// Arm values; the arm must have been pulled at least once.
double value_ials(const SelectorStats& stats);
double value_gs(const SelectorStats& stats);

SimulatorKind choose_simulator(const SelectorStats& stats);
void record_choice(SelectorStats& stats, SimulatorKind kind);
void reset_step(SelectorStats& stats);

}  // namespace sis
