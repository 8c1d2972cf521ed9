// SPDX-License-Identifier: Apache-2.0
#include "sis/selector.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace sis {

void SelectorConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("selector.lambda must be >= 0");
  if (!(c_meta >= 0.0) || !std::isfinite(c_meta)) throw std::invalid_argument("selector.c_meta must be >= 0");
  if (!(ema_alpha > 0.0 && ema_alpha <= 1.0)) throw std::invalid_argument("selector.ema_alpha must be in (0, 1]");
}

double kl_sample(const TrajectoryRecord& traj, const InfluencePredictor& predictor, const DomainModel& domain) {
  PredictorCarry carry;
  predictor.reset(traj.prefix(), carry);
  return kl_sample(traj, predictor, domain, std::move(carry));
}

double kl_sample(const TrajectoryRecord& traj, const InfluencePredictor& predictor, const DomainModel& domain,
                 PredictorCarry carry) {
  if (traj.origin != SimulatorKind::Global)
    throw std::invalid_argument("kl_sample: needs a global-simulator trajectory");
  if (traj.steps.empty()) throw std::invalid_argument("kl_sample: empty trajectory");
  LocalHistory d = traj.prefix();
  double total = 0.0;
  for (std::size_t k = 0; k < traj.steps.size(); ++k) {
    const auto& st = traj.steps[k];
    total += -predictor.log_prob(d, carry, *st.source) - domain.source_entropy(*st.prev_global, st.action);
    d.extend(st.action, traj.history.local(traj.start_step + k + 1));
    predictor.advance(d, carry);
  }
  return total / static_cast<double>(traj.steps.size());
}

void update_lhat(SelectorStats& stats, double l) {
  if (!std::isfinite(l)) throw std::invalid_argument("update_lhat: non-finite sample");
  if (!stats.lhat)
    stats.lhat = l;
  else
    stats.lhat = (1.0 - stats.cfg.ema_alpha) * *stats.lhat + stats.cfg.ema_alpha * l;
}

namespace {

double bonus(const SelectorStats& s, int n_arm) {
  const double i = s.i, n = n_arm;
  if (s.cfg.literal_paper_bonus) return s.cfg.c_meta * std::sqrt(std::log(n) / i);
  return s.cfg.c_meta * std::sqrt(std::log(i) / n);
}

}  // namespace

double value_ials(const SelectorStats& s) {
  const double l = s.lhat.value_or(0.0);
  return (s.cfg.literal_paper_sign ? l : -l) + bonus(s, s.n_ials);
}

double value_gs(const SelectorStats& s) { return -s.cfg.lambda + bonus(s, s.n_gs); }

SimulatorKind choose_simulator(const SelectorStats& s) {
  if (s.n_gs == 0) return SimulatorKind::Global;
  if (s.n_ials == 0) return SimulatorKind::Ials;
  return value_ials(s) > value_gs(s) ? SimulatorKind::Ials : SimulatorKind::Global;
}

void record_choice(SelectorStats& s, SimulatorKind kind) {
  ++s.i;
  if (kind == SimulatorKind::Global)
    ++s.n_gs;
  else
    ++s.n_ials;
}

void reset_step(SelectorStats& s) {
  s.i = 0;
  s.n_gs = 0;
  s.n_ials = 0;
}

}  // namespace sis
