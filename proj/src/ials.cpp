// SPDX-License-Identifier: Apache-2.0
#include "sis/ials.hpp"

#include <stdexcept>

namespace sis {

IalsState ials_reset(const InfluencePredictor& predictor, const LocalHistory& d) {
  if (d.empty()) throw std::invalid_argument("ials_reset: history must contain the initial local state");
  IalsState st{d, {}};
  predictor.reset(st.history, st.carry);
  return st;
}

IalsTransition ials_step(IalsState& state, ActionId a, const DomainModel& domain,
                         const InfluencePredictor& predictor, Rng& rng) {
  IalsTransition out;
  out.source = predictor.sample(state.history, state.carry, rng);
  LocalStep step = domain.step_local(state.local(), out.source, a, rng);
  state.history.extend(a, step.next.values);
  predictor.advance(state.history, state.carry);
  out.observation = step.observation;
  out.reward = step.reward;
  return out;
}

}  // namespace sis
