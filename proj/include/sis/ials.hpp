// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sis/influence.hpp"
#include "sis/model.hpp"

namespace sis {

/// Influence-augmented local simulator state: (l_k, d_k) plus the predictor
/// state after consuming d_k, carried forward one step at a time.
struct IalsState {
  LocalHistory history;
  PredictorCarry carry;

  LocalState local() const { return history.local_state(history.length() - 1); }
};

struct IalsTransition {
  ObservationId observation = 0;
  Reward reward = 0.0;
  SourceValue source;
};

/// Replays d through the predictor. d must hold at least the initial local state.
IalsState ials_reset(const InfluencePredictor& predictor, const LocalHistory& d);

/// Samples a source value from the predictor, applies the local model, and
/// advances history and predictor state by one step. Never touches a global state.
IalsTransition ials_step(IalsState& state, ActionId a, const DomainModel& domain,
                         const InfluencePredictor& predictor, Rng& rng);

}  // namespace sis
