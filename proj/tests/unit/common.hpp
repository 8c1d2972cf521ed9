#pragma once

#include "sis/gac.hpp"
#include "sis/replay_buffer.hpp"

namespace sis::testing {

inline GacConfig tiny_gac(GacFixedPolicy policy = GacFixedPolicy::ProbabilityMatching) {
  GacConfig c;
  c.n_fixed_agents = 4;
  c.horizon = 5;
  c.fixed_policy = policy;
  return c;
}

/// Random training sequence from uniform play: random prefix length, then recorded steps.
inline TrainingSequence random_sequence(const DomainModel& dom, Rng& rng, int max_prefix, int max_steps) {
  FactoredState s = dom.sample_initial(rng);
  TrainingSequence seq{LocalHistory(dom.project_local(s)), {}};
  const int prefix = static_cast<int>(rng.below(static_cast<std::uint64_t>(max_prefix) + 1));
  const int steps = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_steps)));
  for (int k = 0; k < prefix + steps; ++k) {
    const auto a = static_cast<ActionId>(rng.below(static_cast<std::uint64_t>(dom.num_actions())));
    const auto g = dom.step_global(s, a, rng);
    const LocalState l = dom.project_local(g.next);
    if (k < prefix)
      seq.prefix.extend(a, l.values);
    else
      seq.steps.push_back({a, l, g.source});
    s = g.next;
  }
  return seq;
}

}  // namespace sis::testing
