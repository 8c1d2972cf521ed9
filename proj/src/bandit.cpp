// SPDX-License-Identifier: Apache-2.0
#include "sis/bandit.hpp"

namespace sis {

BanditDomain::BanditDomain(std::vector<double> means, int horizon, bool observe_action)
    : means_(std::move(means)), horizon_(horizon), observe_action_(observe_action) {
  if (means_.empty()) throw std::invalid_argument("bandit: needs at least one arm");
  if (horizon_ < 1) throw std::invalid_argument("bandit: horizon must be >= 1");
}

Reward BanditDomain::pull(ActionId a, Rng& rng) const {
  const double p = means_[static_cast<std::size_t>(a)];
  // Deterministic arms skip the draw so the stream is unaffected.
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  return rng.bernoulli(p) ? 1.0 : 0.0;
}

GlobalStep BanditDomain::step_global(const FactoredState& s, ActionId a, Rng& rng) const {
  GlobalStep out;
  out.next = s;
  out.reward = pull(a, rng);
  out.observation = observe_action_ ? a : 0;
  return out;
}

LocalStep BanditDomain::step_local(const LocalState& local, const SourceValue&, ActionId a,
                                   Rng& rng) const {
  LocalStep out;
  out.next = local;
  out.reward = pull(a, rng);
  out.observation = observe_action_ ? a : 0;
  return out;
}

}  // namespace sis
