// SPDX-License-Identifier: Apache-2.0
#include "sis/gac.hpp"

#include <stdexcept>

namespace sis {

void GacConfig::validate() const {
  if (n_fixed_agents < 2)
    throw std::invalid_argument("gac: n_fixed_agents must be >= 2 (ring needs two neighbours)");
  if (horizon < 1 || horizon > 255) throw std::invalid_argument("gac: horizon must be in [1, 255]");
  if (!(obs_noise >= 0.0 && obs_noise <= 0.5))
    throw std::invalid_argument("gac: obs_noise must be in [0, 0.5]");
}

double gac_fixed_policy_prob(const GacCounters& c, GacFixedPolicy policy) {
  const double f_left = (c.succ_left + 1.0) / (c.att_left + 2.0);
  const double f_right = (c.succ_right + 1.0) / (c.att_right + 2.0);
  switch (policy) {
    case GacFixedPolicy::ProbabilityMatching:
      return f_left / (f_left + f_right);
    case GacFixedPolicy::Greedy:
      // Cross-multiplied comparison keeps exact ties exact.
      {
        const long lhs = static_cast<long>(c.succ_left + 1) * (c.att_right + 2);
        const long rhs = static_cast<long>(c.succ_right + 1) * (c.att_left + 2);
        return lhs > rhs ? 1.0 : (lhs < rhs ? 0.0 : 0.5);
      }
  }
  return 0.5;
}

GacDomain::GacDomain(GacConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  state_card_.assign(4 * static_cast<std::size_t>(cfg_.n_fixed_agents), cfg_.horizon + 1);
  state_card_.push_back(2);
  state_card_.push_back(cfg_.horizon + 1);
}

FactoredState GacDomain::sample_initial(Rng&) const {
  return FactoredState{std::vector<Value>(state_card_.size(), 0)};
}

GacCounters GacDomain::counters(const FactoredState& s, int j) const {
  const auto* p = s.values.data() + 4 * static_cast<std::size_t>(j);
  return {p[0], p[1], p[2], p[3]};
}

double GacDomain::fixed_policy_prob(const FactoredState& s, int j) const {
  return gac_fixed_policy_prob(counters(s, j), cfg_.fixed_policy);
}

std::array<double, 2> GacDomain::source_probs(const FactoredState& s) const {
  // Left neighbour is ring agent n (fixed index n-1); its right chair is chair 0.
  // Right neighbour is ring agent 1 (fixed index 0); its left chair is chair 1.
  return {1.0 - fixed_policy_prob(s, n_fixed() - 1), fixed_policy_prob(s, 0)};
}

SourceValue GacDomain::source_of(std::span<const int> fixed_actions) const {
  return SourceValue{{static_cast<Value>(fixed_actions[n_fixed() - 1] == kRight),
                      static_cast<Value>(fixed_actions[0] == kLeft)}};
}

FactoredState GacDomain::resolve(const FactoredState& s, std::span<const int> fixed_actions,
                                 ActionId planner_action) const {
  const int ring = n_fixed() + 1;
  auto act = [&](int i) { return i == 0 ? planner_action : fixed_actions[i - 1]; };
  FactoredState next = s;
  int planner_outcome = 0;
  for (int i = 0; i < ring; ++i) {
    const int a = act(i);
    const bool contested = a == kLeft ? act((i + ring - 1) % ring) == kRight
                                      : act((i + 1) % ring) == kLeft;
    const int got = contested ? 0 : 1;
    if (i == 0) {
      planner_outcome = got;
      continue;
    }
    auto* c = next.values.data() + 4 * static_cast<std::size_t>(i - 1);
    if (a == kLeft) {
      c[0] = static_cast<Value>(c[0] + got);
      c[2] = static_cast<Value>(c[2] + 1);
    } else {
      c[1] = static_cast<Value>(c[1] + got);
      c[3] = static_cast<Value>(c[3] + 1);
    }
  }
  next.values[outcome_slot()] = static_cast<Value>(planner_outcome);
  auto& step = next.values[outcome_slot() + 1];
  if (step < cfg_.horizon) ++step;
  return next;
}

double GacDomain::observation_prob(ObservationId o, int outcome) const {
  return o == outcome ? 1.0 - cfg_.obs_noise : cfg_.obs_noise;
}

ObservationId GacDomain::observe(int outcome, Rng& rng) const {
  return rng.bernoulli(cfg_.obs_noise) ? 1 - outcome : outcome;
}

GlobalStep GacDomain::step_global(const FactoredState& s, ActionId a, Rng& rng) const {
  thread_local std::vector<int> actions;
  actions.resize(static_cast<std::size_t>(n_fixed()));
  for (int j = 0; j < n_fixed(); ++j)
    actions[j] = rng.bernoulli(fixed_policy_prob(s, j)) ? kLeft : kRight;
  GlobalStep out;
  out.source = source_of(actions);
  out.next = resolve(s, actions, a);
  const int got = outcome(out.next);
  out.reward = got;
  out.observation = observe(got, rng);
  return out;
}

LocalStep GacDomain::step_local(const LocalState&, const SourceValue& src, ActionId a,
                                Rng& rng) const {
  const bool contested = a == kLeft ? src.values[0] != 0 : src.values[1] != 0;
  const int got = contested ? 0 : 1;
  LocalStep out;
  out.next = LocalState{{static_cast<Value>(got)}};
  out.reward = got;
  out.observation = observe(got, rng);
  return out;
}

double GacDomain::source_entropy(const FactoredState& s, ActionId) const {
  const auto p = source_probs(s);
  return binary_entropy(p[0]) + binary_entropy(p[1]);
}

LocalState GacDomain::project_local(const FactoredState& s) const {
  return LocalState{{s.values[outcome_slot()]}};
}

SourceValue GacDomain::project_source_next(const FactoredState& s, ActionId, Rng& rng) const {
  const auto p = source_probs(s);
  return SourceValue{{static_cast<Value>(rng.bernoulli(p[0])), static_cast<Value>(rng.bernoulli(p[1]))}};
}

}  // namespace sis
