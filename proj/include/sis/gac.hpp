// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <vector>

#include "sis/model.hpp"

namespace sis {

enum class GacFixedPolicy {
  /// Target the left chair with probability f_left / (f_left + f_right).
  ProbabilityMatching,
  /// Target the side with the higher smoothed success frequency; ties are a coin flip.
  Greedy,
};

struct GacConfig {
  int n_fixed_agents = 64;
  int horizon = 10;
  double obs_noise = 0.2;
  GacFixedPolicy fixed_policy = GacFixedPolicy::Greedy;

  void validate() const;
};

/// Success/attempt counters of one fixed agent.
struct GacCounters {
  int succ_left = 0;
  int succ_right = 0;
  int att_left = 0;
  int att_right = 0;
};

/// Probability that a fixed agent targets its left chair.
double gac_fixed_policy_prob(const GacCounters& c,
                             GacFixedPolicy policy = GacFixedPolicy::ProbabilityMatching);

/// Grab-A-Chair: the planner (agent 0) and n fixed agents sit on a ring of
/// n + 1 agents and n + 1 chairs. Agent i sits between chair i (left) and
/// chair i + 1 (right); a chair is granted iff exactly one neighbour targets it.
///
/// State layout: 4 counters per fixed agent (succ_l, succ_r, att_l, att_r),
/// then the planner's outcome bit, then the step index.
/// Local state: [outcome]. Sources: [left neighbour targets chair 0,
/// right neighbour targets chair 1].
class GacDomain final : public DomainModel {
 public:
  static constexpr ActionId kLeft = 0;
  static constexpr ActionId kRight = 1;

  explicit GacDomain(GacConfig cfg = {});

  const GacConfig& config() const { return cfg_; }

  std::string name() const override { return "gac"; }
  int num_actions() const override { return 2; }
  int num_observations() const override { return 2; }
  int horizon() const override { return cfg_.horizon; }
  std::span<const int> state_cardinalities() const override { return state_card_; }
  std::span<const int> local_cardinalities() const override { return local_card_; }
  std::span<const int> source_cardinalities() const override { return source_card_; }

  FactoredState sample_initial(Rng& rng) const override;
  GlobalStep step_global(const FactoredState& s, ActionId a, Rng& rng) const override;
  LocalStep step_local(const LocalState& local, const SourceValue& src, ActionId a,
                       Rng& rng) const override;
  double source_entropy(const FactoredState& s, ActionId a) const override;
  LocalState project_local(const FactoredState& s) const override;
  SourceValue project_source_next(const FactoredState& s, ActionId a, Rng& rng) const override;

  int n_fixed() const { return cfg_.n_fixed_agents; }
  GacCounters counters(const FactoredState& s, int fixed_index) const;
  int outcome(const FactoredState& s) const { return s.values[outcome_slot()]; }
  int step_index(const FactoredState& s) const { return s.values[outcome_slot() + 1]; }
  /// P(left-neighbour targets chair 0), P(right-neighbour targets chair 1).
  std::array<double, 2> source_probs(const FactoredState& s) const;
  double fixed_policy_prob(const FactoredState& s, int fixed_index) const;

  /// Deterministic resolution of one round. fixed_actions[j] is the action of
  /// ring agent j + 1. Returns the successor with the planner outcome set.
  FactoredState resolve(const FactoredState& s, std::span<const int> fixed_actions,
                        ActionId planner_action) const;
  SourceValue source_of(std::span<const int> fixed_actions) const;
  /// P(observation | true outcome).
  double observation_prob(ObservationId o, int outcome) const;

 private:
  std::size_t outcome_slot() const { return 4 * static_cast<std::size_t>(cfg_.n_fixed_agents); }
  ObservationId observe(int outcome, Rng& rng) const;

  GacConfig cfg_;
  std::vector<int> state_card_;
  std::vector<int> local_card_{2};
  std::vector<int> source_card_{2, 2};
};

}  // namespace sis
