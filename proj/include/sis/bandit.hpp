// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "sis/model.hpp"

namespace sis {

/// Stateless k-armed bandit with Bernoulli rewards, used to sanity-check search.
///
/// With observe_action set, the observation equals the action taken, which
/// makes every other observation impossible; otherwise there is a single
/// observation. There are no influence sources.
class BanditDomain final : public DomainModel {
 public:
  explicit BanditDomain(std::vector<double> means, int horizon = 1, bool observe_action = false);

  std::string name() const override { return "bandit"; }
  int num_actions() const override { return static_cast<int>(means_.size()); }
  int num_observations() const override { return observe_action_ ? num_actions() : 1; }
  int horizon() const override { return horizon_; }
  std::span<const int> state_cardinalities() const override { return state_card_; }
  std::span<const int> local_cardinalities() const override { return state_card_; }
  std::span<const int> source_cardinalities() const override { return {}; }

  FactoredState sample_initial(Rng&) const override { return FactoredState{{0}}; }
  GlobalStep step_global(const FactoredState& s, ActionId a, Rng& rng) const override;
  LocalStep step_local(const LocalState& local, const SourceValue& src, ActionId a,
                       Rng& rng) const override;
  double source_entropy(const FactoredState&, ActionId) const override { return 0.0; }
  LocalState project_local(const FactoredState&) const override { return LocalState{{0}}; }
  SourceValue project_source_next(const FactoredState&, ActionId, Rng&) const override { return {}; }

 private:
  Reward pull(ActionId a, Rng& rng) const;

  std::vector<double> means_;
  int horizon_;
  bool observe_action_;
  std::vector<int> state_card_{1};
};

}  // namespace sis
