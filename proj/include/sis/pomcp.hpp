// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "sis/ials.hpp"
#include "sis/influence.hpp"
#include "sis/model.hpp"
#include "sis/rng.hpp"
#include "sis/search_tree.hpp"

namespace sis {

struct SearchConfig {
  double ucb_c = 100.0;
  double gamma = 1.0;
  int effective_horizon = 0;  // 0: unlimited
  int particles = 1000;

  void validate() const;
};

enum class SimulatorKind : std::uint8_t { Global, Ials };

struct TrajectoryStep {
  ActionId action = 0;
  ObservationId observation = 0;
  Reward reward = 0.0;
  // Global-simulator trajectories only.
  std::optional<SourceValue> source;
  std::optional<FactoredState> prev_global;
};

/// One simulated trajectory, recorded before it touches the tree.
struct TrajectoryRecord {
  SimulatorKind origin = SimulatorKind::Global;
  std::size_t start_step = 0;        // steps in the starting particle's history
  LocalHistory history;              // starting history followed by every simulated step
  std::vector<TrajectoryStep> steps;
  std::optional<FactoredState> final_global;

  std::size_t depth() const { return steps.size(); }
  LocalHistory prefix() const { return history.prefix(start_step); }
  /// Global state reached after simulated step k (Global origin only).
  const FactoredState& global_after(std::size_t k) const;
};

/// Remaining simulation depth from real step t.
int depth_budget(const DomainModel& domain, const SearchConfig& cfg, std::size_t t);

ActionId ucb1_action(const SearchTree& tree, SearchTree::NodeId node, double c);

/// Greedy root action; throws std::logic_error if no root action was visited.
ActionId best_action(const SearchTree& tree);

/// Tree descent with UCB1 followed by a uniform random rollout, using the global simulator.
TrajectoryRecord simulate_once(const SearchTree& tree, const AugmentedParticle& start,
                               const DomainModel& domain, const SearchConfig& cfg, Rng& rng);
/// Same, using the influence-augmented local simulator from a prepared state.
TrajectoryRecord simulate_once(const SearchTree& tree, IalsState start, const DomainModel& domain,
                               const InfluencePredictor& predictor, const SearchConfig& cfg, Rng& rng);

/// Uniform random policy for `depth` steps with the global simulator (no tree).
TrajectoryRecord rollout_global(const AugmentedParticle& start, const DomainModel& domain, int depth,
                                Rng& rng);

/// Discounted return from step k onward.
std::vector<double> discounted_returns(std::span<const TrajectoryStep> steps, double gamma);

/// Updates statistics along the path, adds exactly one node, and deposits
/// particles from global-simulator trajectories.
void backup(SearchTree& tree, const TrajectoryRecord& traj, const SearchConfig& cfg);

class ParticleDeprivation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BeliefUpdateStats {
  std::size_t attempts = 0;  // global simulator calls
  std::size_t accepted = 0;
  std::size_t fallback = 0;  // particles borrowed from the tree
};

std::vector<AugmentedParticle> initial_belief(const DomainModel& domain, std::size_t n, Rng& rng);

/// Rejection particle filter. Tries up to 100 * capacity transitions; when
/// fewer than capacity are accepted, tops up with `fallback` particles.
std::vector<AugmentedParticle> advance_belief(std::span<const AugmentedParticle> belief, ActionId a,
                                              ObservationId o, const DomainModel& domain, Rng& rng,
                                              std::size_t capacity,
                                              std::span<const AugmentedParticle> fallback = {},
                                              BeliefUpdateStats* stats = nullptr);

}  // namespace sis
