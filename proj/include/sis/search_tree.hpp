// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "sis/model.hpp"

namespace sis {

struct ActionStats {
  int visits = 0;
  double value = 0.0;  // running mean of discounted returns
};

/// POMCP history tree stored in flat arenas.
///
/// Nodes, per-action statistics, and the action x observation child table live
/// in contiguous vectors indexed by NodeId. Nothing is freed node by node:
/// reset() drops everything at once and prune() copies the retained subtree
/// into fresh arenas.
class SearchTree {
 public:
  using NodeId = std::int32_t;
  static constexpr NodeId kNone = -1;

  SearchTree(int num_actions, int num_observations);

  int num_actions() const { return num_actions_; }
  int num_observations() const { return num_observations_; }
  NodeId root() const { return 0; }
  std::size_t size() const { return visits_.size(); }

  NodeId add_node();
  int visits(NodeId n) const { return visits_[static_cast<std::size_t>(n)]; }
  int& visits(NodeId n) { return visits_[static_cast<std::size_t>(n)]; }
  const ActionStats& stats(NodeId n, ActionId a) const { return stats_[slot(n, a)]; }
  ActionStats& stats(NodeId n, ActionId a) { return stats_[slot(n, a)]; }
  NodeId child(NodeId n, ActionId a, ObservationId o) const { return children_[child_slot(n, a, o)]; }
  void set_child(NodeId n, ActionId a, ObservationId o, NodeId c) { children_[child_slot(n, a, o)] = c; }

  /// Particles deposited at a node (only by global-simulator trajectories).
  const std::vector<AugmentedParticle>& particles(NodeId n) const;
  void add_particle(NodeId n, AugmentedParticle p);

  /// Drops all nodes and starts over with an empty root.
  void reset();
  /// The (a, o) child becomes the root with its statistics; without such a
  /// child the tree restarts from an empty root.
  void prune(ActionId a, ObservationId o);

 private:
  std::size_t slot(NodeId n, ActionId a) const {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(num_actions_) + static_cast<std::size_t>(a);
  }
  std::size_t child_slot(NodeId n, ActionId a, ObservationId o) const {
    return slot(n, a) * static_cast<std::size_t>(num_observations_) + static_cast<std::size_t>(o);
  }

  int num_actions_;
  int num_observations_;
  std::vector<int> visits_;
  std::vector<ActionStats> stats_;
  std::vector<NodeId> children_;
  std::vector<std::int32_t> particle_list_;  // node -> index into particles_, or -1
  std::vector<std::vector<AugmentedParticle>> particles_;
};

}  // namespace sis
