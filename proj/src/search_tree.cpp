// SPDX-License-Identifier: Apache-2.0
#include "sis/search_tree.hpp"

#include <stdexcept>
#include <utility>

namespace sis {

SearchTree::SearchTree(int num_actions, int num_observations)
    : num_actions_(num_actions), num_observations_(num_observations) {
  if (num_actions < 1 || num_observations < 1)
    throw std::invalid_argument("SearchTree: needs at least one action and one observation");
  reset();
}

SearchTree::NodeId SearchTree::add_node() {
  const auto id = static_cast<NodeId>(visits_.size());
  visits_.push_back(0);
  stats_.resize(stats_.size() + static_cast<std::size_t>(num_actions_));
  children_.resize(children_.size() + static_cast<std::size_t>(num_actions_ * num_observations_), kNone);
  particle_list_.push_back(-1);
  return id;
}

const std::vector<AugmentedParticle>& SearchTree::particles(NodeId n) const {
  static const std::vector<AugmentedParticle> kEmpty;
  const auto idx = particle_list_[static_cast<std::size_t>(n)];
  return idx < 0 ? kEmpty : particles_[static_cast<std::size_t>(idx)];
}

void SearchTree::add_particle(NodeId n, AugmentedParticle p) {
  auto& idx = particle_list_[static_cast<std::size_t>(n)];
  if (idx < 0) {
    idx = static_cast<std::int32_t>(particles_.size());
    particles_.emplace_back();
  }
  particles_[static_cast<std::size_t>(idx)].push_back(std::move(p));
}

void SearchTree::reset() {
  visits_.clear();
  stats_.clear();
  children_.clear();
  particle_list_.clear();
  particles_.clear();
  add_node();
}

void SearchTree::prune(ActionId a, ObservationId o) {
  const NodeId keep = child(root(), a, o);
  if (keep == kNone) {
    reset();
    return;
  }
  SearchTree fresh(num_actions_, num_observations_);
  // Breadth-first copy; old ids map to compacted new ids.
  std::vector<std::pair<NodeId, NodeId>> queue{{keep, fresh.root()}};
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto [from, to] = queue[head];
    fresh.visits(to) = visits(from);
    for (ActionId act = 0; act < num_actions_; ++act) {
      fresh.stats(to, act) = stats(from, act);
      for (ObservationId obs = 0; obs < num_observations_; ++obs) {
        const NodeId c = child(from, act, obs);
        if (c == kNone) continue;
        const NodeId nc = fresh.add_node();
        fresh.set_child(to, act, obs, nc);
        queue.emplace_back(c, nc);
      }
    }
    const auto idx = particle_list_[static_cast<std::size_t>(from)];
    if (idx >= 0) {
      fresh.particle_list_[static_cast<std::size_t>(to)] = static_cast<std::int32_t>(fresh.particles_.size());
      fresh.particles_.push_back(std::move(particles_[static_cast<std::size_t>(idx)]));
    }
  }
  *this = std::move(fresh);
}

}  // namespace sis
