// SPDX-License-Identifier: Apache-2.0
#include "sis/pomcp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sis {

void SearchConfig::validate() const {
  if (!(ucb_c >= 0.0) || !std::isfinite(ucb_c)) throw std::invalid_argument("search.ucb_c must be >= 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("search.gamma must be in (0, 1]");
  if (effective_horizon < 0) throw std::invalid_argument("search.effective_horizon must be >= 0");
  if (particles < 1) throw std::invalid_argument("search.particles must be >= 1");
}

const FactoredState& TrajectoryRecord::global_after(std::size_t k) const {
  if (origin != SimulatorKind::Global) throw std::logic_error("global_after: not a global-simulator trajectory");
  if (k + 1 < steps.size()) return *steps[k + 1].prev_global;
  return *final_global;
}

int depth_budget(const DomainModel& domain, const SearchConfig& cfg, std::size_t t) {
  int d = domain.horizon() - static_cast<int>(t);
  if (cfg.effective_horizon > 0) d = std::min(d, cfg.effective_horizon);
  return d;
}

ActionId ucb1_action(const SearchTree& tree, SearchTree::NodeId node, double c) {
  const int n_actions = tree.num_actions();
  for (ActionId a = 0; a < n_actions; ++a)
    if (tree.stats(node, a).visits == 0) return a;
  const double log_n = std::log(static_cast<double>(tree.visits(node)));
  ActionId best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (ActionId a = 0; a < n_actions; ++a) {
    const auto& st = tree.stats(node, a);
    const double v = st.value + c * std::sqrt(log_n / st.visits);
    if (v > best_v) {
      best_v = v;
      best = a;
    }
  }
  return best;
}

ActionId best_action(const SearchTree& tree) {
  ActionId best = -1;
  double best_v = -std::numeric_limits<double>::infinity();
  for (ActionId a = 0; a < tree.num_actions(); ++a) {
    const auto& st = tree.stats(tree.root(), a);
    if (st.visits == 0) continue;
    if (best < 0 || st.value > best_v) {
      best_v = st.value;
      best = a;
    }
  }
  if (best < 0) throw std::logic_error("best_action: no root action has been visited");
  return best;
}

namespace {

// Shared descent/rollout loop. `step(a)` advances the simulator and fills one TrajectoryStep.
template <class StepFn>
void descend(const SearchTree& tree, const SearchConfig& cfg, int depth, Rng& rng,
             TrajectoryRecord& rec, StepFn&& step) {
  rec.steps.reserve(static_cast<std::size_t>(depth));
  SearchTree::NodeId node = tree.root();
  for (int k = 0; k < depth; ++k) {
    ActionId a;
    if (node != SearchTree::kNone)
      a = ucb1_action(tree, node, cfg.ucb_c);
    else
      a = static_cast<ActionId>(rng.below(static_cast<std::uint64_t>(tree.num_actions())));
    TrajectoryStep& st = rec.steps.emplace_back();
    st.action = a;
    step(a, st);
    if (node != SearchTree::kNone) node = tree.child(node, a, st.observation);
  }
}

void check_depth(int depth) {
  if (depth < 1) throw std::invalid_argument("simulate_once: depth budget must be >= 1");
}

}  // namespace

TrajectoryRecord simulate_once(const SearchTree& tree, const AugmentedParticle& start,
                               const DomainModel& domain, const SearchConfig& cfg, Rng& rng) {
  const int depth = depth_budget(domain, cfg, start.history.num_steps());
  check_depth(depth);
  TrajectoryRecord rec;
  rec.origin = SimulatorKind::Global;
  rec.start_step = start.history.num_steps();
  rec.history = start.history;
  FactoredState s = start.global;
  descend(tree, cfg, depth, rng, rec, [&](ActionId a, TrajectoryStep& st) {
    GlobalStep g = domain.step_global(s, a, rng);
    st.observation = g.observation;
    st.reward = g.reward;
    st.source = std::move(g.source);
    st.prev_global = std::move(s);
    s = std::move(g.next);
    rec.history.extend(a, domain.project_local(s).values);
  });
  rec.final_global = std::move(s);
  return rec;
}

TrajectoryRecord simulate_once(const SearchTree& tree, IalsState start, const DomainModel& domain,
                               const InfluencePredictor& predictor, const SearchConfig& cfg, Rng& rng) {
  const int depth = depth_budget(domain, cfg, start.history.num_steps());
  check_depth(depth);
  TrajectoryRecord rec;
  rec.origin = SimulatorKind::Ials;
  rec.start_step = start.history.num_steps();
  descend(tree, cfg, depth, rng, rec, [&](ActionId a, TrajectoryStep& st) {
    IalsTransition t = ials_step(start, a, domain, predictor, rng);
    st.observation = t.observation;
    st.reward = t.reward;
  });
  rec.history = std::move(start.history);
  return rec;
}

TrajectoryRecord rollout_global(const AugmentedParticle& start, const DomainModel& domain, int depth,
                                Rng& rng) {
  check_depth(depth);
  // A root-only tree with no visits would steer the first action by UCB1, so
  // roll out directly.
  TrajectoryRecord rec;
  rec.origin = SimulatorKind::Global;
  rec.start_step = start.history.num_steps();
  rec.history = start.history;
  rec.steps.reserve(static_cast<std::size_t>(depth));
  FactoredState s = start.global;
  for (int k = 0; k < depth; ++k) {
    const auto a = static_cast<ActionId>(rng.below(static_cast<std::uint64_t>(domain.num_actions())));
    GlobalStep g = domain.step_global(s, a, rng);
    TrajectoryStep& st = rec.steps.emplace_back();
    st.action = a;
    st.observation = g.observation;
    st.reward = g.reward;
    st.source = std::move(g.source);
    st.prev_global = std::move(s);
    s = std::move(g.next);
    rec.history.extend(a, domain.project_local(s).values);
  }
  rec.final_global = std::move(s);
  return rec;
}

std::vector<double> discounted_returns(std::span<const TrajectoryStep> steps, double gamma) {
  std::vector<double> g(steps.size());
  double acc = 0.0;
  for (std::size_t k = steps.size(); k-- > 0;) {
    acc = steps[k].reward + gamma * acc;
    g[k] = acc;
  }
  return g;
}

void backup(SearchTree& tree, const TrajectoryRecord& traj, const SearchConfig& cfg) {
  const auto returns = discounted_returns(traj.steps, cfg.gamma);
  const bool deposit = traj.origin == SimulatorKind::Global;
  SearchTree::NodeId node = tree.root();
  for (std::size_t k = 0; k < traj.steps.size(); ++k) {
    const auto& st = traj.steps[k];
    tree.visits(node) += 1;
    auto& as = tree.stats(node, st.action);
    as.visits += 1;
    as.value += (returns[k] - as.value) / as.visits;

    SearchTree::NodeId next = tree.child(node, st.action, st.observation);
    const bool expanded = next == SearchTree::kNone;
    if (expanded) {
      next = tree.add_node();
      tree.set_child(node, st.action, st.observation, next);
    }
    if (deposit)
      tree.add_particle(next, AugmentedParticle{traj.global_after(k), traj.history.prefix(traj.start_step + k + 1)});
    if (expanded) return;
    node = next;
  }
}

std::vector<AugmentedParticle> initial_belief(const DomainModel& domain, std::size_t n, Rng& rng) {
  std::vector<AugmentedParticle> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    FactoredState s = domain.sample_initial(rng);
    LocalHistory d(domain.project_local(s));
    out.push_back({std::move(s), std::move(d)});
  }
  return out;
}

std::vector<AugmentedParticle> advance_belief(std::span<const AugmentedParticle> belief, ActionId a,
                                              ObservationId o, const DomainModel& domain, Rng& rng,
                                              std::size_t capacity,
                                              std::span<const AugmentedParticle> fallback,
                                              BeliefUpdateStats* stats) {
  if (belief.empty()) throw ParticleDeprivation("advance_belief: empty belief");
  std::vector<AugmentedParticle> out;
  out.reserve(capacity);
  const std::size_t budget = 100 * capacity;
  std::size_t attempts = 0;
  while (out.size() < capacity && attempts < budget) {
    ++attempts;
    const auto& p = belief[rng.below(belief.size())];
    GlobalStep g = domain.step_global(p.global, a, rng);
    if (g.observation != o) continue;
    LocalHistory d = p.history;
    d.extend(a, domain.project_local(g.next).values);
    out.push_back({std::move(g.next), std::move(d)});
  }
  const std::size_t accepted = out.size();
  for (std::size_t i = 0; out.size() < capacity && i < fallback.size(); ++i) out.push_back(fallback[i]);
  if (stats) {
    stats->attempts = attempts;
    stats->accepted = accepted;
    stats->fallback = out.size() - accepted;
  }
  if (out.empty()) throw ParticleDeprivation("advance_belief: no particle is consistent with the observation");
  return out;
}

}  // namespace sis
