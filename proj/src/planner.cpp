// SPDX-License-Identifier: Apache-2.0
#include "sis/planner.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace sis {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

template <class F>
double mean_over(const std::vector<StepMetrics>& steps, F f) {
  if (steps.empty()) return 0.0;
  double s = 0.0;
  for (const auto& m : steps) s += f(m);
  return s / static_cast<double>(steps.size());
}

}  // namespace

void PlannerConfig::validate() const {
  if (budget.kind == Budget::Kind::SimCount && budget.sims < 1)
    throw std::invalid_argument("planner.budget: simulation count must be >= 1");
  if (budget.kind == Budget::Kind::TimeBudget && !(budget.seconds > 0.0))
    throw std::invalid_argument("planner.budget: time budget must be > 0");
  search.validate();
  selector.validate();
  train.validate();
}

double EpisodeMetrics::mean_step_ms() const {
  return mean_over(steps, [](const StepMetrics& m) { return m.wall_ms; });
}
double EpisodeMetrics::mean_n_gs() const {
  return mean_over(steps, [](const StepMetrics& m) { return m.n_gs; });
}
double EpisodeMetrics::mean_n_ials() const {
  return mean_over(steps, [](const StepMetrics& m) { return m.n_ials; });
}

std::optional<double> EpisodeMetrics::mean_lhat() const {
  double s = 0.0;
  int n = 0;
  for (const auto& m : steps)
    if (m.lhat) {
      s += *m.lhat;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return s / n;
}

double EpisodeMetrics::ials_fraction() const {
  double ials = 0.0, total = 0.0;
  for (const auto& m : steps) {
    ials += m.n_ials;
    total += m.simulations;
  }
  return total > 0.0 ? ials / total : 0.0;
}

TrainingSequence extract_training_data(const TrajectoryRecord& traj) {
  if (traj.origin != SimulatorKind::Global)
    throw std::invalid_argument("extract_training_data: needs a global-simulator trajectory");
  TrainingSequence seq;
  seq.prefix = traj.prefix();
  seq.steps.reserve(traj.steps.size());
  for (std::size_t k = 0; k < traj.steps.size(); ++k) {
    const auto& st = traj.steps[k];
    seq.steps.push_back({st.action, traj.history.local_state(traj.start_step + k + 1), *st.source});
  }
  return seq;
}

Planner::Planner(const DomainModel& domain, PlannerConfig cfg, Rng rng, std::optional<InfluenceLearner> learner,
                 const InfluencePredictor* predictor)
    : domain_(domain),
      cfg_(std::move(cfg)),
      env_rng_(rng.split(1)),
      search_rng_(rng.split(2)),
      belief_rng_(rng.split(3)),
      train_rng_(rng.split(4)),
      gru_(learner_.params),
      active_(nullptr),
      tree_(domain.num_actions(), domain.num_observations()) {
  cfg_.validate();
  if (cfg_.mode == PlannerMode::IalsOnly && !learner && !predictor)
    throw std::invalid_argument("planner: IALS-only mode needs a trained or exact predictor");
  if (learner) {
    learner_ = std::move(*learner);
  } else {
    Rng init = rng.split(5);
    learner_ = InfluenceLearner::untrained(PredictorShape::for_domain(domain, cfg_.train.hidden), cfg_.train, init);
  }
  if (learner_.params.shape() != PredictorShape::for_domain(domain, learner_.params.shape().hidden))
    throw std::invalid_argument("planner: predictor shape does not match the domain");
  active_ = predictor ? predictor : &gru_;
  selector_.cfg = cfg_.selector;
}

bool Planner::trains() const {
  if (!cfg_.train_online) return false;
  switch (cfg_.mode) {
    case PlannerMode::Sis:
      return true;
    case PlannerMode::GsOnly:
      return cfg_.train_gs_only;
    case PlannerMode::IalsOnly:
      return false;
  }
  return false;
}

const PredictorCarry& Planner::root_carry(std::size_t idx) {
  if (!carry_ready_[idx]) {
    active_->reset(belief_[idx].history, carries_[idx]);
    carry_ready_[idx] = 1;
  }
  return carries_[idx];
}

void Planner::begin_episode() {
  state_ = domain_.sample_initial(env_rng_);
  trace_ = TrainingSequence{LocalHistory(domain_.project_local(state_)), {}};
  belief_ = initial_belief(domain_, static_cast<std::size_t>(cfg_.search.particles), belief_rng_);
  tree_.reset();
  reset_step(selector_);
}

ActionId Planner::plan_step(StepMetrics& m) {
  if (belief_.empty()) throw ParticleDeprivation("plan_step: empty belief");
  const auto t0 = Clock::now();
  carries_.assign(belief_.size(), PredictorCarry{});
  carry_ready_.assign(belief_.size(), 0);
  double l_sum = 0.0;
  int sims = 0;
  for (;;) {
    if (cfg_.budget.kind == Budget::Kind::SimCount) {
      if (sims >= cfg_.budget.sims) break;
    } else if (sims > 0 && ms_since(t0) >= cfg_.budget.seconds * 1000.0) {
      break;
    }
    SimulatorKind kind;
    switch (cfg_.mode) {
      case PlannerMode::GsOnly:
        kind = SimulatorKind::Global;
        break;
      case PlannerMode::IalsOnly:
        kind = SimulatorKind::Ials;
        break;
      default:
        kind = choose_simulator(selector_);
    }
    record_choice(selector_, kind);
    const std::size_t idx = search_rng_.below(belief_.size());
    if (kind == SimulatorKind::Global) {
      TrajectoryRecord traj = simulate_once(tree_, belief_[idx], domain_, cfg_.search, search_rng_);
      backup(tree_, traj, cfg_.search);
      ++backups_gs_;
      const double l = kl_sample(traj, *active_, domain_, root_carry(idx));
      update_lhat(selector_, l);
      l_sum += l;
      ++m.l_samples;
      buffer_.add(extract_training_data(traj));
      ++m.n_gs;
    } else {
      IalsState st{belief_[idx].history, root_carry(idx)};
      TrajectoryRecord traj = simulate_once(tree_, std::move(st), domain_, *active_, cfg_.search, search_rng_);
      backup(tree_, traj, cfg_.search);
      ++backups_ials_;
      ++m.n_ials;
    }
    ++sims;
  }
  const ActionId a = best_action(tree_);
  m.simulations = sims;
  m.mean_l = m.l_samples > 0 ? l_sum / m.l_samples : 0.0;
  m.lhat = selector_.lhat;
  m.wall_ms = ms_since(t0);
  return a;
}

EpisodeMetrics Planner::run_episode() {
  EpisodeMetrics ep;
  begin_episode();
  const auto horizon = static_cast<std::size_t>(domain_.horizon());
  for (std::size_t t = 0; t < horizon; ++t) {
    StepMetrics& m = ep.steps.emplace_back();
    const ActionId a = plan_step(m);
    GlobalStep g = domain_.step_global(state_, a, env_rng_);
    ep.ret += g.reward;
    trace_.steps.push_back({a, domain_.project_local(g.next), g.source});
    state_ = std::move(g.next);
    if (t + 1 == horizon) break;
    const auto t1 = Clock::now();
    const SearchTree::NodeId child = tree_.child(tree_.root(), a, g.observation);
    std::span<const AugmentedParticle> fallback;
    if (child != SearchTree::kNone) fallback = tree_.particles(child);
    BeliefUpdateStats bs;
    try {
      belief_ = advance_belief(belief_, a, g.observation, domain_, belief_rng_,
                               static_cast<std::size_t>(cfg_.search.particles), fallback, &bs);
    } catch (const ParticleDeprivation&) {
      m.belief_gs_calls = bs.attempts;
      ep.failed = true;
      break;
    }
    m.belief_gs_calls = bs.attempts;
    tree_.prune(a, g.observation);
    reset_step(selector_);
    m.belief_ms = ms_since(t1);
  }
  if (trains()) ep.train_loss = train_after_episode(learner_, buffer_, cfg_.train, train_rng_);
  ep.buffer_size = buffer_.size();
  return ep;
}

int steps_for_epochs(std::size_t n, int epochs, int batch_size) {
  if (n == 0 || epochs <= 0) return 0;
  const std::size_t per_epoch = (n + static_cast<std::size_t>(batch_size) - 1) / static_cast<std::size_t>(batch_size);
  return static_cast<int>(per_epoch) * epochs;
}

TwoPhaseResult run_two_phase(const DomainModel& domain, const ReplayBuffer& offline_data, PlannerConfig cfg,
                             int epochs, int episodes, Rng rng) {
  if (offline_data.empty()) throw std::invalid_argument("run_two_phase: offline dataset is empty");
  TwoPhaseResult res;
  Rng init = rng.split(11), train_rng = rng.split(12);
  res.learner = InfluenceLearner::untrained(PredictorShape::for_domain(domain, cfg.train.hidden), cfg.train, init);
  const int per_epoch = steps_for_epochs(offline_data.size(), 1, cfg.train.batch_size);
  for (int e = 0; e < epochs; ++e)
    res.train_losses.push_back(train_steps(res.learner, offline_data, per_epoch, cfg.train, train_rng));

  cfg.mode = PlannerMode::IalsOnly;
  cfg.train_online = false;
  Planner planner(domain, cfg, rng.split(13), res.learner);
  for (int i = 0; i < episodes; ++i) res.episodes.push_back(planner.run_episode());
  return res;
}

}  // namespace sis
