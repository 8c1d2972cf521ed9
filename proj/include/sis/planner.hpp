// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "sis/influence.hpp"
#include "sis/model.hpp"
#include "sis/pomcp.hpp"
#include "sis/replay_buffer.hpp"
#include "sis/search_tree.hpp"
#include "sis/selector.hpp"
#include "sis/training.hpp"

namespace sis {

enum class PlannerMode { Sis, GsOnly, IalsOnly };

struct Budget {
  enum class Kind { SimCount, TimeBudget };
  Kind kind = Kind::SimCount;
  int sims = 100;
  double seconds = 0.0;

  static Budget count(int n) { return {Kind::SimCount, n, 0.0}; }
  static Budget time(double s) { return {Kind::TimeBudget, 0, s}; }
};

struct PlannerConfig {
  PlannerMode mode = PlannerMode::Sis;
  Budget budget;
  SearchConfig search;
  SelectorConfig selector;
  TrainConfig train;
  /// Train after each episode. Applies to Sis; GsOnly trains only with train_gs_only.
  bool train_online = true;
  bool train_gs_only = false;

  void validate() const;
};

struct StepMetrics {
  double wall_ms = 0.0;        // planning only
  double belief_ms = 0.0;      // belief update after the real step
  int simulations = 0;
  int n_gs = 0;
  int n_ials = 0;
  double mean_l = 0.0;         // mean kl_sample of this step's GS trajectories
  int l_samples = 0;
  std::optional<double> lhat;  // after the step
  std::size_t belief_gs_calls = 0;
};

struct EpisodeMetrics {
  double ret = 0.0;  // undiscounted
  std::vector<StepMetrics> steps;
  std::optional<double> train_loss;
  std::size_t buffer_size = 0;
  bool failed = false;

  double mean_step_ms() const;
  double mean_n_gs() const;
  double mean_n_ials() const;
  /// Mean of the post-step lhat over steps that have one.
  std::optional<double> mean_lhat() const;
  /// Fraction of all simulations that used the IALS.
  double ials_fraction() const;
};

/// Training sequence from a global-simulator trajectory: its prefix history
/// plus (action, local state, source value) for every simulated step.
TrainingSequence extract_training_data(const TrajectoryRecord& traj);

/// One planning agent: owns the tree, belief, selector, predictor, and replay buffer.
///
/// If `predictor` is given it replaces the learned predictor for simulation
/// and kl samples (e.g. an exact oracle); the learner is then never used.
class Planner {
 public:
  Planner(const DomainModel& domain, PlannerConfig cfg, Rng rng,
          std::optional<InfluenceLearner> learner = std::nullopt,
          const InfluencePredictor* predictor = nullptr);

  Planner(const Planner&) = delete;
  Planner& operator=(const Planner&) = delete;

  /// Starts a new episode: fresh tree, belief, and real state.
  void begin_episode();
  /// Plans the next real decision of the current episode.
  ActionId plan_step(StepMetrics& metrics);
  EpisodeMetrics run_episode();

  const PlannerConfig& config() const { return cfg_; }
  const SelectorStats& selector() const { return selector_; }
  SelectorStats& selector() { return selector_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  ReplayBuffer& buffer() { return buffer_; }
  const InfluenceLearner& learner() const { return learner_; }
  const SearchTree& tree() const { return tree_; }
  const std::vector<AugmentedParticle>& belief() const { return belief_; }
  const InfluencePredictor& predictor() const { return *active_; }
  /// The real trajectory of the last episode as a training sequence.
  const TrainingSequence& last_trace() const { return trace_; }
  /// Backups per trajectory origin since construction.
  std::size_t backups_gs() const { return backups_gs_; }
  std::size_t backups_ials() const { return backups_ials_; }

 private:
  bool trains() const;
  const PredictorCarry& root_carry(std::size_t idx);

  const DomainModel& domain_;
  PlannerConfig cfg_;
  Rng env_rng_, search_rng_, belief_rng_, train_rng_;
  InfluenceLearner learner_;
  GruInfluence gru_;
  const InfluencePredictor* active_;
  SelectorStats selector_;
  ReplayBuffer buffer_;
  SearchTree tree_;
  std::vector<AugmentedParticle> belief_;
  std::vector<PredictorCarry> carries_;
  std::vector<char> carry_ready_;
  FactoredState state_;
  TrainingSequence trace_;
  std::size_t backups_gs_ = 0, backups_ials_ = 0;
};

/// Two-phase baseline: offline training on a fixed dataset, then IALS-only planning with frozen weights.
struct TwoPhaseResult {
  InfluenceLearner learner;
  std::vector<std::optional<double>> train_losses;  // per epoch
  std::vector<EpisodeMetrics> episodes;
};

TwoPhaseResult run_two_phase(const DomainModel& domain, const ReplayBuffer& offline_data, PlannerConfig cfg,
                             int epochs, int episodes, Rng rng);

/// Gradient steps needed for `epochs` passes over `n` sequences.
int steps_for_epochs(std::size_t n, int epochs, int batch_size);

}  // namespace sis
