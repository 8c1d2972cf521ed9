// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>

#include "sis/adam.hpp"
#include "sis/gru.hpp"
#include "sis/replay_buffer.hpp"

namespace sis {

struct TrainConfig {
  int steps_per_episode = 64;
  int batch_size = 128;
  int hidden = 8;
  /// Weight init half-width; <= 0 selects 1 / sqrt(hidden).
  double init_scale = 0.0;
  /// Rescale gradients whose L2 norm exceeds this; <= 0 disables clipping.
  double clip_norm = 0.0;
  AdamConfig adam;

  void validate() const;
};

/// The predictor together with its optimiser state.
struct InfluenceLearner {
  PredictorParams params;
  AdamState adam;

  static InfluenceLearner untrained(const PredictorShape& shape, const TrainConfig& cfg, Rng& rng);
};

/// Runs `steps` Adam updates, each on a fresh uniformly sampled batch.
/// Returns the mean batch loss, or nothing if the buffer is empty or steps == 0.
std::optional<double> train_steps(InfluenceLearner& learner, const ReplayBuffer& buffer, int steps,
                                  const TrainConfig& cfg, Rng& rng);

/// End-of-episode training: cfg.steps_per_episode updates.
inline std::optional<double> train_after_episode(InfluenceLearner& learner, const ReplayBuffer& buffer,
                                                 const TrainConfig& cfg, Rng& rng) {
  return train_steps(learner, buffer, cfg.steps_per_episode, cfg, rng);
}

/// Mean loss over a whole dataset, evaluated in chunks.
double dataset_loss(const PredictorParams& params, const ReplayBuffer& data, std::size_t chunk = 512);

void save_params(const PredictorParams& params, const std::filesystem::path& path);
PredictorParams load_params(const std::filesystem::path& path);

}  // namespace sis
