// SPDX-License-Identifier: Apache-2.0
#include "sis/training.hpp"

#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace sis {

void TrainConfig::validate() const {
  if (steps_per_episode < 0) throw std::invalid_argument("train: steps must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("train: batch must be >= 1");
  if (hidden < 1) throw std::invalid_argument("train: hidden must be >= 1");
  if (!(adam.learning_rate > 0.0)) throw std::invalid_argument("train: lr must be positive");
}

InfluenceLearner InfluenceLearner::untrained(const PredictorShape& shape, const TrainConfig& cfg, Rng& rng) {
  InfluenceLearner l{PredictorParams::random(shape, rng, cfg.init_scale), {}};
  l.adam = AdamState::fresh(l.params.flat().size());
  return l;
}

std::optional<double> train_steps(InfluenceLearner& learner, const ReplayBuffer& buffer, int steps,
                                  const TrainConfig& cfg, Rng& rng) {
  if (buffer.empty() || steps <= 0) return std::nullopt;
  double total = 0.0;
  Eigen::VectorXd grad;
  for (int i = 0; i < steps; ++i) {
    const auto picks = buffer.sample(static_cast<std::size_t>(cfg.batch_size), rng);
    const auto batch = make_batch(learner.params.shape(), picks);
    total += loss_and_gradient(learner.params, batch, grad);
    if (cfg.clip_norm > 0.0) {
      const double norm = grad.norm();
      if (norm > cfg.clip_norm) grad *= cfg.clip_norm / norm;
    }
    adam_step(learner.params.flat(), grad, learner.adam, cfg.adam);
  }
  return total / steps;
}

double dataset_loss(const PredictorParams& params, const ReplayBuffer& data, std::size_t chunk) {
  double weighted = 0.0, count = 0.0;
  const auto& seqs = data.sequences();
  for (std::size_t i = 0; i < seqs.size(); i += chunk) {
    const std::size_t n = std::min(chunk, seqs.size() - i);
    const auto batch = make_batch(params.shape(), std::span<const TrainingSequence>(seqs.data() + i, n));
    const double c = batch.target_count();
    if (c == 0.0) continue;
    weighted += loss(params, batch) * c;
    count += c;
  }
  return count > 0.0 ? weighted / count : 0.0;
}

void save_params(const PredictorParams& params, const std::filesystem::path& path) {
  const auto& s = params.shape();
  nlohmann::json j{{"format", "sis-predictor"},
                   {"version", 1},
                   {"num_actions", s.num_actions},
                   {"local_card", s.local_card},
                   {"source_card", s.source_card},
                   {"hidden", s.hidden},
                   {"theta", std::vector<double>(params.flat().data(), params.flat().data() + params.flat().size())}};
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << j.dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

PredictorParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const auto j = nlohmann::json::parse(in);
  if (j.value("format", "") != "sis-predictor") throw std::runtime_error("not a predictor file: " + path.string());
  PredictorShape s;
  s.num_actions = j.at("num_actions").get<int>();
  s.local_card = j.at("local_card").get<std::vector<int>>();
  s.source_card = j.at("source_card").get<std::vector<int>>();
  s.hidden = j.at("hidden").get<int>();
  PredictorParams p(s);
  const auto theta = j.at("theta").get<std::vector<double>>();
  if (theta.size() != static_cast<std::size_t>(p.flat().size()))
    throw std::runtime_error("predictor file has wrong parameter count: " + path.string());
  for (std::size_t i = 0; i < theta.size(); ++i) p.flat()[static_cast<Eigen::Index>(i)] = theta[i];
  return p;
}

}  // namespace sis
