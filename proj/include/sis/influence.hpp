// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "sis/gru.hpp"
#include "sis/model.hpp"
#include "sis/rng.hpp"

namespace sis {

/// Per-simulation predictor state. Implementations decide what it holds:
/// the GRU keeps its hidden state and cached head log-probabilities.
struct PredictorCarry {
  std::vector<double> hidden;
  std::vector<double> scratch;
  std::vector<double> log_probs;
};

/// Distribution over source values given a local history, consumed incrementally.
class InfluencePredictor {
 public:
  virtual ~InfluencePredictor() = default;
  /// Consume the whole history d.
  virtual void reset(const LocalHistory& d, PredictorCarry& carry) const = 0;
  /// Consume the last step of d; carry must reflect d without that step.
  virtual void advance(const LocalHistory& d, PredictorCarry& carry) const = 0;
  virtual SourceValue sample(const LocalHistory& d, const PredictorCarry& carry, Rng& rng) const = 0;
  virtual double log_prob(const LocalHistory& d, const PredictorCarry& carry, const SourceValue& src) const = 0;
};

/// Learned predictor: GRU with independent softmax heads per source variable.
class GruInfluence final : public InfluencePredictor {
 public:
  explicit GruInfluence(const PredictorParams& params) : params_(&params) {}

  void reset(const LocalHistory& d, PredictorCarry& carry) const override;
  void advance(const LocalHistory& d, PredictorCarry& carry) const override;
  SourceValue sample(const LocalHistory& d, const PredictorCarry& carry, Rng& rng) const override;
  double log_prob(const LocalHistory& d, const PredictorCarry& carry, const SourceValue& src) const override;

  const PredictorParams& params() const { return *params_; }

 private:
  void consume(const LocalHistory& d, std::size_t k, PredictorCarry& carry) const;
  const PredictorParams* params_;
};

/// Flat index of a source value (first variable fastest) and its inverse.
std::size_t source_index(const SourceValue& src, std::span<const int> card);
SourceValue source_from_index(std::size_t index, std::span<const int> card);
std::size_t source_space_size(std::span<const int> card);

}  // namespace sis
