// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "sis/gac.hpp"
#include "sis/influence.hpp"

namespace sis {

/// Largest GAC instance the exact enumeration accepts.
inline constexpr int kOracleMaxFixedAgents = 6;
inline constexpr int kOracleMaxHorizon = 6;

/// Exact posterior P(s_k | d_k) over global states of a small GAC instance,
/// obtained by enumerating every joint fixed-agent action at every step.
/// Throws if d is impossible or the instance exceeds the enumeration limits.
std::map<std::vector<Value>, double> gac_state_posterior(const GacDomain& domain, const LocalHistory& d);

/// Exact I(s_src | d) as a joint table indexed by source_index.
std::vector<double> exact_influence_tiny_gac(const LocalHistory& d, const GacConfig& cfg);
std::vector<double> exact_influence_tiny_gac(const LocalHistory& d, const GacDomain& domain);

/// Expectations at step k of an episode played by a uniform random policy from
/// the initial state, by enumeration of every (state, local history) pair.
struct GacStepExpectation {
  double cross_entropy = 0.0;      // E[-log Ihat(src_k | d_k)]
  double source_entropy = 0.0;     // E[H(S_src | s_k, a_k)]
  double influence_entropy = 0.0;  // E[H(I(. | d_k))]
  double kl = 0.0;                 // E[KL(I(. | d_k) || Ihat(. | d_k))]
};

/// One entry per step k = 0 .. horizon - 1.
std::vector<GacStepExpectation> gac_uniform_policy_expectations(const GacDomain& domain,
                                                                const InfluencePredictor& predictor);

/// Exact influence predictor for small GAC instances, memoised per history.
class ExactGacInfluence final : public InfluencePredictor {
 public:
  explicit ExactGacInfluence(GacConfig cfg);

  const std::vector<double>& table(const LocalHistory& d) const;

  void reset(const LocalHistory& d, PredictorCarry& carry) const override;
  void advance(const LocalHistory& d, PredictorCarry& carry) const override;
  SourceValue sample(const LocalHistory& d, const PredictorCarry& carry, Rng& rng) const override;
  double log_prob(const LocalHistory& d, const PredictorCarry& carry, const SourceValue& src) const override;

 private:
  GacDomain domain_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, std::vector<double>> cache_;
};

}  // namespace sis
