// SPDX-License-Identifier: Apache-2.0
#include "sis/gac_oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace sis {
namespace {

void check_limits(const GacConfig& cfg) {
  if (cfg.n_fixed_agents > kOracleMaxFixedAgents || cfg.horizon > kOracleMaxHorizon)
    throw std::invalid_argument("exact influence: GAC instance exceeds enumeration limits");
}

std::string history_key(const LocalHistory& d) {
  std::string key(d.raw_locals().begin(), d.raw_locals().end());
  key.push_back('|');
  for (ActionId a : d.raw_actions()) key.push_back(static_cast<char>('0' + a));
  return key;
}

}  // namespace

std::map<std::vector<Value>, double> gac_state_posterior(const GacDomain& domain, const LocalHistory& d) {
  check_limits(domain.config());
  Rng unused(0);
  const FactoredState s0 = domain.sample_initial(unused);
  if (d.empty() || d.local(0)[0] != domain.outcome(s0))
    throw std::invalid_argument("exact influence: history does not start at the initial local state");
  const int n = domain.n_fixed();
  std::map<std::vector<Value>, double> belief{{s0.values, 1.0}};
  std::vector<int> actions(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < d.num_steps(); ++k) {
    const ActionId a = d.action(k);
    const int want = d.local(k + 1)[0];
    std::map<std::vector<Value>, double> next;
    for (const auto& [values, w] : belief) {
      const FactoredState s{values};
      std::vector<double> p_left(static_cast<std::size_t>(n));
      for (int j = 0; j < n; ++j) p_left[static_cast<std::size_t>(j)] = domain.fixed_policy_prob(s, j);
      for (unsigned mask = 0; mask < (1u << n); ++mask) {
        double prob = w;
        for (int j = 0; j < n; ++j) {
          const bool right = (mask >> j) & 1u;
          actions[static_cast<std::size_t>(j)] = right ? GacDomain::kRight : GacDomain::kLeft;
          prob *= right ? 1.0 - p_left[static_cast<std::size_t>(j)] : p_left[static_cast<std::size_t>(j)];
        }
        if (prob == 0.0) continue;
        FactoredState s2 = domain.resolve(s, actions, a);
        if (domain.outcome(s2) != want) continue;
        next[s2.values] += prob;
      }
    }
    double total = 0.0;
    for (const auto& [_, w] : next) total += w;
    if (total <= 0.0) throw std::invalid_argument("exact influence: history has zero probability");
    for (auto& [_, w] : next) w /= total;
    belief.swap(next);
  }
  return belief;
}

std::vector<double> exact_influence_tiny_gac(const LocalHistory& d, const GacDomain& domain) {
  const auto posterior = gac_state_posterior(domain, d);
  std::vector<double> table(4, 0.0);
  for (const auto& [values, w] : posterior) {
    const auto p = domain.source_probs(FactoredState{values});
    for (int b0 = 0; b0 < 2; ++b0)
      for (int b1 = 0; b1 < 2; ++b1)
        table[static_cast<std::size_t>(b0 + 2 * b1)] += w * (b0 ? p[0] : 1.0 - p[0]) * (b1 ? p[1] : 1.0 - p[1]);
  }
  return table;
}

std::vector<double> exact_influence_tiny_gac(const LocalHistory& d, const GacConfig& cfg) {
  check_limits(cfg);
  return exact_influence_tiny_gac(d, GacDomain(cfg));
}

std::vector<GacStepExpectation> gac_uniform_policy_expectations(const GacDomain& domain,
                                                                const InfluencePredictor& predictor) {
  check_limits(domain.config());
  Rng unused(0);
  const FactoredState s0 = domain.sample_initial(unused);
  const int n = domain.n_fixed();
  const auto card = domain.source_cardinalities();

  struct Node {
    LocalHistory d;
    std::map<std::vector<Value>, double> states;  // joint P(s_k, d_k)
  };
  std::map<std::string, Node> layer;
  layer.emplace(history_key(LocalHistory(domain.project_local(s0))),
                Node{LocalHistory(domain.project_local(s0)), {{s0.values, 1.0}}});

  std::vector<GacStepExpectation> out;
  std::vector<int> actions(static_cast<std::size_t>(n));
  for (int k = 0; k < domain.horizon(); ++k) {
    GacStepExpectation e;
    std::map<std::string, Node> next;
    for (const auto& [key, node] : layer) {
      PredictorCarry carry;
      predictor.reset(node.d, carry);
      double log_hat[4];
      for (std::size_t i = 0; i < 4; ++i) log_hat[i] = predictor.log_prob(node.d, carry, source_from_index(i, card));

      double p_d = 0.0;
      double infl[4] = {0, 0, 0, 0};
      for (const auto& [values, w] : node.states) {
        const FactoredState s{values};
        const auto p = domain.source_probs(s);
        p_d += w;
        e.source_entropy += w * domain.source_entropy(s, GacDomain::kLeft);
        for (int b0 = 0; b0 < 2; ++b0)
          for (int b1 = 0; b1 < 2; ++b1)
            infl[b0 + 2 * b1] += w * (b0 ? p[0] : 1.0 - p[0]) * (b1 ? p[1] : 1.0 - p[1]);
      }
      for (std::size_t i = 0; i < 4; ++i) {
        const double q = infl[i];
        if (q <= 0.0) continue;
        e.cross_entropy -= q * log_hat[i];
        e.influence_entropy -= q * std::log(q / p_d);
        e.kl += q * (std::log(q / p_d) - log_hat[i]);
      }

      if (k + 1 == domain.horizon()) continue;
      for (ActionId a = 0; a < 2; ++a)
        for (const auto& [values, w] : node.states) {
          const FactoredState s{values};
          for (unsigned mask = 0; mask < (1u << n); ++mask) {
            double prob = 0.5 * w;
            for (int j = 0; j < n; ++j) {
              const bool right = (mask >> j) & 1u;
              const double pl = domain.fixed_policy_prob(s, j);
              actions[static_cast<std::size_t>(j)] = right ? GacDomain::kRight : GacDomain::kLeft;
              prob *= right ? 1.0 - pl : pl;
            }
            if (prob == 0.0) continue;
            FactoredState s2 = domain.resolve(s, actions, a);
            LocalHistory d2 = node.d;
            d2.extend(a, domain.project_local(s2).values);
            auto [it, fresh] = next.try_emplace(history_key(d2));
            if (fresh) it->second.d = std::move(d2);
            it->second.states[s2.values] += prob;
          }
        }
    }
    out.push_back(e);
    layer.swap(next);
  }
  return out;
}

ExactGacInfluence::ExactGacInfluence(GacConfig cfg) : domain_(cfg) { check_limits(cfg); }

const std::vector<double>& ExactGacInfluence::table(const LocalHistory& d) const {
  const auto key = history_key(d);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  auto t = exact_influence_tiny_gac(d, domain_);
  std::lock_guard lock(mutex_);
  // unordered_map never invalidates references to elements on insert.
  return cache_.try_emplace(key, std::move(t)).first->second;
}

void ExactGacInfluence::reset(const LocalHistory& d, PredictorCarry& carry) const {
  const auto& t = table(d);
  carry.log_probs.resize(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) carry.log_probs[i] = std::log(t[i]);
}

void ExactGacInfluence::advance(const LocalHistory& d, PredictorCarry& carry) const { reset(d, carry); }

SourceValue ExactGacInfluence::sample(const LocalHistory&, const PredictorCarry& carry, Rng& rng) const {
  double w[4];
  for (std::size_t i = 0; i < 4; ++i) w[i] = std::exp(carry.log_probs[i]);
  return source_from_index(rng.categorical(w), domain_.source_cardinalities());
}

double ExactGacInfluence::log_prob(const LocalHistory&, const PredictorCarry& carry, const SourceValue& src) const {
  return carry.log_probs[source_index(src, domain_.source_cardinalities())];
}

}  // namespace sis
