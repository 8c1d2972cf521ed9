// SPDX-License-Identifier: Apache-2.0
#include "sis/influence.hpp"

#include <cmath>

namespace sis {

void GruInfluence::consume(const LocalHistory& d, std::size_t k, PredictorCarry& carry) const {
  const auto& p = *params_;
  const int prev = k == 0 ? -1 : d.action(k - 1);
  const auto local = d.local(k);
  // Inline one-hot encoding; avoids a heap allocation per simulated step.
  int active[16];
  if (local.size() + 1 > 16) {
    const auto v = encode_step(p.shape(), prev, local);
    gru_step(p, carry.hidden, v, carry.scratch);
  } else {
    const auto& shape = p.shape();
    active[0] = prev < 0 ? shape.null_action() : prev;
    int offset = shape.num_actions + 1;
    for (std::size_t i = 0; i < local.size(); ++i) {
      active[i + 1] = offset + local[i];
      offset += shape.local_card[i];
    }
    gru_step(p, carry.hidden, std::span<const int>(active, local.size() + 1), carry.scratch);
  }
  carry.hidden.swap(carry.scratch);
  head_log_probs(p, carry.hidden, carry.log_probs);
}

void GruInfluence::reset(const LocalHistory& d, PredictorCarry& carry) const {
  const auto H = static_cast<std::size_t>(params_->h());
  carry.hidden.assign(H, 0.0);
  carry.scratch.assign(H, 0.0);
  std::size_t total = 0;
  for (int c : params_->shape().source_card) total += static_cast<std::size_t>(c);
  carry.log_probs.assign(total, 0.0);
  for (std::size_t k = 0; k < d.length(); ++k) consume(d, k, carry);
}

void GruInfluence::advance(const LocalHistory& d, PredictorCarry& carry) const {
  consume(d, d.length() - 1, carry);
}

SourceValue GruInfluence::sample(const LocalHistory&, const PredictorCarry& carry, Rng& rng) const {
  SourceValue out;
  std::size_t pos = 0;
  for (int c : params_->shape().source_card) {
    double u = rng.uniform();
    int pick = c - 1;
    for (int k = 0; k < c; ++k) {
      const double p = std::exp(carry.log_probs[pos + static_cast<std::size_t>(k)]);
      if (u < p) {
        pick = k;
        break;
      }
      u -= p;
    }
    out.values.push_back(static_cast<Value>(pick));
    pos += static_cast<std::size_t>(c);
  }
  return out;
}

double GruInfluence::log_prob(const LocalHistory&, const PredictorCarry& carry, const SourceValue& src) const {
  double lp = 0.0;
  std::size_t pos = 0;
  const auto& card = params_->shape().source_card;
  for (std::size_t v = 0; v < card.size(); ++v) {
    lp += carry.log_probs[pos + src.values[v]];
    pos += static_cast<std::size_t>(card[v]);
  }
  return lp;
}

std::size_t source_index(const SourceValue& src, std::span<const int> card) {
  std::size_t idx = 0, stride = 1;
  for (std::size_t v = 0; v < card.size(); ++v) {
    idx += src.values[v] * stride;
    stride *= static_cast<std::size_t>(card[v]);
  }
  return idx;
}

SourceValue source_from_index(std::size_t index, std::span<const int> card) {
  SourceValue out;
  for (int c : card) {
    out.values.push_back(static_cast<Value>(index % static_cast<std::size_t>(c)));
    index /= static_cast<std::size_t>(c);
  }
  return out;
}

std::size_t source_space_size(std::span<const int> card) {
  std::size_t n = 1;
  for (int c : card) n *= static_cast<std::size_t>(c);
  return n;
}

}  // namespace sis
