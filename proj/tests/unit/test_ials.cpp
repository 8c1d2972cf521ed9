#include <doctest.h>

#include <cmath>

#include "common.hpp"
#include "sis/gac_oracle.hpp"
#include "sis/gtc.hpp"
#include "sis/ials.hpp"
#include "sis/influence.hpp"
#include "sis/training.hpp"

using namespace sis;
using sis::testing::random_sequence;
using sis::testing::tiny_gac;

TEST_CASE("source index round trip") {
  const std::vector<int> card{2, 3, 2};
  CHECK(source_space_size(card) == 12);
  for (std::size_t i = 0; i < 12; ++i) CHECK(source_index(source_from_index(i, card), card) == i);
  CHECK(source_index(SourceValue{{1, 0, 0}}, card) == 1);
  CHECK(source_index(SourceValue{{0, 1, 0}}, card) == 2);
}

TEST_CASE("incremental predictor matches the batched forward pass") {
  GacDomain gac(tiny_gac());
  GtcDomain gtc;
  for (const DomainModel* dom : {static_cast<const DomainModel*>(&gac), static_cast<const DomainModel*>(&gtc)}) {
    Rng rng(21);
    const auto shape = PredictorShape::for_domain(*dom);
    const auto p = PredictorParams::random(shape, rng, 1.0);
    GruInfluence gru(p);
    for (int i = 0; i < 10; ++i) {
      const auto seq = random_sequence(*dom, rng, 4, 6);
      const auto batch = make_batch(shape, std::span<const TrainingSequence>(&seq, 1));
      const auto fwd = forward(p, batch);
      LocalHistory d = seq.prefix;
      PredictorCarry carry;
      gru.reset(d, carry);
      for (std::size_t k = 0; k < seq.steps.size(); ++k) {
        const auto t = seq.masked_prefix() + k;
        double batched = 0.0;
        for (int v = 0; v < p.num_sources(); ++v)
          batched += fwd.log_probs[t][static_cast<std::size_t>(v)](seq.steps[k].source.values[static_cast<std::size_t>(v)], 0);
        CHECK(gru.log_prob(d, carry, seq.steps[k].source) == doctest::Approx(batched).epsilon(1e-9));
        d.extend(seq.steps[k].action, seq.steps[k].local.values);
        gru.advance(d, carry);
        PredictorCarry fresh;
        gru.reset(d, fresh);
        for (std::size_t j = 0; j < fresh.hidden.size(); ++j) CHECK(std::abs(fresh.hidden[j] - carry.hidden[j]) < 1e-12);
      }
      const auto h = encode_history(p, d);
      for (std::size_t j = 0; j < h.size(); ++j) CHECK(std::abs(h[j] - carry.hidden[j]) < 1e-12);
    }
  }
}

TEST_CASE("ials_step with a uniform predictor samples uniform sources") {
  GacDomain dom(tiny_gac());
  const auto p = PredictorParams::zeros(PredictorShape::for_domain(dom));
  GruInfluence gru(p);
  Rng rng(3);
  std::vector<int> counts(4, 0);
  const int n = 40000;
  const LocalHistory d0(LocalState{{0}});
  for (int i = 0; i < n; ++i) {
    IalsState st = ials_reset(gru, d0);
    const auto tr = ials_step(st, 0, dom, gru, rng);
    ++counts[source_index(tr.source, dom.source_cardinalities())];
    CHECK(st.history.num_steps() == 1);
    // Local model: chair 0 is granted iff the left neighbour stays away.
    CHECK(tr.reward == (tr.source.values[0] == 0 ? 1.0 : 0.0));
  }
  const double sigma = std::sqrt(0.25 * 0.75 / n);
  for (int c : counts) CHECK(std::abs(c / double(n) - 0.25) < 4 * sigma);
}

TEST_CASE("ials with the exact oracle reproduces the global outcome distribution") {
  const auto cfg = tiny_gac();
  GacDomain dom(cfg);
  ExactGacInfluence exact(cfg);
  Rng rng(4);
  // Play a fixed action sequence; compare P(outcome_2 = 1) from both simulators.
  const ActionId acts[2] = {GacDomain::kLeft, GacDomain::kRight};
  const int n = 40000;
  int g_hits = 0, i_hits = 0;
  for (int i = 0; i < n; ++i) {
    FactoredState s = dom.sample_initial(rng);
    for (ActionId a : acts) s = dom.step_global(s, a, rng).next;
    g_hits += dom.outcome(s);
    IalsState st = ials_reset(exact, LocalHistory(LocalState{{0}}));
    for (ActionId a : acts) ials_step(st, a, dom, exact, rng);
    i_hits += st.local().values[0];
  }
  const double pg = g_hits / double(n), pi = i_hits / double(n);
  CHECK(std::abs(pg - pi) < 4 * std::sqrt(2 * 0.25 / n));
}
