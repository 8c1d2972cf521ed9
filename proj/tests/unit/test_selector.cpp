#include <doctest.h>

#include <cmath>

#include "common.hpp"
#include "sis/gtc.hpp"
#include "sis/selector.hpp"

using namespace sis;
using sis::testing::tiny_gac;

TEST_CASE("lhat update") {
  SelectorStats s;
  update_lhat(s, 0.8);
  CHECK(*s.lhat == 0.8);
  s.lhat = 0.5;
  update_lhat(s, 0.1);
  CHECK(*s.lhat == doctest::Approx(0.46));
  for (int i = 0; i < 400; ++i) update_lhat(s, 0.3);
  CHECK(*s.lhat == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("arm values and choice") {
  SelectorStats s;
  s.cfg.lambda = 0.7;
  s.cfg.c_meta = 0.3;
  s.lhat = 0.2;
  s.i = 10;
  s.n_ials = 4;
  s.n_gs = 6;
  CHECK(value_ials(s) == doctest::Approx(0.0276).epsilon(1e-3));
  CHECK(value_gs(s) == doctest::Approx(-0.5142).epsilon(1e-4));
  CHECK(choose_simulator(s) == SimulatorKind::Ials);

  s.cfg.c_meta = 0.0;
  s.lhat = 1.0;
  CHECK(choose_simulator(s) == SimulatorKind::Global);
  s.lhat = 0.7;  // tie
  CHECK(choose_simulator(s) == SimulatorKind::Global);

  s.cfg.literal_paper_sign = true;
  s.lhat = 0.2;
  CHECK(value_ials(s) == doctest::Approx(0.2));
  s.cfg.literal_paper_sign = false;
  s.cfg.literal_paper_bonus = true;
  s.cfg.c_meta = 1.0;
  CHECK(value_gs(s) == doctest::Approx(-0.7 + std::sqrt(std::log(6.0) / 10.0)));
}

TEST_CASE("seeding order and reset") {
  SelectorStats s;
  s.lhat = 0.4;
  CHECK(choose_simulator(s) == SimulatorKind::Global);
  record_choice(s, SimulatorKind::Global);
  CHECK(choose_simulator(s) == SimulatorKind::Ials);
  record_choice(s, SimulatorKind::Ials);
  Rng rng(1);
  for (int k = 0; k < 50; ++k) {
    record_choice(s, rng.bernoulli(0.5) ? SimulatorKind::Global : SimulatorKind::Ials);
    CHECK(s.i == s.n_gs + s.n_ials);
  }
  reset_step(s);
  CHECK(s.i == 0);
  CHECK(s.n_gs == 0);
  CHECK(s.n_ials == 0);
  CHECK(*s.lhat == 0.4);
  CHECK(choose_simulator(s) == SimulatorKind::Global);
}

TEST_CASE("config validation") {
  SelectorConfig c;
  c.ema_alpha = 0.0;
  CHECK_THROWS(c.validate());
  c = {};
  c.c_meta = -1.0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("kl_sample: carry overload agrees, deterministic sources give pure cross-entropy") {
  GtcDomain dom;
  Rng rng(2);
  const auto p = PredictorParams::zeros(PredictorShape::for_domain(dom));
  GruInfluence gru(p);
  FactoredState s = dom.sample_initial(rng);
  AugmentedParticle part{s, LocalHistory(dom.project_local(s))};
  for (int k = 0; k < 3; ++k) {
    part.global = dom.step_global(part.global, 0, rng).next;
    part.history.extend(0, dom.project_local(part.global).values);
  }
  const auto tr = rollout_global(part, dom, 6, rng);
  REQUIRE(tr.start_step == 3);
  // Uniform heads over four binary sources, zero source entropy.
  CHECK(kl_sample(tr, gru, dom) == doctest::Approx(4 * std::log(2.0)));
  PredictorCarry carry;
  gru.reset(part.history, carry);
  CHECK(kl_sample(tr, gru, dom, carry) == doctest::Approx(kl_sample(tr, gru, dom)).epsilon(1e-12));
}

TEST_CASE("kl_sample on gac subtracts the exact source entropy") {
  GacDomain dom(tiny_gac());
  Rng rng(3);
  const auto p = PredictorParams::zeros(PredictorShape::for_domain(dom));
  GruInfluence gru(p);
  FactoredState s = dom.sample_initial(rng);
  const auto tr = rollout_global({s, LocalHistory(dom.project_local(s))}, dom, 1, rng);
  // Initial counters: both sources are fair coins, so the bound is exactly zero.
  CHECK(std::abs(kl_sample(tr, gru, dom)) < 1e-12);
}
