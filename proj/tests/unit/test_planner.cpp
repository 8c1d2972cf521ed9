#include <doctest.h>

#include "common.hpp"
#include "sis/gac_oracle.hpp"
#include "sis/planner.hpp"

using namespace sis;
using sis::testing::tiny_gac;

namespace {

PlannerConfig small_config(PlannerMode mode, int sims = 100) {
  PlannerConfig c;
  c.mode = mode;
  c.budget = Budget::count(sims);
  c.search.particles = 200;
  c.search.ucb_c = 1.0;
  c.train.steps_per_episode = 4;
  c.train.batch_size = 16;
  return c;
}

}  // namespace

TEST_CASE("simulation-count budget is exact") {
  GacDomain dom(tiny_gac());
  Planner p(dom, small_config(PlannerMode::Sis, 37), Rng(1));
  const auto ep = p.run_episode();
  CHECK(ep.steps.size() == 5);
  for (const auto& m : ep.steps) {
    CHECK(m.simulations == 37);
    CHECK(m.n_gs + m.n_ials == 37);
    CHECK(m.n_gs >= 1);
    CHECK(m.l_samples == m.n_gs);
    CHECK(m.lhat.has_value());
  }
  CHECK(p.backups_gs() + p.backups_ials() == 5 * 37);
}

TEST_CASE("gs-only planning fills the buffer by one sequence per simulation") {
  GacDomain dom(tiny_gac());
  Planner p(dom, small_config(PlannerMode::GsOnly), Rng(2));
  p.begin_episode();
  StepMetrics m;
  const ActionId a = p.plan_step(m);
  CHECK(dom.valid_action(a));
  CHECK(p.buffer().size() == 100);
  CHECK(m.n_gs == 100);
  CHECK(m.n_ials == 0);
  CHECK(p.tree().size() <= 101);
  const auto ep = p.run_episode();
  CHECK_FALSE(ep.train_loss.has_value());  // gs-only trains only when asked
  CHECK(ep.buffer_size == 600);
}

TEST_CASE("extract_training_data shapes") {
  GacDomain dom(tiny_gac());
  Rng rng(3);
  FactoredState s = dom.sample_initial(rng);
  AugmentedParticle part{s, LocalHistory(dom.project_local(s))};
  part.global = dom.step_global(part.global, 1, rng).next;
  part.history.extend(1, dom.project_local(part.global).values);
  const auto tr = rollout_global(part, dom, 3, rng);
  const auto seq = extract_training_data(tr);
  CHECK(seq.prefix == part.history);
  REQUIRE(seq.steps.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(seq.steps[k].action == tr.steps[k].action);
    CHECK(seq.steps[k].source == *tr.steps[k].source);
    CHECK(seq.steps[k].local == dom.project_local(tr.global_after(k)));
  }
  CHECK(seq.full_history() == tr.history);
  TrajectoryRecord ials = tr;
  ials.origin = SimulatorKind::Ials;
  CHECK_THROWS(extract_training_data(ials));
}

TEST_CASE("sis planner trains once per episode; ials-only keeps weights frozen") {
  GacDomain dom(tiny_gac());
  Planner sis(dom, small_config(PlannerMode::Sis), Rng(4));
  const auto before = sis.learner().params.flat();
  const auto ep = sis.run_episode();
  REQUIRE(ep.train_loss.has_value());
  CHECK(sis.learner().adam.t == 4);
  CHECK(sis.learner().params.flat() != before);

  Rng init(5);
  auto learner = InfluenceLearner::untrained(PredictorShape::for_domain(dom), TrainConfig{}, init);
  const auto frozen = learner.params.flat();
  Planner ials(dom, small_config(PlannerMode::IalsOnly), Rng(6), learner);
  for (int i = 0; i < 2; ++i) {
    const auto e = ials.run_episode();
    CHECK_FALSE(e.train_loss.has_value());
    for (const auto& m : e.steps) CHECK(m.n_ials == 100);
  }
  CHECK(ials.learner().params.flat() == frozen);
  CHECK(ials.buffer().empty());
  CHECK(ials.backups_gs() == 0);
}

TEST_CASE("ials-only needs a predictor") {
  GacDomain dom(tiny_gac());
  CHECK_THROWS_AS(Planner(dom, small_config(PlannerMode::IalsOnly), Rng(0)), std::invalid_argument);
  ExactGacInfluence exact(tiny_gac());
  Planner p(dom, small_config(PlannerMode::IalsOnly), Rng(0), std::nullopt, &exact);
  CHECK(p.run_episode().steps.size() == 5);
}

TEST_CASE("same seed, same episode") {
  GacDomain dom(tiny_gac());
  Planner a(dom, small_config(PlannerMode::Sis), Rng(7));
  Planner b(dom, small_config(PlannerMode::Sis), Rng(7));
  for (int i = 0; i < 2; ++i) {
    const auto ea = a.run_episode(), eb = b.run_episode();
    CHECK(ea.ret == eb.ret);
    CHECK(ea.train_loss == eb.train_loss);
    for (std::size_t k = 0; k < ea.steps.size(); ++k) CHECK(ea.steps[k].n_gs == eb.steps[k].n_gs);
    CHECK(a.last_trace() == b.last_trace());
  }
}

TEST_CASE("real trace records the episode") {
  GacDomain dom(tiny_gac());
  Planner p(dom, small_config(PlannerMode::GsOnly, 20), Rng(8));
  const auto ep = p.run_episode();
  const auto& tr = p.last_trace();
  CHECK(tr.prefix.num_steps() == 0);
  CHECK(tr.steps.size() == 5);
  double ret = 0.0;
  for (const auto& st : tr.steps) ret += st.local.values[0];
  CHECK(ret == ep.ret);
}

TEST_CASE("time budget runs at least one simulation") {
  GacDomain dom(tiny_gac());
  auto cfg = small_config(PlannerMode::Sis);
  cfg.budget = Budget::time(1e-9);
  Planner p(dom, cfg, Rng(9));
  p.begin_episode();
  StepMetrics m;
  p.plan_step(m);
  CHECK(m.simulations >= 1);
}

TEST_CASE("two-phase epochs and frozen planning") {
  GacDomain dom(tiny_gac());
  CHECK(steps_for_epochs(100, 3, 32) == 12);
  CHECK(steps_for_epochs(0, 3, 32) == 0);
  Planner gs(dom, small_config(PlannerMode::GsOnly, 20), Rng(10));
  gs.run_episode();
  auto cfg = small_config(PlannerMode::Sis, 20);
  const auto res = run_two_phase(dom, gs.buffer(), cfg, 2, 2, Rng(11));
  CHECK(res.train_losses.size() == 2);
  CHECK(res.episodes.size() == 2);
  CHECK(res.learner.adam.t == 2 * steps_for_epochs(gs.buffer().size(), 1, cfg.train.batch_size));
  for (const auto& e : res.episodes) CHECK(e.mean_n_gs() == 0.0);
}
