#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "sis/harness.hpp"

using namespace sis;

TEST_CASE("config parsing") {
  const auto cfg = parse_config(nlohmann::json::parse(R"({
    "domain": {"name": "tiny-gac"},
    "planner": {"mode": "gs-only", "budget": {"kind": "count", "sims": 50}, "episodes": 3, "runs": 2, "seed": 9},
    "selector": {"lambda": [0.1, 0.5]},
    "train": {"lr": 0.01}
  })"));
  CHECK(cfg.domain.gac.n_fixed_agents == 4);
  CHECK(cfg.domain.gac.fixed_policy == GacFixedPolicy::ProbabilityMatching);
  CHECK(cfg.planner.mode == PlannerMode::GsOnly);
  CHECK(cfg.planner.budget.sims == 50);
  CHECK(cfg.episodes == 3);
  CHECK(cfg.runs == 2);
  CHECK(cfg.seed == 9);
  CHECK(cfg.lambdas == std::vector<double>{0.1, 0.5});
  CHECK(cfg.planner.selector.lambda == 0.1);
  CHECK(cfg.planner.train.adam.learning_rate == 0.01);

  const auto gtc = parse_config(nlohmann::json::parse(R"({"domain": {"name": "gtc"}})"));
  CHECK(gtc.planner.search.gamma == 0.95);
  CHECK(gtc.planner.search.effective_horizon == 36);
  CHECK(gtc.planner.selector.c_meta == 0.1);
}

TEST_CASE("config errors") {
  auto bad = [](const char* text) { return parse_config(nlohmann::json::parse(text)); };
  CHECK_THROWS_AS(bad(R"({"planner": {"sims": 5}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"extra": 1})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"domain": {"name": "chess"}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"search": {"gamma": 0}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"selector": {"lambda": []}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"planner": {"budget": {"kind": "forever"}}})"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("number formatting and csv layout") {
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(std::nan("")) == "NA");
  RunResult r;
  r.run_id = 3;
  EpisodeMetrics e;
  e.ret = 2.0;
  e.steps.push_back(StepMetrics{1.5, 0.5, 10, 4, 6, 0.1, 4, 0.2, 300});
  e.buffer_size = 7;
  r.episodes.push_back(e);
  const auto csv = metrics_csv({r}, false);
  CHECK(csv.rfind(std::string(kMetricsHeader) + "\n", 0) == 0);
  CHECK(csv.find("3,1,2,NA,4,6,0.2,NA,7,false") != std::string::npos);
  const auto timed = metrics_csv({r}, true);
  CHECK(timed.find("3,1,2,1.5,4,6,0.2,NA,7,false") != std::string::npos);
  const auto timing = timing_csv({r});
  CHECK(timing.find("3,1,1.5,0.5,300") != std::string::npos);
}

TEST_CASE("atomic write") {
  const auto dir = std::filesystem::temp_directory_path() / "sis_unit_harness";
  std::filesystem::remove_all(dir);
  write_file_atomic(dir / "a.csv", "x\n");
  std::ifstream in(dir / "a.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "x");
  CHECK_FALSE(std::filesystem::exists(dir / "a.csv.tmp"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<std::atomic<int>> hits(37);
  parallel_for(37, 4, [&](int i) { hits[static_cast<std::size_t>(i)]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, 3, [](int i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}

TEST_CASE("experiments are reproducible and independent of worker count") {
  auto cfg = parse_config(nlohmann::json::parse(R"({
    "domain": {"name": "tiny-gac"},
    "planner": {"budget": {"kind": "count", "sims": 20}, "episodes": 2, "runs": 3, "seed": 5},
    "search": {"particles": 100},
    "train": {"steps": 2, "batch": 8}
  })"));
  const auto dom = make_domain(cfg.domain);
  const auto a = run_experiment(*dom, cfg, cfg.planner, 1);
  const auto b = run_experiment(*dom, cfg, cfg.planner, 3);
  CHECK(metrics_csv(a, false) == metrics_csv(b, false));
  REQUIRE(a.size() == 3);
  CHECK(a[0].run_id == 0);
  CHECK(a[2].episodes.size() == 2);
}
