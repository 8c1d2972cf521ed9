// SPDX-License-Identifier: Apache-2.0
// Command-line driver for planning experiments, dataset collection and offline training.
#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sis/harness.hpp"
#include "sis/planner.hpp"
#include "sis/pomcp.hpp"
#include "sis/replay_buffer.hpp"
#include "sis/training.hpp"

namespace fs = std::filesystem;
using namespace sis;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<int> episodes;
  std::string out;
};

void add_common(CLI::App* app, Common& c, bool out_is_file, bool runs = true) {
  app->add_option("--config", c.config, "Experiment config (JSON)")->required();
  app->add_option("--seed", c.seed, "Master seed");
  if (runs) {
    app->add_option("--runs", c.runs, "Independent runs");
    app->add_option("--episodes", c.episodes, "Episodes per run");
  }
  app->add_option("--out", c.out, out_is_file ? "Output file" : "Output directory");
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.runs) {
    if (*c.runs < 1) throw ConfigError("--runs must be >= 1");
    cfg.runs = *c.runs;
  }
  if (c.episodes) {
    if (*c.episodes < 1) throw ConfigError("--episodes must be >= 1");
    cfg.episodes = *c.episodes;
  }
  return cfg;
}

fs::path out_dir(const Common& c, const ExperimentConfig& cfg) { return c.out.empty() ? cfg.out_dir : fs::path(c.out); }

std::string lambda_tag(double l) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", l);
  return buf;
}

struct Summary {
  double mean_return = 0.0, ials_fraction = 0.0;
  int failed = 0;
};

Summary summarize(const std::vector<RunResult>& results) {
  Summary s;
  int n = 0;
  for (const auto& r : results)
    for (const auto& e : r.episodes) {
      s.mean_return += e.ret;
      s.ials_fraction += e.ials_fraction();
      s.failed += e.failed ? 1 : 0;
      ++n;
    }
  if (n > 0) {
    s.mean_return /= n;
    s.ials_fraction /= n;
  }
  return s;
}

void report(const std::string& what, const std::vector<RunResult>& results, const fs::path& path) {
  const auto s = summarize(results);
  std::printf("%s: runs=%zu mean_return=%.4f ials_fraction=%.4f failed_episodes=%d -> %s\n", what.c_str(),
              results.size(), s.mean_return, s.ials_fraction, s.failed, path.string().c_str());
}

// λ sweep shared by sis-fixed and sis-realtime.
void run_sweep(const std::string& name, const ExperimentConfig& cfg, const std::vector<double>& lambdas,
               const fs::path& dir, Budget budget) {
  const auto domain = make_domain(cfg.domain);
  const bool count = budget.kind == Budget::Kind::SimCount;
  for (double l : lambdas) {
    PlannerConfig pc = cfg.planner;
    pc.mode = PlannerMode::Sis;
    pc.budget = budget;
    pc.selector.lambda = l;
    try {
      pc.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    const auto results = run_experiment(*domain, cfg, pc, worker_count());
    const fs::path path = dir / (name + "_lambda" + lambda_tag(l) + ".csv");
    write_file_atomic(path, metrics_csv(results, !count));
    if (count) write_file_atomic(dir / (name + "_lambda" + lambda_tag(l) + ".timing.csv"), timing_csv(results));
    report(name + " lambda=" + lambda_tag(l), results, path);
  }
}

ReplayBuffer collect(const ExperimentConfig& cfg, int episodes, const std::string& policy) {
  const auto domain = make_domain(cfg.domain);
  std::vector<TrainingSequence> seqs(static_cast<std::size_t>(episodes));
  if (policy == "uniform") {
    Rng rng(cfg.seed);
    for (auto& seq : seqs) {
      FactoredState s = domain->sample_initial(rng);
      AugmentedParticle p{s, LocalHistory(domain->project_local(s))};
      seq = extract_training_data(rollout_global(p, *domain, domain->horizon(), rng));
    }
  } else if (policy == "pomcp-gs") {
    PlannerConfig pc = cfg.planner;
    pc.mode = PlannerMode::GsOnly;
    pc.budget.kind = Budget::Kind::SimCount;
    pc.train_online = false;
    parallel_for(episodes, worker_count(), [&](int i) {
      Planner p(*domain, pc, derive_rng(cfg.seed, static_cast<std::uint64_t>(i)));
      p.run_episode();
      seqs[static_cast<std::size_t>(i)] = p.last_trace();
    });
  } else {
    throw ConfigError("--policy must be 'uniform' or 'pomcp-gs'");
  }
  ReplayBuffer buf;
  for (auto& s : seqs) buf.add(std::move(s));
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planning with self-improving simulators"};
  app.require_subcommand(1);

  Common c;
  std::vector<double> lambdas;
  std::optional<double> seconds;

  auto* fixed = app.add_subcommand("sis-fixed", "Fixed simulation count per step, one CSV per lambda");
  add_common(fixed, c, false);
  fixed->add_option("--lambda", lambdas, "Lambda values (overrides selector.lambda)");

  auto* realtime = app.add_subcommand("sis-realtime", "Wall-clock budget per step, one CSV per lambda");
  add_common(realtime, c, false);
  realtime->add_option("--lambda", lambdas, "Lambda values (overrides selector.lambda)");
  realtime->add_option("--seconds", seconds, "Seconds per decision");

  auto* baseline = app.add_subcommand("baseline-gs", "Global simulator only");
  add_common(baseline, c, false);
  baseline->add_option("--seconds", seconds, "Use a wall-clock budget instead of the simulation count");

  int n_episodes = 0;
  std::string policy = "uniform";
  auto* collect_cmd = app.add_subcommand("collect-offline", "Collect a dataset of episodes");
  add_common(collect_cmd, c, true, false);
  collect_cmd->add_option("--policy", policy, "uniform | pomcp-gs")->check(CLI::IsMember({"uniform", "pomcp-gs"}));
  collect_cmd->add_option("--episodes", n_episodes, "Episodes to collect")->required();

  std::string data;
  int epochs = 1;
  std::vector<std::string> eval_sets;
  std::string curve;
  auto* train_cmd = app.add_subcommand("train-offline", "Train a predictor on a fixed dataset");
  add_common(train_cmd, c, true, false);
  train_cmd->add_option("--data", data, "Training dataset")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--epochs", epochs, "Passes over the dataset")->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--eval", eval_sets, "Datasets evaluated after every epoch")->check(CLI::ExistingFile);
  train_cmd->add_option("--curve", curve, "Per-epoch loss CSV");

  std::string theta;
  auto* two_phase = app.add_subcommand("eval-two-phase", "Plan with the IALS only, using a frozen predictor");
  add_common(two_phase, c, false);
  two_phase->add_option("--theta", theta, "Trained predictor")->required()->check(CLI::ExistingFile);
  two_phase->add_option("--seconds", seconds, "Use a wall-clock budget instead of the simulation count");

  std::vector<std::string> thetas, tests;
  auto* testloss = app.add_subcommand("eval-testloss", "Mean loss of predictors on datasets");
  add_common(testloss, c, true, false);
  testloss->add_option("--theta", thetas, "Predictors")->required()->check(CLI::ExistingFile);
  testloss->add_option("--test", tests, "Datasets")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    ExperimentConfig cfg = resolve(c);
    if (*fixed) {
      run_sweep("sis-fixed", cfg, lambdas.empty() ? cfg.lambdas : lambdas, out_dir(c, cfg),
                Budget::count(cfg.planner.budget.sims));
    } else if (*realtime) {
      run_sweep("sis-realtime", cfg, lambdas.empty() ? cfg.lambdas : lambdas, out_dir(c, cfg),
                Budget::time(seconds.value_or(cfg.planner.budget.seconds)));
    } else if (*baseline || *two_phase) {
      const auto domain = make_domain(cfg.domain);
      PlannerConfig pc = cfg.planner;
      if (seconds) pc.budget = Budget::time(*seconds);
      const bool count = pc.budget.kind == Budget::Kind::SimCount;
      RunSetup setup;
      std::string name = "baseline-gs";
      std::optional<PredictorParams> frozen;
      if (*baseline) {
        pc.mode = PlannerMode::GsOnly;
      } else {
        name = "two-phase";
        pc.mode = PlannerMode::IalsOnly;
        pc.train_online = false;
        frozen = load_params(theta);
        setup = [&](int, std::optional<InfluenceLearner>& learner, const InfluencePredictor*&) {
          learner = InfluenceLearner{*frozen, AdamState::fresh(frozen->flat().size())};
        };
      }
      try {
        pc.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      const auto results = run_experiment(*domain, cfg, pc, worker_count(), setup);
      const fs::path dir = out_dir(c, cfg);
      const fs::path path = dir / (name + ".csv");
      write_file_atomic(path, metrics_csv(results, !count));
      if (count) write_file_atomic(dir / (name + ".timing.csv"), timing_csv(results));
      report(name, results, path);
    } else if (*collect_cmd) {
      if (n_episodes < 1) throw ConfigError("--episodes must be >= 1");
      if (c.out.empty()) throw ConfigError("collect-offline needs --out <file>");
      const auto buf = collect(cfg, n_episodes, policy);
      buf.save(c.out);
      std::printf("collect-offline: policy=%s sequences=%zu -> %s\n", policy.c_str(), buf.size(), c.out.c_str());
    } else if (*train_cmd) {
      if (c.out.empty()) throw ConfigError("train-offline needs --out <file>");
      const auto domain = make_domain(cfg.domain);
      const auto train_set = ReplayBuffer::load(data);
      std::vector<ReplayBuffer> evals;
      for (const auto& p : eval_sets) evals.push_back(ReplayBuffer::load(p));
      Rng init = derive_rng(cfg.seed, 0), rng = derive_rng(cfg.seed, 1);
      auto learner = InfluenceLearner::untrained(PredictorShape::for_domain(*domain, cfg.planner.train.hidden),
                                                 cfg.planner.train, init);
      const int per_epoch = steps_for_epochs(train_set.size(), 1, cfg.planner.train.batch_size);
      std::ostringstream log;
      log << "epoch,train_loss";
      for (std::size_t i = 0; i < evals.size(); ++i) log << ",eval" << i << "_loss";
      log << '\n';
      std::optional<double> last;
      for (int e = 0; e <= epochs; ++e) {
        if (e > 0) last = train_steps(learner, train_set, per_epoch, cfg.planner.train, rng);
        log << e << ',' << (last ? format_number(*last) : "NA");
        for (const auto& ev : evals) log << ',' << format_number(dataset_loss(learner.params, ev));
        log << '\n';
      }
      save_params(learner.params, c.out);
      if (!curve.empty()) write_file_atomic(curve, log.str());
      std::printf("train-offline: sequences=%zu epochs=%d final_train_loss=%s -> %s\n", train_set.size(), epochs,
                  last ? format_number(*last).c_str() : "NA", c.out.c_str());
    } else if (*testloss) {
      if (c.out.empty()) throw ConfigError("eval-testloss needs --out <file>");
      std::ostringstream out;
      out << "theta,test_set,loss\n";
      std::vector<ReplayBuffer> sets;
      for (const auto& t : tests) sets.push_back(ReplayBuffer::load(t));
      for (const auto& th : thetas) {
        const auto params = load_params(th);
        for (std::size_t i = 0; i < sets.size(); ++i)
          out << th << ',' << tests[i] << ',' << format_number(dataset_loss(params, sets[i])) << '\n';
      }
      write_file_atomic(c.out, out.str());
      std::printf("eval-testloss: %zu predictors x %zu datasets -> %s\n", thetas.size(), tests.size(), c.out.c_str());
    }
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
