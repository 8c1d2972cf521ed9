// SPDX-License-Identifier: Apache-2.0
#include "sis/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <initializer_list>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace sis {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError("config: section '" + section + "' must be a table");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : obj.items())
    if (!ok.count(k)) throw ConfigError("config: unknown key '" + section + "." + k + "'");
}

template <class T>
void read(const json& obj, const char* key, const std::string& section, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad value for '" + section + "." + key + "'");
  }
}

GacFixedPolicy parse_fixed_policy(const std::string& s) {
  if (s == "greedy") return GacFixedPolicy::Greedy;
  if (s == "probability-matching") return GacFixedPolicy::ProbabilityMatching;
  throw ConfigError("config: domain.fixed_policy must be 'greedy' or 'probability-matching'");
}

PlannerMode parse_mode(const std::string& s) {
  if (s == "sis") return PlannerMode::Sis;
  if (s == "gs-only") return PlannerMode::GsOnly;
  if (s == "ials-only") return PlannerMode::IalsOnly;
  throw ConfigError("config: planner.mode must be one of sis, gs-only, ials-only");
}

void parse_domain(const json& d, ExperimentConfig& cfg) {
  auto& spec = cfg.domain;
  if (spec.name == "gtc") {
    check_keys(d, "domain", {"name", "entry_prob", "exit_prob", "init_prob", "horizon", "fixed_switch_period"});
    read(d, "entry_prob", "domain", spec.gtc.entry_prob);
    read(d, "exit_prob", "domain", spec.gtc.exit_prob);
    read(d, "init_prob", "domain", spec.gtc.init_prob);
    read(d, "horizon", "domain", spec.gtc.horizon);
    read(d, "fixed_switch_period", "domain", spec.gtc.fixed_switch_period);
  } else {
    check_keys(d, "domain", {"name", "n_fixed_agents", "horizon", "obs_noise", "fixed_policy"});
    read(d, "n_fixed_agents", "domain", spec.gac.n_fixed_agents);
    read(d, "horizon", "domain", spec.gac.horizon);
    read(d, "obs_noise", "domain", spec.gac.obs_noise);
    if (d.contains("fixed_policy")) {
      std::string p;
      read(d, "fixed_policy", "domain", p);
      spec.gac.fixed_policy = parse_fixed_policy(p);
    }
  }
}

void parse_planner(const json& p, ExperimentConfig& cfg) {
  check_keys(p, "planner", {"mode", "budget", "episodes", "runs", "seed", "train_online", "train_gs_only"});
  if (p.contains("mode")) {
    std::string m;
    read(p, "mode", "planner", m);
    cfg.planner.mode = parse_mode(m);
  }
  if (p.contains("budget")) {
    const auto& b = p.at("budget");
    check_keys(b, "planner.budget", {"kind", "sims", "seconds"});
    read(b, "sims", "planner.budget", cfg.planner.budget.sims);
    read(b, "seconds", "planner.budget", cfg.planner.budget.seconds);
    if (b.contains("kind")) {
      std::string k;
      read(b, "kind", "planner.budget", k);
      if (k == "count")
        cfg.planner.budget.kind = Budget::Kind::SimCount;
      else if (k == "time")
        cfg.planner.budget.kind = Budget::Kind::TimeBudget;
      else
        throw ConfigError("config: planner.budget.kind must be 'count' or 'time'");
    }
  }
  read(p, "episodes", "planner", cfg.episodes);
  read(p, "runs", "planner", cfg.runs);
  read(p, "seed", "planner", cfg.seed);
  read(p, "train_online", "planner", cfg.planner.train_online);
  read(p, "train_gs_only", "planner", cfg.planner.train_gs_only);
}

void parse_selector(const json& s, ExperimentConfig& cfg) {
  check_keys(s, "selector", {"lambda", "c_meta", "ema_alpha", "literal_paper_sign", "literal_paper_bonus"});
  auto& sel = cfg.planner.selector;
  if (s.contains("lambda")) {
    const auto& l = s.at("lambda");
    if (l.is_number()) {
      cfg.lambdas = {l.get<double>()};
    } else if (l.is_array() && !l.empty() && std::all_of(l.begin(), l.end(), [](const json& x) { return x.is_number(); })) {
      cfg.lambdas = l.get<std::vector<double>>();
    } else {
      throw ConfigError("config: selector.lambda must be a number or a nonempty list of numbers");
    }
    sel.lambda = cfg.lambdas.front();
  }
  read(s, "c_meta", "selector", sel.c_meta);
  read(s, "ema_alpha", "selector", sel.ema_alpha);
  read(s, "literal_paper_sign", "selector", sel.literal_paper_sign);
  read(s, "literal_paper_bonus", "selector", sel.literal_paper_bonus);
}

}  // namespace

ExperimentConfig default_config(const std::string& name) {
  ExperimentConfig cfg;
  cfg.domain.name = name;
  auto& pc = cfg.planner;
  pc.search.particles = 1000;
  pc.train.steps_per_episode = 64;
  pc.train.batch_size = 128;
  pc.train.hidden = 8;
  if (name == "gac" || name == "tiny-gac") {
    pc.search.ucb_c = 100.0;
    pc.search.gamma = 1.0;
    pc.search.effective_horizon = 0;
    pc.selector.c_meta = 0.3;
    pc.train.adam.learning_rate = 0.001;
    pc.budget.seconds = 1.0 / 64.0;
    if (name == "tiny-gac") {
      cfg.domain.gac.n_fixed_agents = 4;
      cfg.domain.gac.horizon = 5;
      cfg.domain.gac.fixed_policy = GacFixedPolicy::ProbabilityMatching;
    }
  } else if (name == "gtc") {
    pc.search.ucb_c = 10.0;
    pc.search.gamma = 0.95;
    pc.search.effective_horizon = 36;
    pc.selector.c_meta = 0.1;
    pc.train.adam.learning_rate = 0.00025;
    pc.budget.seconds = 1.0 / 16.0;
  } else {
    throw ConfigError("config: unknown domain '" + name + "' (expected gac, tiny-gac, or gtc)");
  }
  cfg.lambdas = {pc.selector.lambda};
  return cfg;
}

ExperimentConfig parse_config(const json& doc) {
  check_keys(doc, "<root>", {"domain", "planner", "search", "selector", "train", "output"});
  std::string name = "gac";
  if (doc.contains("domain")) read(doc.at("domain"), "name", "domain", name);
  ExperimentConfig cfg = default_config(name);
  if (doc.contains("domain")) parse_domain(doc.at("domain"), cfg);
  if (doc.contains("planner")) parse_planner(doc.at("planner"), cfg);
  if (doc.contains("search")) {
    const auto& s = doc.at("search");
    check_keys(s, "search", {"ucb_c", "gamma", "particles", "effective_horizon"});
    read(s, "ucb_c", "search", cfg.planner.search.ucb_c);
    read(s, "gamma", "search", cfg.planner.search.gamma);
    read(s, "particles", "search", cfg.planner.search.particles);
    read(s, "effective_horizon", "search", cfg.planner.search.effective_horizon);
  }
  if (doc.contains("selector")) parse_selector(doc.at("selector"), cfg);
  if (doc.contains("train")) {
    const auto& t = doc.at("train");
    check_keys(t, "train", {"steps", "batch", "lr", "hidden", "init_scale", "clip_norm"});
    read(t, "steps", "train", cfg.planner.train.steps_per_episode);
    read(t, "batch", "train", cfg.planner.train.batch_size);
    read(t, "lr", "train", cfg.planner.train.adam.learning_rate);
    read(t, "hidden", "train", cfg.planner.train.hidden);
    read(t, "init_scale", "train", cfg.planner.train.init_scale);
    read(t, "clip_norm", "train", cfg.planner.train.clip_norm);
  }
  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    check_keys(o, "output", {"dir"});
    std::string dir;
    read(o, "dir", "output", dir);
    if (!dir.empty()) cfg.out_dir = dir;
  }

  if (cfg.episodes < 1) throw ConfigError("config: planner.episodes must be >= 1");
  if (cfg.runs < 1) throw ConfigError("config: planner.runs must be >= 1");
  try {
    if (cfg.domain.name == "gtc")
      cfg.domain.gtc.validate();
    else
      cfg.domain.gac.validate();
    for (double l : cfg.lambdas) {
      auto sel = cfg.planner.selector;
      sel.lambda = l;
      sel.validate();
    }
    auto pc = cfg.planner;
    pc.budget.kind = Budget::Kind::SimCount;
    pc.validate();
    if (cfg.planner.budget.kind == Budget::Kind::TimeBudget && !(cfg.planner.budget.seconds > 0.0))
      throw std::invalid_argument("planner.budget.seconds must be > 0");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

std::unique_ptr<DomainModel> make_domain(const DomainSpec& spec) {
  if (spec.name == "gtc") return std::make_unique<GtcDomain>(spec.gtc);
  if (spec.name == "gac" || spec.name == "tiny-gac") return std::make_unique<GacDomain>(spec.gac);
  throw ConfigError("config: unknown domain '" + spec.name + "'");
}

int worker_count() {
  const char* env = std::getenv("SIS_WORKERS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError("SIS_WORKERS must be a positive integer");
  return static_cast<int>(std::min<long>(n, 256));
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
          next.store(n);
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<RunResult> run_experiment(const DomainModel& domain, const ExperimentConfig& cfg,
                                      const PlannerConfig& planner, int workers, const RunSetup& setup) {
  std::vector<RunResult> results(static_cast<std::size_t>(cfg.runs));
  parallel_for(cfg.runs, workers, [&](int r) {
    std::optional<InfluenceLearner> learner;
    const InfluencePredictor* predictor = nullptr;
    if (setup) setup(r, learner, predictor);
    Planner p(domain, planner, derive_rng(cfg.seed, static_cast<std::uint64_t>(r)), std::move(learner), predictor);
    auto& res = results[static_cast<std::size_t>(r)];
    res.run_id = r;
    res.episodes.reserve(static_cast<std::size_t>(cfg.episodes));
    for (int e = 0; e < cfg.episodes; ++e) res.episodes.push_back(p.run_episode());
  });
  return results;
}

std::string format_number(double v) {
  if (!std::isfinite(v)) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

namespace {

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

}  // namespace

std::string metrics_csv(const std::vector<RunResult>& results, bool include_timing) {
  std::ostringstream out;
  out << kMetricsHeader << '\n';
  for (const auto& r : results)
    for (std::size_t e = 0; e < r.episodes.size(); ++e) {
      const auto& m = r.episodes[e];
      out << r.run_id << ',' << e + 1 << ',' << format_number(m.ret) << ','
          << (include_timing ? format_number(m.mean_step_ms()) : "NA") << ',' << format_number(m.mean_n_gs()) << ','
          << format_number(m.mean_n_ials()) << ',' << opt_number(m.mean_lhat()) << ',' << opt_number(m.train_loss)
          << ',' << m.buffer_size << ',' << (m.failed ? "true" : "false") << '\n';
    }
  return out.str();
}

std::string timing_csv(const std::vector<RunResult>& results) {
  std::ostringstream out;
  out << kTimingHeader << '\n';
  for (const auto& r : results)
    for (std::size_t e = 0; e < r.episodes.size(); ++e) {
      const auto& m = r.episodes[e];
      double belief_ms = 0.0, calls = 0.0;
      for (const auto& s : m.steps) {
        belief_ms += s.belief_ms;
        calls += static_cast<double>(s.belief_gs_calls);
      }
      const double n = m.steps.empty() ? 1.0 : static_cast<double>(m.steps.size());
      out << r.run_id << ',' << e + 1 << ',' << format_number(m.mean_step_ms()) << ',' << format_number(belief_ms / n)
          << ',' << format_number(calls / n) << '\n';
    }
  return out.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace sis
