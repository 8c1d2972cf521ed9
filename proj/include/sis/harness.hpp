// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sis/gac.hpp"
#include "sis/gtc.hpp"
#include "sis/planner.hpp"

namespace sis {

/// Invalid or unreadable experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DomainSpec {
  std::string name = "gac";  // gac | tiny-gac | gtc
  GacConfig gac;
  GtcConfig gtc;
};

struct ExperimentConfig {
  DomainSpec domain;
  PlannerConfig planner;
  std::vector<double> lambdas;  // sweep; defaults to {planner.selector.lambda}
  int episodes = 40;
  int runs = 1;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "results";
};

/// Defaults for a domain name (hyperparameters per domain), before overrides.
ExperimentConfig default_config(const std::string& domain_name);

/// Parses a JSON document. Unknown keys and bad values throw ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

std::unique_ptr<DomainModel> make_domain(const DomainSpec& spec);

/// Worker count from SIS_WORKERS (default 1).
int worker_count();

struct RunResult {
  int run_id = 0;
  std::vector<EpisodeMetrics> episodes;
};

/// Per-run planner factory hook: returns the learner/predictor a run starts with.
using RunSetup = std::function<void(int run_id, std::optional<InfluenceLearner>& learner,
                                    const InfluencePredictor*& predictor)>;

/// Runs cfg.runs independent planners for cfg.episodes each, spread over
/// `workers` threads. Run r uses derive_rng(cfg.seed, r). Results are sorted by run id.
std::vector<RunResult> run_experiment(const DomainModel& domain, const ExperimentConfig& cfg,
                                      const PlannerConfig& planner, int workers, const RunSetup& setup = {});

/// Applies `fn` to every index in [0, n) on `workers` threads; rethrows the first failure.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

inline constexpr int kMetricsSchemaVersion = 1;
inline constexpr const char* kMetricsHeader =
    "run_id,episode,return,mean_step_time_ms,mean_n_gs,mean_n_ials,mean_lhat,train_loss,buffer_size,failed";
inline constexpr const char* kTimingHeader = "run_id,episode,mean_step_time_ms,mean_belief_time_ms,mean_belief_gs_calls";

/// Metrics CSV, one row per (run, episode). With include_timing false the
/// wall-time column holds NA so the file is a pure function of (seed, config).
std::string metrics_csv(const std::vector<RunResult>& results, bool include_timing);
std::string timing_csv(const std::vector<RunResult>& results);

/// Writes through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Formats a double with enough digits to round-trip; non-finite or empty -> NA.
std::string format_number(double v);

}  // namespace sis
