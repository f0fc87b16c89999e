#pragma once

// Replications, sweeps over scenario deltas, and the comparison against a
// baseline scenario.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hospsim/config.hpp"
#include "hospsim/simulation.hpp"

namespace hospsim {

/// Seed of replication k.
std::uint64_t replication_seed(const ExperimentConfig& cfg, int k);

/// Runs cfg.replications runs, replication k with seed seedBase + k, on up to
/// `jobs` threads. Results are ordered by k.
std::vector<RunResult> run_replications(const ExperimentConfig& cfg, const FlsSet& fls, int jobs = 1,
                                        RunOptions options = {});

struct Summary {
  std::size_t n = 0;
  double mean = 0;
  double std = 0;  // sample standard deviation; 0 when n == 1
  double min = 0;
  double max = 0;

  friend bool operator==(const Summary&, const Summary&) = default;
};

/// Throws std::invalid_argument on an empty input.
Summary summarize(std::vector<double> values);

/// Scalar responses of a run, in reporting order.
struct Response {
  const char* name;
  double (*get)(const RunResult&);
};
const std::vector<Response>& responses();

struct ResponseSummary {
  std::string response;
  Summary summary;
};

/// One summary per response.
std::vector<ResponseSummary> aggregate(const std::vector<RunResult>& results);

struct Scenario {
  std::string name;
  nlohmann::json delta;  // merge patch over the base config JSON
  ExperimentConfig config;
};

struct SweepSpec {
  std::string baseline;
  std::vector<Scenario> scenarios;
};

/// Sweep file:
///   { "base": "<config path>" | { ...config... },
///     "baseline": "<scenario name>",
///     "scenarios": [ { "name": "...", "delta": { ... } }, ... ] }
/// Every scenario is resolved and validated here, so a bad one rejects the
/// whole sweep. Scenarios share seedBase and replications (paired seeds);
/// a delta that changes either is rejected. Overrides apply to every scenario.
SweepSpec parse_sweep(const nlohmann::json& j, const std::filesystem::path& base_dir,
                      const ConfigOverrides& overrides = {});
SweepSpec load_sweep(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

struct ScenarioResult {
  std::string name;
  ExperimentConfig config;
  std::uint64_t config_hash = 0;
  std::vector<RunResult> runs;
  std::vector<ResponseSummary> summary;
};

struct SweepResult {
  std::string baseline;
  std::vector<ScenarioResult> scenarios;
};

/// All (scenario, replication) runs share one pool of `jobs` threads.
SweepResult run_sweep(const SweepSpec& spec, int jobs = 1, RunOptions options = {});

struct ReportRow {
  std::string scenario;
  std::vector<double> delta;  // per response, mean(scenario) - mean(baseline)
  double red_edge_fraction = 0;
};

/// Throws std::invalid_argument("missing baseline ...") when the named
/// baseline is not among the scenarios.
std::vector<ReportRow> hypothesis_report(const SweepResult& sweep);

/// summary.csv, report.csv and <scenario>/rep<k>/ run files under `dir`.
void write_sweep_outputs(const std::filesystem::path& dir, const SweepResult& sweep,
                         const ConfigOverrides& overrides = {});

/// Runs `tasks` indices on up to `jobs` threads. Exceptions from any task are
/// rethrown (the first by index) after all workers finish.
void parallel_for(std::size_t tasks, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace hospsim
