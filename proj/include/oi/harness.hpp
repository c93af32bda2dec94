#pragma once

// Experiment runner: configuration, per-trial RNG streams, ordered reduction
// of rows, aggregates recomputable from rows, and acceptance assertions.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "oi/geometry.hpp"
#include "oi/rng.hpp"

namespace oi::harness {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kCodeVersion = "oi-lab 0.1.0";

struct Constants {
  double duality_c = 1000.0;
  std::size_t boost_t_base = 25;  // 16 or 25
  double grid_step = 0.125;
  SearchCaps caps;

  void validate() const;
};

/// One acceptance assertion: aggregates[metric] <op> value.
struct Assertion {
  std::string metric;
  std::string op;  // one of <=, <, >=, >, ==
  double value = 0.0;
};

struct ExperimentConfig {
  std::string id;
  std::uint64_t seed = 0;
  std::size_t trials = 200;
  std::size_t workers = 1;
  /// Experiment-specific parameters; missing keys take the documented defaults.
  json params = json::object();
  /// Optional serialized instance (inline object, or a path string resolved by the CLI).
  json instance;
  Constants constants;
  /// Empty means the experiment's default acceptance block.
  std::optional<std::vector<Assertion>> acceptance;

  void validate() const;
};

ExperimentConfig config_from_json(const json& j);
ordered_json to_json(const ExperimentConfig& c);

struct AssertionResult {
  Assertion assertion;
  double actual = 0.0;
  bool pass = false;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<std::string> columns;
  std::vector<ordered_json> rows;
  ordered_json aggregates = ordered_json::object();
  std::vector<std::string> notes;
  std::vector<AssertionResult> assertions;
  bool passed = true;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval; z defaults to the two-sided 95% quantile.
Interval wilson(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

/// Stream for trial `t` of a run seeded with `seed`.
CounterRng trial_rng(std::uint64_t seed, std::size_t t);

/// Runs fn(t, rng) for t < trials on up to `workers` threads; results are
/// returned in trial order whatever the scheduling.
std::vector<ordered_json> run_trials(std::size_t trials, std::size_t workers, std::uint64_t seed,
                                     const std::function<ordered_json(std::size_t, CounterRng&)>& fn);

struct Probe {
  std::size_t n = 0;
  std::size_t successes = 0;
  std::size_t trials = 0;
  Interval interval;
};

struct SearchResult {
  std::size_t n = 0;
  bool found = false;
  std::vector<Probe> probes;
};

/// Doubling search n = n_start, 2 n_start, ... <= n_max; returns the first n
/// whose Wilson lower bound reaches `goal` - 0.02.
SearchResult sample_size_search(double goal, const std::function<bool(std::size_t, std::size_t, CounterRng&)>& trial,
                                std::size_t probe_trials, std::uint64_t seed, std::size_t n_start, std::size_t n_max,
                                std::size_t workers = 1);

const std::vector<std::string>& experiment_ids();
/// Column header of rows.csv per experiment.
const std::vector<std::string>& experiment_columns(const std::string& id);
std::vector<Assertion> default_acceptance(const std::string& id);

ExperimentReport run_experiment(const ExperimentConfig& config);

/// Aggregates from rows alone; run_experiment uses the same function.
ordered_json summarize(const ExperimentConfig& config, const std::vector<ordered_json>& rows);

std::vector<AssertionResult> evaluate(const std::vector<Assertion>& block, const ordered_json& aggregates);

ordered_json report_json(const ExperimentReport& r);
std::string rows_csv(const ExperimentReport& r);
/// Writes report.json and rows.csv into `dir` (created if missing).
void write_report(const ExperimentReport& r, const std::string& dir);

}  // namespace oi::harness
