#pragma once

// The online loop binding regression, decision and environment, plus
// reports, sweeps and run artifacts.

#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskcb/config.hpp"
#include "riskcb/environments.hpp"
#include "riskcb/record.hpp"
#include "riskcb/risk.hpp"

namespace rcb::harness {

inline constexpr const char* kCodeVersion = "riskcb 1.0.0";

/// A failure inside the online loop, tagged with its 1-based round.
class RunError : public std::runtime_error {
 public:
  RunError(std::size_t round, const std::string& what)
      : std::runtime_error("round " + std::to_string(round) + ": " + what), round_(round) {}
  std::size_t round() const { return round_; }

 private:
  std::size_t round_;
};

/// Rows served in rounds 1..T: stored order, or a seeded permutation when
/// env.shuffle is set. T is the horizon override or every row.
std::vector<std::size_t> row_order(const RunConfig& cfg, const env::Environment& environment);

/// Algorithm 1 over a finite-action environment: predict every action,
/// take the exact argmin, sample from the inverse-gap distribution, play,
/// update. |A| is the per-round action count.
std::vector<RoundRecord> run_finite(const RunConfig& cfg, const env::Environment& environment);

/// Algorithm 2 over an interval-action environment: predict through the
/// head, approximate (or Brent-exact) argmin, rejection-sample the
/// continuous distribution, play, update.
std::vector<RoundRecord> run_interval(const RunConfig& cfg, const env::Environment& environment);

/// Dispatches on cfg.algorithm (auto follows the environment).
std::vector<RoundRecord> run(const RunConfig& cfg, const env::Environment& environment);

Json record_to_json(const RoundRecord& r);
RoundRecord record_from_json(const Json& j);
void write_rounds(const std::string& path, std::span<const RoundRecord> records);
std::vector<RoundRecord> read_rounds(const std::string& path);

struct MetricEstimate {
  std::string name;
  risk::Interval ci;
};

struct CurvePoint {
  double q_eval = 0.5;
  risk::Interval ci;
};

struct ExperimentReport {
  std::string env;
  double q = 0.5;
  std::size_t rounds = 0;
  double coverage = 0.95;
  std::size_t resamples = 0;
  std::vector<MetricEstimate> metrics;
  /// Realized reward expectiles over the q_eval grid (risk-averse levels
  /// below 1/2 report values below the mean).
  std::vector<CurvePoint> curve;

  const MetricEstimate& metric(const std::string& name) const;
  Json to_json() const;
};

/// Environment metrics and the realized expectile curve, each with a
/// percentile bootstrap interval. Throws NoDataError on an empty log.
ExperimentReport make_report(env::EnvKind kind, double q, std::span<const RoundRecord> records,
                             const ReportOptions& options);

/// Manifest of a run: resolved config, its hash, dataset hash, seed and code version.
Json make_manifest(const RunConfig& cfg, const env::Environment& environment);

/// Sweep objective on a log: the realized reward expectile at level q, or
/// the mean reward. Larger is better.
double objective_value(Objective objective, double q, std::span<const RoundRecord> records);

struct TrialResult {
  std::size_t index = 0;
  Json config;
  double objective = 0.0;
  std::map<std::string, double> metrics;
  std::string error;  ///< empty on success
  bool ok() const { return error.empty(); }
};

struct SweepResult {
  /// Successful trials by decreasing objective, then failures by index.
  std::vector<TrialResult> leaderboard;
  RunConfig best;
  std::vector<RoundRecord> best_records;
  ExperimentReport best_report;
};

/// Trial configs drawn from cfg.sweep.ranges. Trial i runs with seed
/// cfg.seed + i, so sweeps that differ only in q share their seeds.
std::vector<Json> sample_trials(const RunConfig& cfg);

/// Runs candidates (up to `jobs` at a time) and ranks them by the objective
/// evaluated at the base config's q. Throws std::runtime_error when no
/// trial succeeds.
SweepResult run_trials(const RunConfig& base, const std::vector<Json>& candidates,
                       const env::Environment& environment, std::size_t jobs);

/// sample_trials followed by run_trials.
SweepResult sweep(const RunConfig& cfg, const env::Environment& environment, std::size_t jobs = 1);

struct IpsEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Importance-weighted mean loss of a deterministic policy over a finite
/// log, using the logged probabilities. policy(row, |A|) returns an action index.
IpsEstimate ips_estimate(std::span<const RoundRecord> records, const env::Environment& environment,
                         const std::function<std::size_t(std::size_t, std::size_t)>& policy);

}  // namespace rcb::harness
