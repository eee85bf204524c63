#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "riskcb/errors.hpp"
#include "riskcb/harness.hpp"
#include "riskcb/random.hpp"

namespace rcb::harness {

double objective_value(Objective objective, double q, std::span<const RoundRecord> records) {
  if (records.empty()) throw NoDataError("objective of an empty interaction log");
  std::vector<double> rewards;
  rewards.reserve(records.size());
  for (const auto& r : records) rewards.push_back(r.reward);
  if (objective == Objective::Mean) return risk::weighted_mean(risk::Sample(std::move(rewards)));
  return risk::realized_marginal_expectile(rewards, q, risk::Orientation::Reward);
}

std::vector<Json> sample_trials(const RunConfig& cfg) {
  const std::uint64_t base_seed = cfg.require_seed();
  const Json base = config_to_json(cfg);
  // Parameter draws use their own stream so trial seeds stay base + i.
  Rng rng(base_seed ^ 0x5eedf00dULL);
  std::vector<Json> out;
  out.reserve(cfg.sweep.trials);
  for (std::size_t i = 0; i < cfg.sweep.trials; ++i) {
    Json trial = base;
    for (const auto& r : cfg.sweep.ranges) {
      double v = 0.0;
      if (!r.choices.empty()) {
        v = r.choices[rng.index(r.choices.size())];
      } else if (r.log) {
        v = std::exp(rng.uniform(std::log(r.lo), std::log(r.hi)));
      } else {
        v = rng.uniform(r.lo, r.hi);
      }
      if (r.lo == r.hi && r.choices.empty()) v = r.lo;
      if (r.integer) {
        set_path(trial, r.key, static_cast<long long>(std::llround(v)));
      } else {
        set_path(trial, r.key, v);
      }
    }
    trial["seed"] = base_seed + i;
    trial["sweep"]["ranges"] = Json::object();
    out.push_back(std::move(trial));
  }
  return out;
}

SweepResult run_trials(const RunConfig& base, const std::vector<Json>& candidates,
                       const env::Environment& environment, std::size_t jobs) {
  if (candidates.empty()) throw std::invalid_argument("sweep needs at least one trial");
  std::vector<TrialResult> results(candidates.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < candidates.size(); i = next++) {
      auto& res = results[i];
      res.index = i;
      res.config = candidates[i];
      try {
        const RunConfig cfg = config_from_json(candidates[i]);
        auto records = run(cfg, environment);
        res.objective = objective_value(base.sweep.objective, base.q, records);
        res.metrics = env::metrics(environment.kind(), records);
      } catch (const std::exception& e) {
        res.error = e.what();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, candidates.size());
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  SweepResult out;
  out.leaderboard = results;
  std::stable_sort(out.leaderboard.begin(), out.leaderboard.end(), [](const TrialResult& a, const TrialResult& b) {
    if (a.ok() != b.ok()) return a.ok();
    if (!a.ok()) return a.index < b.index;
    if (a.objective != b.objective) return a.objective > b.objective;
    return a.index < b.index;
  });
  if (!out.leaderboard.front().ok()) {
    throw std::runtime_error("no sweep trial succeeded; first error: " + out.leaderboard.front().error);
  }
  const auto& winner = out.leaderboard.front();
  out.best = config_from_json(winner.config);
  // Runs are deterministic; rerunning the winner avoids holding every log.
  out.best_records = run(out.best, environment);
  out.best_report = make_report(environment.kind(), out.best.q, out.best_records, out.best.report);
  return out;
}

SweepResult sweep(const RunConfig& cfg, const env::Environment& environment, std::size_t jobs) {
  return run_trials(cfg, sample_trials(cfg), environment, jobs);
}

}  // namespace rcb::harness
