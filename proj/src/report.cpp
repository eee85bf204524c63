#include <stdexcept>

#include "riskcb/errors.hpp"
#include "riskcb/harness.hpp"

namespace rcb::harness {

const MetricEstimate& ExperimentReport::metric(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return m;
  }
  throw std::out_of_range("report has no metric '" + name + "'");
}

namespace {

Json interval_json(const risk::Interval& ci) { return {{"point", ci.point}, {"lo", ci.lo}, {"hi", ci.hi}}; }

}  // namespace

Json ExperimentReport::to_json() const {
  Json j;
  j["format"] = "riskcb-report";
  j["version"] = 1;
  j["env"] = env;
  j["q"] = q;
  j["rounds"] = rounds;
  j["coverage"] = coverage;
  j["resamples"] = resamples;
  Json m = Json::object();
  for (const auto& e : metrics) m[e.name] = interval_json(e.ci);
  j["metrics"] = m;
  Json c = Json::array();
  for (const auto& p : curve) {
    Json row = interval_json(p.ci);
    row["q_eval"] = p.q_eval;
    c.push_back(row);
  }
  j["expectile_curve"] = c;
  return j;
}

ExperimentReport make_report(env::EnvKind kind, double q, std::span<const RoundRecord> records,
                             const ReportOptions& options) {
  if (records.empty()) throw NoDataError("report of an empty interaction log");
  ExperimentReport out;
  out.env = env::to_string(kind);
  out.q = q;
  out.rounds = records.size();
  out.coverage = options.coverage;
  out.resamples = options.resamples;

  // Each statistic gets its own stream of the bootstrap seed so adding a
  // metric never shifts another metric's interval.
  std::uint64_t stream = 0;
  for (const auto& [name, values] : env::metric_streams(kind, records)) {
    out.metrics.push_back({name, risk::bootstrap_ci(values, risk::Statistic::mean(), options.coverage,
                                                    options.resamples, options.seed + 1000 * ++stream)});
  }

  std::vector<double> rewards;
  rewards.reserve(records.size());
  for (const auto& r : records) rewards.push_back(r.reward);
  std::uint64_t level = 0;
  for (double q_eval : options.q_eval) {
    const auto stat = risk::Statistic::expectile(q_eval, risk::Orientation::Reward);
    out.curve.push_back(
        {q_eval, risk::bootstrap_ci(rewards, stat, options.coverage, options.resamples, options.seed + 7 + ++level)});
  }
  return out;
}

Json make_manifest(const RunConfig& cfg, const env::Environment& environment) {
  Json j;
  j["format"] = "riskcb-manifest";
  j["version"] = 1;
  j["config"] = config_to_json(cfg);
  j["config_hash"] = config_hash(cfg);
  j["dataset_hash"] = environment.content_hash();
  j["env_kind"] = env::to_string(environment.kind());
  j["seed"] = cfg.seed ? Json(*cfg.seed) : Json(nullptr);
  j["code_version"] = kCodeVersion;
  return j;
}

}  // namespace rcb::harness
