#include "riskcb/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "riskcb/decision.hpp"
#include "riskcb/errors.hpp"
#include "riskcb/random.hpp"

namespace rcb::harness {

std::vector<std::size_t> row_order(const RunConfig& cfg, const env::Environment& environment) {
  const std::size_t rows = environment.size();
  const std::size_t horizon = cfg.horizon.value_or(rows);
  if (horizon > rows) {
    throw ConfigError("horizon " + std::to_string(horizon) + " exceeds the environment's " + std::to_string(rows) +
                      " rows");
  }
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (cfg.env.shuffle) {
    Rng rng(cfg.env.shuffle_seed);
    for (std::size_t i = rows; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  }
  order.resize(horizon);
  return order;
}

namespace {

decision::GammaSchedule schedule_for(const RunConfig& cfg, std::size_t horizon, double h, std::size_t dim) {
  decision::GammaSchedule s;
  s.mode = cfg.gamma_mode;
  s.gamma = cfg.gamma;
  s.scale = cfg.gamma_scale;
  s.horizon = horizon;
  s.h = h;
  s.theta = risk::ExpectileConfig(cfg.q).theta();
  s.dim = dim;
  s.reg_bound = cfg.reg_bound;
  return s;
}

}  // namespace

std::vector<RoundRecord> run_finite(const RunConfig& cfg, const env::Environment& environment) {
  if (!environment.finite_actions()) throw ConfigError("finite algorithm needs a finite-action environment");
  const auto order = row_order(cfg, environment);
  const risk::ExpectileConfig ecfg(cfg.q);
  const std::size_t max_actions = environment.max_actions();

  regression::LinearModel model(environment.context_dim(), max_actions);
  regression::OnlineSolver solver(cfg.solver, static_cast<std::size_t>(model.parameters().size()));
  const auto schedule = schedule_for(cfg, order.size(), 1.0 / static_cast<double>(max_actions),
                                     static_cast<std::size_t>(model.parameters().size()));
  Rng master(cfg.require_seed());
  Rng rng(master.split());

  std::vector<RoundRecord> out;
  out.reserve(order.size());
  for (std::size_t t = 1; t <= order.size(); ++t) {
    const std::size_t row = order[t - 1];
    try {
      const auto x = environment.context(row);
      const std::size_t k = environment.num_actions(row);
      const auto fhat = model.predict_all(x, k);
      const std::size_t ahat = decision::argmin_exact(fhat);
      const double gamma = schedule.at(t);
      const auto p = decision::al_distribution(fhat, ahat, {gamma, ecfg.theta(), order.size()});
      const std::size_t a = decision::sample_index(p, rng);

      RoundRecord r;
      r.t = t;
      r.context_id = row;
      r.action = a;
      r.weight = p[a];
      r.reward = environment.reward(row, a);
      r.loss = environment.adapter().loss(r.reward);
      r.fhat = fhat[a];
      r.ahat = ahat;
      r.gamma = gamma;
      r.label = environment.label(row);
      r.num_actions = k;
      if (const auto rho = environment.true_risk(row, cfg.q)) {
        double expected = 0.0;
        for (std::size_t i = 0; i < k; ++i) expected += p[i] * (*rho)[i];
        r.expected_regret = expected - *std::min_element(rho->begin(), rho->begin() + static_cast<std::ptrdiff_t>(k));
      }
      regression::update(model, solver, x, Action{a}, r.loss, ecfg);
      out.push_back(r);
    } catch (const RunError&) {
      throw;
    } catch (const std::exception& e) {
      throw RunError(t, e.what());
    }
  }
  return out;
}

std::vector<RoundRecord> run_interval(const RunConfig& cfg, const env::Environment& environment) {
  if (environment.finite_actions()) throw ConfigError("interval algorithm needs an interval-action environment");
  const auto order = row_order(cfg, environment);
  const risk::ExpectileConfig ecfg(cfg.q);
  Rng master(cfg.require_seed());

  regression::PredictorSpec spec;
  spec.head = environment.head();
  spec.input_dim = environment.context_dim();
  spec.num_frequencies = cfg.num_frequencies;
  spec.bandwidth = cfg.bandwidth;
  spec.seed = master.split();
  spec.beta = environment.beta();
  regression::HeadModel model(spec);
  regression::OnlineSolver solver(cfg.solver, static_cast<std::size_t>(model.parameters().size()));
  const auto space = decision::ActionSpace::interval(cfg.h);
  const auto schedule =
      schedule_for(cfg, order.size(), cfg.h, static_cast<std::size_t>(model.parameters().size()));
  Rng rng(master.split());

  std::vector<RoundRecord> out;
  out.reserve(order.size());
  for (std::size_t t = 1; t <= order.size(); ++t) {
    const std::size_t row = order[t - 1];
    try {
      const auto x = environment.context(row);
      const auto f = model.bind(x);
      const double gamma = schedule.at(t);
      const decision::ExplorationConfig ex(gamma, ecfg.theta(), order.size());
      const double ahat = cfg.exact_argmin
                              ? decision::argmin_brent(f, cfg.brent_tol)
                              : decision::argmin_sampled(f, cfg.delta.value_or(1.0 / (4.0 * ex.theta * gamma)), rng);
      const auto draw = decision::cont_al_sample(f, ahat, space, ex, rng);
      const double a = action_point(draw.action);

      RoundRecord r;
      r.t = t;
      r.context_id = row;
      r.action = a;
      r.weight = draw.weight;
      r.atom = draw.atom;
      r.reward = environment.reward(row, a);
      r.loss = environment.adapter().loss(r.reward);
      r.fhat = f(a);
      r.ahat = ahat;
      r.gamma = gamma;
      r.label = environment.label(row);
      regression::update(model, solver, x, Action{a}, r.loss, ecfg);
      out.push_back(r);
    } catch (const RunError&) {
      throw;
    } catch (const std::exception& e) {
      throw RunError(t, e.what());
    }
  }
  return out;
}

std::vector<RoundRecord> run(const RunConfig& cfg, const env::Environment& environment) {
  switch (cfg.algorithm) {
    case Algorithm::Finite:
      return run_finite(cfg, environment);
    case Algorithm::Interval:
      return run_interval(cfg, environment);
    case Algorithm::Auto:
      break;
  }
  return environment.finite_actions() ? run_finite(cfg, environment) : run_interval(cfg, environment);
}

// ------------------------------------------------------------------- log io

namespace {

Json action_json(const Action& a) {
  if (const auto* i = std::get_if<std::size_t>(&a)) return *i;
  return std::get<double>(a);
}

Action action_from_json(const Json& j) {
  if (j.is_number_unsigned() || j.is_number_integer()) return j.get<std::size_t>();
  return j.get<double>();
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json record_to_json(const RoundRecord& r) {
  Json j;
  j["t"] = r.t;
  j["context_id"] = r.context_id;
  j["action"] = action_json(r.action);
  j["weight"] = r.weight;
  j["atom"] = r.atom;
  j["reward"] = r.reward;
  j["loss"] = r.loss;
  j["fhat"] = r.fhat;
  j["ahat"] = action_json(r.ahat);
  j["gamma"] = r.gamma;
  j["label"] = finite_or_null(r.label);
  j["num_actions"] = r.num_actions;
  if (r.expected_regret) j["expected_regret"] = *r.expected_regret;
  return j;
}

RoundRecord record_from_json(const Json& j) {
  RoundRecord r;
  r.t = j.at("t").get<std::size_t>();
  r.context_id = j.at("context_id").get<std::size_t>();
  r.action = action_from_json(j.at("action"));
  r.weight = j.at("weight").get<double>();
  r.atom = j.at("atom").get<bool>();
  r.reward = j.at("reward").get<double>();
  r.loss = j.at("loss").get<double>();
  r.fhat = j.at("fhat").get<double>();
  r.ahat = action_from_json(j.at("ahat"));
  r.gamma = j.at("gamma").get<double>();
  r.label = j.at("label").is_null() ? std::numeric_limits<double>::quiet_NaN() : j.at("label").get<double>();
  r.num_actions = j.at("num_actions").get<std::size_t>();
  if (j.contains("expected_regret")) r.expected_regret = j.at("expected_regret").get<double>();
  return r;
}

void write_rounds(const std::string& path, std::span<const RoundRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::vector<RoundRecord> read_rounds(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<RoundRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(n) + ": malformed round record: " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------- ips

IpsEstimate ips_estimate(std::span<const RoundRecord> records, const env::Environment& environment,
                         const std::function<std::size_t(std::size_t, std::size_t)>& policy) {
  if (records.empty()) throw NoDataError("IPS estimate of an empty log");
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& r : records) {
    const std::size_t k = environment.num_actions(r.context_id);
    const double v = action_index(r.action) == policy(r.context_id, k) ? r.loss / r.weight : 0.0;
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(records.size());
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean);
  return {mean, std::sqrt(var / n)};
}

}  // namespace rcb::harness
