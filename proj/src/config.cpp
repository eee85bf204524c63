#include "riskcb/config.hpp"

#include <fstream>
#include <sstream>

#include "riskcb/errors.hpp"

namespace rcb::harness {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Auto:
      return "auto";
    case Algorithm::Finite:
      return "finite";
    case Algorithm::Interval:
      return "interval";
  }
  return "unknown";
}

std::string to_string(Objective o) { return o == Objective::Expectile ? "expectile" : "mean"; }

std::uint64_t RunConfig::require_seed() const {
  if (!seed) throw ConfigError("seed is required (set \"seed\" in the config or pass --seed)");
  return *seed;
}

Json default_config_json() {
  const RunConfig d;
  Json j;
  j["env"] = {{"source", d.env.source},       {"kind", d.env.kind},       {"rows", d.env.rows},
              {"data_seed", d.env.data_seed}, {"dim", d.env.dim},         {"num_actions", d.env.num_actions},
              {"path", d.env.path},           {"schema", d.env.schema},   {"shuffle", d.env.shuffle},
              {"shuffle_seed", d.env.shuffle_seed}};
  j["q"] = d.q;
  j["algorithm"] = to_string(d.algorithm);
  j["h"] = d.h;
  j["gamma"] = {{"mode", decision::to_string(d.gamma_mode)},
                {"value", d.gamma},
                {"scale", d.gamma_scale},
                {"reg_bound", nullptr}};
  j["oracle"] = {{"solver", regression::to_string(d.solver.kind)},
                 {"step_scale", d.solver.step_scale},
                 {"newton_rate", d.solver.newton_rate},
                 {"newton_epsilon", d.solver.newton_epsilon},
                 {"num_frequencies", d.num_frequencies},
                 {"bandwidth", d.bandwidth}};
  j["argmin"] = {{"exact", d.exact_argmin}, {"delta", nullptr}, {"brent_tol", d.brent_tol}};
  j["seed"] = nullptr;
  j["horizon"] = nullptr;
  j["sweep"] = {{"trials", d.sweep.trials}, {"objective", to_string(d.sweep.objective)}, {"ranges", Json::object()}};
  j["report"] = {{"q_eval", d.report.q_eval},
                 {"coverage", d.report.coverage},
                 {"resamples", d.report.resamples},
                 {"seed", d.report.seed}};
  return j;
}

namespace {

// Free-form objects whose children are not checked against the defaults.
bool free_form(const std::string& path) { return path == "sweep.ranges"; }

void merge(Json& base, const Json& user, const std::string& prefix) {
  if (!user.is_object()) throw ConfigError("config " + (prefix.empty() ? "root" : "'" + prefix + "'") + " must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key)) throw ConfigError("unknown config key '" + path + "'");
    if (base[key].is_object() && !free_form(path)) {
      merge(base[key], value, path);
    } else {
      base[key] = value;
    }
  }
}

template <typename T>
T get(const Json& j, const std::string& path) {
  const Json* node = &j;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) node = &node->at(part);
  try {
    return node->get<T>();
  } catch (const Json::exception&) {
    throw ConfigError("config key '" + path + "' has the wrong type (" + node->dump() + ")");
  }
}

template <typename T>
std::optional<T> get_optional(const Json& j, const std::string& path) {
  const Json* node = &j;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) node = &node->at(part);
  if (node->is_null()) return std::nullopt;
  return get<T>(j, path);
}

std::size_t get_count(const Json& j, const std::string& path) {
  const auto v = get<double>(j, path);
  if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::size_t>(v))) {
    throw ConfigError("config key '" + path + "' must be a nonnegative integer");
  }
  return static_cast<std::size_t>(v);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

RunConfig config_from_json(const Json& user) {
  Json j = default_config_json();
  merge(j, user, "");

  RunConfig c;
  c.env.source = get<std::string>(j, "env.source");
  require(c.env.source == "synthetic" || c.env.source == "csv" || c.env.source == "jsonl",
          "env.source must be synthetic, csv or jsonl");
  c.env.kind = get<std::string>(j, "env.kind");
  c.env.rows = get_count(j, "env.rows");
  c.env.data_seed = get<std::uint64_t>(j, "env.data_seed");
  c.env.dim = get_count(j, "env.dim");
  c.env.num_actions = get_count(j, "env.num_actions");
  c.env.path = get<std::string>(j, "env.path");
  c.env.schema = get<std::string>(j, "env.schema");
  c.env.shuffle = get<bool>(j, "env.shuffle");
  c.env.shuffle_seed = get<std::uint64_t>(j, "env.shuffle_seed");
  if (c.env.source == "synthetic") {
    try {
      env::env_kind_from_string(c.env.kind);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("env.kind: ") + e.what());
    }
    require(c.env.rows > 0, "env.rows must be positive");
    require(c.env.num_actions > 0, "env.num_actions must be positive");
  } else {
    require(!c.env.path.empty(), "env.path is required for " + c.env.source + " sources");
    if (c.env.source == "csv") {
      require(!c.env.schema.empty(), "env.schema is required for csv sources");
      try {
        env::builtin_schema(c.env.schema);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("env.schema: ") + e.what());
      }
    }
  }

  c.q = get<double>(j, "q");
  require(c.q > 0.0 && c.q < 1.0, "q must lie in (0,1), got " + j["q"].dump());

  const auto algorithm = get<std::string>(j, "algorithm");
  if (algorithm == "auto") {
    c.algorithm = Algorithm::Auto;
  } else if (algorithm == "finite") {
    c.algorithm = Algorithm::Finite;
  } else if (algorithm == "interval") {
    c.algorithm = Algorithm::Interval;
  } else {
    throw ConfigError("algorithm must be auto, finite or interval");
  }

  c.h = get<double>(j, "h");
  require(c.h > 0.0 && c.h <= 1.0, "h must lie in (0,1], got " + j["h"].dump());

  try {
    c.gamma_mode = decision::gamma_mode_from_string(get<std::string>(j, "gamma.mode"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("gamma.mode: ") + e.what());
  }
  c.gamma = get<double>(j, "gamma.value");
  require(c.gamma > 0.0, "gamma.value must be positive");
  c.gamma_scale = get<double>(j, "gamma.scale");
  require(c.gamma_scale > 0.0, "gamma.scale must be positive");
  c.reg_bound = get_optional<double>(j, "gamma.reg_bound");
  require(!c.reg_bound || *c.reg_bound > 0.0, "gamma.reg_bound must be positive");

  try {
    c.solver.kind = regression::solver_kind_from_string(get<std::string>(j, "oracle.solver"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("oracle.solver: ") + e.what());
  }
  c.solver.step_scale = get<double>(j, "oracle.step_scale");
  c.solver.newton_rate = get<double>(j, "oracle.newton_rate");
  c.solver.newton_epsilon = get<double>(j, "oracle.newton_epsilon");
  require(c.solver.step_scale > 0.0, "oracle.step_scale must be positive");
  require(c.solver.newton_rate > 0.0, "oracle.newton_rate must be positive");
  require(c.solver.newton_epsilon > 0.0, "oracle.newton_epsilon must be positive");
  c.num_frequencies = get_count(j, "oracle.num_frequencies");
  require(c.num_frequencies > 0, "oracle.num_frequencies must be positive");
  c.bandwidth = get<double>(j, "oracle.bandwidth");
  require(c.bandwidth > 0.0, "oracle.bandwidth must be positive");

  c.exact_argmin = get<bool>(j, "argmin.exact");
  c.delta = get_optional<double>(j, "argmin.delta");
  require(!c.delta || *c.delta > 0.0, "argmin.delta must be positive");
  c.brent_tol = get<double>(j, "argmin.brent_tol");
  require(c.brent_tol > 0.0, "argmin.brent_tol must be positive");

  c.seed = get_optional<std::uint64_t>(j, "seed");
  if (!j["horizon"].is_null()) {
    c.horizon = get_count(j, "horizon");
    require(*c.horizon > 0, "horizon must be positive");
  }

  c.sweep.trials = get_count(j, "sweep.trials");
  require(c.sweep.trials >= 1, "sweep.trials must be at least 1");
  const auto objective = get<std::string>(j, "sweep.objective");
  if (objective == "expectile") {
    c.sweep.objective = Objective::Expectile;
  } else if (objective == "mean") {
    c.sweep.objective = Objective::Mean;
  } else {
    throw ConfigError("sweep.objective must be expectile or mean");
  }
  const Json& ranges = j["sweep"]["ranges"];
  require(ranges.is_object(), "sweep.ranges must be an object");
  const Json defaults = default_config_json();
  for (const auto& [key, spec] : ranges.items()) {
    ParamRange r;
    r.key = key;
    require(key.rfind("env.", 0) != 0 && key.rfind("sweep.", 0) != 0 && key.rfind("report.", 0) != 0,
            "sweep.ranges: '" + key + "' cannot be swept");
    Json probe = defaults;
    set_path(probe, key, 0);  // rejects unknown keys
    if (spec.is_array()) {
      r.choices = spec.get<std::vector<double>>();
      require(!r.choices.empty(), "sweep.ranges." + key + " has no choices");
    } else {
      require(spec.is_object() && spec.contains("lo") && spec.contains("hi"),
              "sweep.ranges." + key + " needs {lo, hi} or a list of choices");
      r.lo = spec.at("lo").get<double>();
      r.hi = spec.at("hi").get<double>();
      r.log = spec.value("log", false);
      r.integer = spec.value("integer", false);
      require(r.lo <= r.hi, "sweep.ranges." + key + ": lo exceeds hi");
      require(!r.log || r.lo > 0.0, "sweep.ranges." + key + ": log ranges need lo > 0");
    }
    c.sweep.ranges.push_back(std::move(r));
  }

  c.report.q_eval = get<std::vector<double>>(j, "report.q_eval");
  require(!c.report.q_eval.empty(), "report.q_eval must be nonempty");
  for (double q : c.report.q_eval) require(q > 0.0 && q < 1.0, "report.q_eval entries must lie in (0,1)");
  c.report.coverage = get<double>(j, "report.coverage");
  require(c.report.coverage > 0.0 && c.report.coverage < 1.0, "report.coverage must lie in (0,1)");
  c.report.resamples = get_count(j, "report.resamples");
  require(c.report.resamples >= 1, "report.resamples must be at least 1");
  c.report.seed = get<std::uint64_t>(j, "report.seed");
  return c;
}

Json config_to_json(const RunConfig& c) {
  Json j = default_config_json();
  j["env"] = {{"source", c.env.source},       {"kind", c.env.kind},       {"rows", c.env.rows},
              {"data_seed", c.env.data_seed}, {"dim", c.env.dim},         {"num_actions", c.env.num_actions},
              {"path", c.env.path},           {"schema", c.env.schema},   {"shuffle", c.env.shuffle},
              {"shuffle_seed", c.env.shuffle_seed}};
  j["q"] = c.q;
  j["algorithm"] = to_string(c.algorithm);
  j["h"] = c.h;
  j["gamma"] = {{"mode", decision::to_string(c.gamma_mode)},
                {"value", c.gamma},
                {"scale", c.gamma_scale},
                {"reg_bound", c.reg_bound ? Json(*c.reg_bound) : Json(nullptr)}};
  j["oracle"] = {{"solver", regression::to_string(c.solver.kind)},
                 {"step_scale", c.solver.step_scale},
                 {"newton_rate", c.solver.newton_rate},
                 {"newton_epsilon", c.solver.newton_epsilon},
                 {"num_frequencies", c.num_frequencies},
                 {"bandwidth", c.bandwidth}};
  j["argmin"] = {{"exact", c.exact_argmin},
                 {"delta", c.delta ? Json(*c.delta) : Json(nullptr)},
                 {"brent_tol", c.brent_tol}};
  j["seed"] = c.seed ? Json(*c.seed) : Json(nullptr);
  j["horizon"] = c.horizon ? Json(*c.horizon) : Json(nullptr);
  Json ranges = Json::object();
  for (const auto& r : c.sweep.ranges) {
    if (!r.choices.empty()) {
      ranges[r.key] = r.choices;
    } else {
      ranges[r.key] = {{"lo", r.lo}, {"hi", r.hi}, {"log", r.log}, {"integer", r.integer}};
    }
  }
  j["sweep"] = {{"trials", c.sweep.trials}, {"objective", to_string(c.sweep.objective)}, {"ranges", ranges}};
  j["report"] = {{"q_eval", c.report.q_eval},
                 {"coverage", c.report.coverage},
                 {"resamples", c.report.resamples},
                 {"seed", c.report.seed}};
  return j;
}

Json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
}

void set_path(Json& config, const std::string& dotted_key, const Json& value) {
  if (dotted_key.empty()) throw ConfigError("empty override key");
  Json* node = &config;
  std::stringstream ss(dotted_key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  const Json defaults = default_config_json();
  const Json* schema = &defaults;
  std::string walked;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    walked += (walked.empty() ? "" : ".") + parts[i];
    const bool under_free_form = walked.rfind("sweep.ranges.", 0) == 0;
    if (schema && !under_free_form) {
      if (!schema->is_object() || !schema->contains(parts[i])) throw ConfigError("unknown config key '" + walked + "'");
      schema = &(*schema)[parts[i]];
    }
    if (i + 1 == parts.size()) {
      (*node)[parts[i]] = value;
    } else {
      if (!node->contains(parts[i]) || !(*node)[parts[i]].is_object()) (*node)[parts[i]] = Json::object();
      node = &(*node)[parts[i]];
    }
  }
}

void apply_override(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  set_path(config, key, value);
}

std::string config_hash(const RunConfig& cfg) { return env::sha256_hex(config_to_json(cfg).dump()); }

std::unique_ptr<env::Environment> build_environment(const RunConfig& cfg) {
  const auto& e = cfg.env;
  if (e.source == "csv") return env::ingest_csv(e.path, env::builtin_schema(e.schema));
  if (e.source == "jsonl") return env::ingest_query_opt(e.path);
  env::SyntheticOptions opt;
  opt.dim = e.dim;
  opt.num_actions = e.num_actions;
  opt.q = cfg.q;
  return env::synthetic_surrogate(env::env_kind_from_string(e.kind), e.rows, e.data_seed, opt);
}

}  // namespace rcb::harness
