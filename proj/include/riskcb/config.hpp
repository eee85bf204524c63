#pragma once

// Declarative run configuration.
//
// A config is a JSON object; every key has a default (see default_config_json)
// and unknown keys are rejected. Overrides use dotted paths, e.g.
// `gamma.mode=doubling` or `env.rows=5000`; the value is parsed as JSON and
// falls back to a string.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "riskcb/decision.hpp"
#include "riskcb/environments.hpp"
#include "riskcb/predictor.hpp"

namespace rcb::harness {

using Json = nlohmann::json;

struct EnvSpec {
  std::string source = "synthetic";  ///< synthetic | csv | jsonl
  std::string kind = "pricing_continuous";  ///< synthetic kind
  std::size_t rows = 20000;                 ///< synthetic row count
  std::uint64_t data_seed = 7;              ///< synthetic generator seed
  std::size_t dim = 0;                      ///< synthetic context dimension (0 = kind default)
  std::size_t num_actions = 5;              ///< realizable kind
  std::string path;                         ///< csv | jsonl
  std::string schema;                       ///< csv schema name
  bool shuffle = false;
  std::uint64_t shuffle_seed = 0;
};

enum class Algorithm { Auto, Finite, Interval };
enum class Objective { Expectile, Mean };

std::string to_string(Algorithm a);
std::string to_string(Objective o);

/// One swept parameter: uniform or log-uniform on [lo, hi], or a uniform
/// pick from `choices` when that list is nonempty.
struct ParamRange {
  std::string key;  ///< dotted config path
  double lo = 0.0;
  double hi = 0.0;
  bool log = false;
  bool integer = false;
  std::vector<double> choices;
};

struct SweepSpec {
  std::size_t trials = 59;
  Objective objective = Objective::Expectile;
  std::vector<ParamRange> ranges;
};

struct ReportOptions {
  std::vector<double> q_eval = {0.01, 0.05, 0.1, 0.2, 0.3, 0.5};
  double coverage = 0.95;
  std::size_t resamples = 1000;
  std::uint64_t seed = 0;
};

struct RunConfig {
  EnvSpec env;
  double q = 0.5;
  Algorithm algorithm = Algorithm::Auto;
  double h = 0.1;

  decision::GammaMode gamma_mode = decision::GammaMode::GammaStar;
  double gamma = 100.0;  ///< fixed mode
  double gamma_scale = 1.0;
  std::optional<double> reg_bound;

  regression::SolverConfig solver;
  std::size_t num_frequencies = 256;
  double bandwidth = 1.0;

  bool exact_argmin = false;
  std::optional<double> delta;  ///< unset: 1 / (4 theta gamma_t)
  double brent_tol = 1e-8;

  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> horizon;  ///< unset: every row

  SweepSpec sweep;
  ReportOptions report;

  std::uint64_t require_seed() const;
};

Json default_config_json();

/// Defaults merged with `user`, validated. Throws ConfigError naming the
/// offending key and constraint.
RunConfig config_from_json(const Json& user);
Json config_to_json(const RunConfig& cfg);

Json load_config_file(const std::string& path);

/// Applies `key=value` to a config object (dotted key).
void apply_override(Json& config, const std::string& assignment);
void set_path(Json& config, const std::string& dotted_key, const Json& value);

/// SHA-256 of the canonical JSON of the resolved config.
std::string config_hash(const RunConfig& cfg);

std::unique_ptr<env::Environment> build_environment(const RunConfig& cfg);

}  // namespace rcb::harness
