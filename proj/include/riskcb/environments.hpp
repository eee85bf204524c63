#pragma once

// Simulation environments: discrete and continuous pricing, inventory and
// query-optimizer replay, plus CSV/JSON-lines ingestion and seeded synthetic
// stand-ins. Environments speak the reward convention; each one carries the
// LossAdapter that maps its reward range onto [0, 1] losses.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskcb/predictor.hpp"
#include "riskcb/record.hpp"
#include "riskcb/types.hpp"

namespace rcb::env {

enum class EnvKind { PricingDiscrete, PricingContinuous, Inventory, QueryOpt, Realizable };

std::string to_string(EnvKind kind);
EnvKind env_kind_from_string(const std::string& name);

inline constexpr double kDiscretePricingBeta = 0.1;
inline constexpr double kInventoryBeta = 1.0 / 3.0;
inline constexpr std::size_t kDiscreteLevels = 8;
/// Fractional-change band for query-optimizer rewards.
inline constexpr double kQueryRewardBound = 1.0;

/// (1 - beta (y - yhat)) 1{y >= yhat} on labels 1..8.
double profit_discrete(int y, int yhat, double beta = kDiscretePricingBeta);
/// yhat 1{y >= yhat}.
double profit_price(double y, double yhat);
/// min(y, yhat) - beta yhat.
double profit_inventory(double y, double yhat, double beta = kInventoryBeta);

/// Row-major context matrix.
class FeatureTable {
 public:
  FeatureTable() = default;
  FeatureTable(std::size_t dim, std::vector<double> data, std::vector<std::string> names = {});

  std::size_t rows() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
  std::vector<std::string> names_;
};

/// An immutable replayable environment. Row t's context and reward function
/// are fixed at construction, so concurrent read-only use is safe.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual EnvKind kind() const = 0;
  std::size_t size() const { return features_.rows(); }
  std::size_t context_dim() const { return features_.dim(); }
  std::span<const double> context(std::size_t row) const { return features_.row(row); }
  const FeatureTable& features() const { return features_; }

  bool finite_actions() const { return kind() != EnvKind::PricingContinuous && kind() != EnvKind::Inventory; }
  /// Actions available at a row (finite environments).
  virtual std::size_t num_actions(std::size_t row) const;
  /// Largest per-row action count (finite environments).
  virtual std::size_t max_actions() const;

  /// Natural-scale reward of playing a at a row.
  virtual double reward(std::size_t row, const Action& a) const = 0;
  virtual LossAdapter adapter() const = 0;
  double loss(std::size_t row, const Action& a) const { return adapter().loss(reward(row, a)); }

  /// Ground truth of a row (label, price or demand); NaN when absent.
  virtual double label(std::size_t row) const;
  /// True per-action loss expectiles at level q when the generator knows them.
  virtual std::optional<std::vector<double>> true_risk(std::size_t row, double q) const;

  /// Predictor head suited to the environment's reward structure.
  virtual regression::HeadKind head() const { return regression::HeadKind::Linear; }
  /// Cost coefficient passed to the inventory head.
  virtual double beta() const { return 0.0; }

  /// Hash of the ingested content, recorded in run manifests.
  const std::string& content_hash() const { return hash_; }
  void set_content_hash(std::string h) { hash_ = std::move(h); }

 protected:
  explicit Environment(FeatureTable features) : features_(std::move(features)) {}

 private:
  FeatureTable features_;
  std::string hash_;
};

/// Risk-level assessment: action i assigns level i + 1 to an applicant with
/// true level y in 1..8.
class PricingDiscreteEnv final : public Environment {
 public:
  PricingDiscreteEnv(FeatureTable features, std::vector<int> labels, double beta = kDiscretePricingBeta);

  EnvKind kind() const override { return EnvKind::PricingDiscrete; }
  std::size_t num_actions(std::size_t) const override { return kDiscreteLevels; }
  std::size_t max_actions() const override { return kDiscreteLevels; }
  double reward(std::size_t row, const Action& a) const override;
  LossAdapter adapter() const override { return {0.0, 1.0}; }
  double label(std::size_t row) const override { return labels_.at(row); }
  double beta() const override { return beta_; }

 private:
  std::vector<int> labels_;
  double beta_;
};

/// Listing price a in [0, 1] sells iff a <= y.
class PricingContinuousEnv final : public Environment {
 public:
  PricingContinuousEnv(FeatureTable features, std::vector<double> prices);

  EnvKind kind() const override { return EnvKind::PricingContinuous; }
  double reward(std::size_t row, const Action& a) const override;
  LossAdapter adapter() const override { return {0.0, 1.0}; }
  double label(std::size_t row) const override { return prices_.at(row); }
  regression::HeadKind head() const override { return regression::HeadKind::Pricing; }

 private:
  std::vector<double> prices_;
};

/// Allocation a in [0, 1] against demand y, paying beta per allocated unit.
class InventoryEnv final : public Environment {
 public:
  InventoryEnv(FeatureTable features, std::vector<double> demand, double beta = kInventoryBeta);

  EnvKind kind() const override { return EnvKind::Inventory; }
  double reward(std::size_t row, const Action& a) const override;
  LossAdapter adapter() const override { return {-beta_, 1.0 - beta_}; }
  double label(std::size_t row) const override { return demand_.at(row); }
  regression::HeadKind head() const override { return regression::HeadKind::Inventory; }
  double beta() const override { return beta_; }

 private:
  std::vector<double> demand_;
  double beta_;
};

/// Replay of per-query fractional-change rewards; each row has 2 or more
/// configurations, action 0 being the default strategy.
class QueryOptEnv final : public Environment {
 public:
  QueryOptEnv(FeatureTable features, std::vector<std::vector<double>> rewards);

  EnvKind kind() const override { return EnvKind::QueryOpt; }
  std::size_t num_actions(std::size_t row) const override { return rewards_.at(row).size(); }
  std::size_t max_actions() const override { return max_actions_; }
  double reward(std::size_t row, const Action& a) const override;
  LossAdapter adapter() const override { return {-kQueryRewardBound, kQueryRewardBound}; }
  const std::vector<double>& rewards(std::size_t row) const { return rewards_.at(row); }

 private:
  std::vector<std::vector<double>> rewards_;
  std::size_t max_actions_ = 0;
};

/// Finite-action instance whose per-action loss expectile is linear in the
/// context: rho(x, a) = 1/2 + w_a . x with |x| = 1 and |w_a| <= 1/4.
/// Loss noise takes +c q or -c (1 - q) with equal probability, so its
/// q-expectile is 0 and rho is the exact conditional expectile at level q.
class RealizableEnv final : public Environment {
 public:
  RealizableEnv(FeatureTable features, std::vector<double> weights, std::size_t num_actions, double q,
                double noise_scale, std::vector<std::uint8_t> noise_signs);

  EnvKind kind() const override { return EnvKind::Realizable; }
  std::size_t num_actions(std::size_t) const override { return num_actions_; }
  std::size_t max_actions() const override { return num_actions_; }
  double reward(std::size_t row, const Action& a) const override;
  LossAdapter adapter() const override { return {0.0, 1.0}; }
  std::optional<std::vector<double>> true_risk(std::size_t row, double q) const override;

  double rho(std::size_t row, std::size_t action) const;
  double q() const { return q_; }

 private:
  std::vector<double> weights_;  ///< num_actions x dim, row-major
  std::size_t num_actions_;
  double q_;
  double noise_scale_;
  std::vector<std::uint8_t> noise_signs_;  ///< rows x num_actions
};

// ---------------------------------------------------------------------------
// Ingestion

/// Column roles of a CSV dataset. Columns not named as target, categorical,
/// date or ignored are parsed as numeric features.
struct DatasetSchema {
  std::string name;
  EnvKind kind = EnvKind::PricingContinuous;
  std::string target;
  std::vector<std::string> categorical;
  std::vector<std::string> dates;
  std::vector<std::string> ignore;
  std::optional<std::size_t> expected_rows;
  /// Min-max the target onto [0, 1] (continuous kinds).
  bool normalize_target = true;
  /// Cap on one-hot columns per categorical; rarer levels share the unseen bucket.
  std::size_t max_levels = 32;
};

/// Built-in schemas: king_county, perth, prudential, dc_bike, london_bike,
/// chicago_bike and the synthetic_* layouts written by `synth`.
const DatasetSchema& builtin_schema(const std::string& name);
std::vector<std::string> builtin_schema_names();

struct IngestSummary {
  std::size_t rows = 0;
  std::size_t feature_dim = 0;
  std::optional<std::size_t> expected_rows;
  std::vector<std::string> feature_names;
  std::string sha256;
  double target_min = 0.0;
  double target_max = 0.0;
  bool row_count_matches() const { return !expected_rows || *expected_rows == rows; }
};

/// Parses and normalizes a CSV file under a schema:
///   numeric columns standardized (missing cells imputed at the mean),
///   categorical columns one-hot with an unseen bucket,
///   date columns expanded to cyclical day-of-week and month features,
///   continuous targets min-max normalized.
/// Rows keep their stored order. Throws IngestError naming row and column.
std::unique_ptr<Environment> ingest_csv(const std::string& path, const DatasetSchema& schema,
                                        IngestSummary* summary = nullptr);

/// JSON-lines replay file, one query per line:
///   {"features": [numbers], "rewards": [numbers, at least 2]}
std::unique_ptr<QueryOptEnv> ingest_query_opt(const std::string& path, IngestSummary* summary = nullptr);

/// Hex SHA-256 of a file's bytes.
std::string file_sha256(const std::string& path);
/// Hex SHA-256 of a string.
std::string sha256_hex(const std::string& bytes);

// ---------------------------------------------------------------------------
// Synthetic stand-ins

struct SyntheticOptions {
  std::size_t dim = 0;          ///< 0 picks the kind's default
  std::size_t num_actions = 5;  ///< realizable kind
  double q = 0.5;               ///< realizable kind: level at which rho is exact
};

/// Seeded stand-in with contexts from a Gaussian mixture and labels, prices
/// or demands from a noisy monotone map of the context. Kinds:
/// pricing_discrete, pricing_continuous, inventory, query_opt, realizable.
std::unique_ptr<Environment> synthetic_surrogate(EnvKind kind, std::size_t rows, std::uint64_t seed,
                                                 const SyntheticOptions& options = {});

/// Probability of a query offering k configurations, k in 2..22.
double query_action_count_pmf(std::size_t k);

/// Writes an environment in the format its ingestion path reads back:
/// CSV (x0.., y) for tabular kinds, JSON-lines for query_opt.
void write_dataset(const Environment& env, const std::string& path);

// ---------------------------------------------------------------------------
// Metrics

/// Per-environment summary of an interaction log:
///   pricing: profit, no_sale
///   inventory: profit, sold_out
///   query_opt: lift, regression, regression_depth
///   realizable: mean_loss, expected_regret
/// Throws NoDataError on an empty stream.
std::map<std::string, double> metrics(EnvKind kind, std::span<const RoundRecord> records);

/// Per-round indicator or value streams behind each metric, used for bootstrap intervals.
std::map<std::string, std::vector<double>> metric_streams(EnvKind kind, std::span<const RoundRecord> records);

}  // namespace rcb::env
