#include "riskcb/environments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "riskcb/errors.hpp"

namespace rcb::env {

std::string to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::PricingDiscrete:
      return "pricing_discrete";
    case EnvKind::PricingContinuous:
      return "pricing_continuous";
    case EnvKind::Inventory:
      return "inventory";
    case EnvKind::QueryOpt:
      return "query_opt";
    case EnvKind::Realizable:
      return "realizable";
  }
  return "unknown";
}

EnvKind env_kind_from_string(const std::string& name) {
  if (name == "pricing_discrete") return EnvKind::PricingDiscrete;
  if (name == "pricing_continuous") return EnvKind::PricingContinuous;
  if (name == "inventory") return EnvKind::Inventory;
  if (name == "query_opt") return EnvKind::QueryOpt;
  if (name == "realizable") return EnvKind::Realizable;
  throw std::invalid_argument("unknown environment kind '" + name +
                              "' (expected pricing_discrete, pricing_continuous, inventory, query_opt or realizable)");
}

double profit_discrete(int y, int yhat, double beta) {
  if (y < yhat) return 0.0;
  return 1.0 - beta * static_cast<double>(y - yhat);
}

double profit_price(double y, double yhat) { return yhat <= y ? yhat : 0.0; }

double profit_inventory(double y, double yhat, double beta) { return std::min(y, yhat) - beta * yhat; }

FeatureTable::FeatureTable(std::size_t dim, std::vector<double> data, std::vector<std::string> names)
    : dim_(dim), data_(std::move(data)), names_(std::move(names)) {
  if (dim_ == 0) throw std::invalid_argument("feature table needs at least one column");
  if (data_.size() % dim_ != 0) throw std::invalid_argument("feature data is not a whole number of rows");
  if (!names_.empty() && names_.size() != dim_) throw std::invalid_argument("one name per feature column");
  for (double v : data_) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
  }
}

std::size_t Environment::num_actions(std::size_t) const {
  throw std::logic_error(to_string(kind()) + " has interval actions");
}

std::size_t Environment::max_actions() const {
  throw std::logic_error(to_string(kind()) + " has interval actions");
}

double Environment::label(std::size_t) const { return std::numeric_limits<double>::quiet_NaN(); }

std::optional<std::vector<double>> Environment::true_risk(std::size_t, double) const { return std::nullopt; }

namespace {

void check_rows(std::size_t features, std::size_t targets) {
  if (features != targets) {
    throw std::invalid_argument("feature rows (" + std::to_string(features) + ") and targets (" +
                                std::to_string(targets) + ") differ");
  }
  if (features == 0) throw NoDataError("environment has no rows");
}

double unit_action(const Action& a) {
  const double x = action_point(a);
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("continuous action outside [0,1]");
  return x;
}

}  // namespace

PricingDiscreteEnv::PricingDiscreteEnv(FeatureTable features, std::vector<int> labels, double beta)
    : Environment(std::move(features)), labels_(std::move(labels)), beta_(beta) {
  check_rows(size(), labels_.size());
  for (int y : labels_) {
    if (y < 1 || y > static_cast<int>(kDiscreteLevels)) {
      throw std::invalid_argument("risk level " + std::to_string(y) + " outside 1..8");
    }
  }
}

double PricingDiscreteEnv::reward(std::size_t row, const Action& a) const {
  const std::size_t i = action_index(a);
  if (i >= kDiscreteLevels) throw std::invalid_argument("risk-level action outside 0..7");
  return profit_discrete(labels_.at(row), static_cast<int>(i) + 1, beta_);
}

PricingContinuousEnv::PricingContinuousEnv(FeatureTable features, std::vector<double> prices)
    : Environment(std::move(features)), prices_(std::move(prices)) {
  check_rows(size(), prices_.size());
  for (double y : prices_) {
    if (!(y >= 0.0 && y <= 1.0)) throw std::invalid_argument("normalized price outside [0,1]");
  }
}

double PricingContinuousEnv::reward(std::size_t row, const Action& a) const {
  return profit_price(prices_.at(row), unit_action(a));
}

InventoryEnv::InventoryEnv(FeatureTable features, std::vector<double> demand, double beta)
    : Environment(std::move(features)), demand_(std::move(demand)), beta_(beta) {
  check_rows(size(), demand_.size());
  if (!(beta_ >= 0.0 && beta_ < 1.0)) throw std::invalid_argument("inventory beta must lie in [0,1)");
  for (double y : demand_) {
    if (!(y >= 0.0 && y <= 1.0)) throw std::invalid_argument("normalized demand outside [0,1]");
  }
}

double InventoryEnv::reward(std::size_t row, const Action& a) const {
  return profit_inventory(demand_.at(row), unit_action(a), beta_);
}

QueryOptEnv::QueryOptEnv(FeatureTable features, std::vector<std::vector<double>> rewards)
    : Environment(std::move(features)), rewards_(std::move(rewards)) {
  check_rows(size(), rewards_.size());
  for (const auto& r : rewards_) {
    if (r.size() < 2) throw std::invalid_argument("each query needs at least two configurations");
    for (double v : r) {
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite query reward");
    }
    max_actions_ = std::max(max_actions_, r.size());
  }
}

double QueryOptEnv::reward(std::size_t row, const Action& a) const {
  const auto& r = rewards_.at(row);
  const std::size_t i = action_index(a);
  if (i >= r.size()) throw std::invalid_argument("configuration index outside the query's action list");
  return r[i];
}

RealizableEnv::RealizableEnv(FeatureTable features, std::vector<double> weights, std::size_t num_actions, double q,
                             double noise_scale, std::vector<std::uint8_t> noise_signs)
    : Environment(std::move(features)),
      weights_(std::move(weights)),
      num_actions_(num_actions),
      q_(q),
      noise_scale_(noise_scale),
      noise_signs_(std::move(noise_signs)) {
  if (num_actions_ == 0) throw std::invalid_argument("realizable instance needs actions");
  if (weights_.size() != num_actions_ * context_dim()) throw std::invalid_argument("weight matrix shape mismatch");
  if (noise_signs_.size() != size() * num_actions_) throw std::invalid_argument("noise table shape mismatch");
  if (!(q_ > 0.0 && q_ < 1.0)) throw std::invalid_argument("q must lie in (0,1)");
  if (noise_scale_ * std::max(q_, 1.0 - q_) > 0.25 + 1e-12) {
    throw std::invalid_argument("noise would push losses outside [0,1]");
  }
}

double RealizableEnv::rho(std::size_t row, std::size_t action) const {
  const auto x = context(row);
  const double* w = weights_.data() + action * context_dim();
  double s = 0.5;
  for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * x[j];
  return s;
}

double RealizableEnv::reward(std::size_t row, const Action& a) const {
  const std::size_t i = action_index(a);
  if (i >= num_actions_) throw std::invalid_argument("action outside the instance's action list");
  const bool up = noise_signs_.at(row * num_actions_ + i) != 0;
  const double noise = up ? noise_scale_ * q_ : -noise_scale_ * (1.0 - q_);
  return 1.0 - (rho(row, i) + noise);
}

std::optional<std::vector<double>> RealizableEnv::true_risk(std::size_t row, double q) const {
  if (std::abs(q - q_) > 1e-12) return std::nullopt;
  std::vector<double> out(num_actions_);
  for (std::size_t a = 0; a < num_actions_; ++a) out[a] = rho(row, a);
  return out;
}

// ------------------------------------------------------------------ metrics

namespace {

double chosen_point(const RoundRecord& r) {
  if (const auto* i = std::get_if<std::size_t>(&r.action)) return static_cast<double>(*i + 1);
  return std::get<double>(r.action);
}

}  // namespace

std::map<std::string, std::vector<double>> metric_streams(EnvKind kind, std::span<const RoundRecord> records) {
  if (records.empty()) throw NoDataError("metrics of an empty interaction log");
  std::map<std::string, std::vector<double>> out;
  auto& first = out[kind == EnvKind::Realizable ? "mean_loss" : kind == EnvKind::QueryOpt ? "lift" : "profit"];
  for (const auto& r : records) first.push_back(kind == EnvKind::Realizable ? r.loss : r.reward);

  switch (kind) {
    case EnvKind::PricingDiscrete:
    case EnvKind::PricingContinuous: {
      auto& s = out["no_sale"];
      // Risk levels are compared on the 1..8 scale; prices on [0, 1].
      for (const auto& r : records) s.push_back(chosen_point(r) > r.label ? 1.0 : 0.0);
      break;
    }
    case EnvKind::Inventory: {
      auto& s = out["sold_out"];
      for (const auto& r : records) s.push_back(chosen_point(r) <= r.label ? 1.0 : 0.0);
      break;
    }
    case EnvKind::QueryOpt: {
      auto& frac = out["regression"];
      auto& depth = out["regression_depth"];
      for (const auto& r : records) {
        frac.push_back(r.reward < 0.0 ? 1.0 : 0.0);
        if (r.reward < 0.0) depth.push_back(-r.reward);
      }
      if (depth.empty()) depth.push_back(0.0);
      break;
    }
    case EnvKind::Realizable: {
      auto& s = out["expected_regret"];
      for (const auto& r : records) {
        if (r.expected_regret) s.push_back(*r.expected_regret);
      }
      if (s.empty()) out.erase("expected_regret");
      break;
    }
  }
  return out;
}

std::map<std::string, double> metrics(EnvKind kind, std::span<const RoundRecord> records) {
  std::map<std::string, double> out;
  for (const auto& [name, stream] : metric_streams(kind, records)) {
    double acc = 0.0;
    for (double v : stream) acc += v;
    out[name] = acc / static_cast<double>(stream.size());
  }
  return out;
}

}  // namespace rcb::env
