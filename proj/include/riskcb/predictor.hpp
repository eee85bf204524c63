#pragma once

// Online regression oracles trained on expectile loss.
//
// A Predictor scores (context, action) pairs on the loss scale [0, 1]. It is
// a parameter vector plus a fixed feature map; an OnlineSolver moves the
// parameters one step per observed round.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskcb/features.hpp"
#include "riskcb/heads.hpp"
#include "riskcb/risk.hpp"
#include "riskcb/types.hpp"

namespace rcb::regression {

enum class HeadKind { Linear, Pricing, Inventory };

std::string to_string(HeadKind kind);
HeadKind head_kind_from_string(const std::string& name);

/// Everything needed to rebuild a predictor except its parameters.
struct PredictorSpec {
  HeadKind head = HeadKind::Linear;
  std::size_t input_dim = 0;

  // Linear head: one weight block per action, scored as offset + w_a . x (+ b_a).
  std::size_t num_actions = 0;
  double offset = 0.5;
  bool intercept = true;

  // Pricing / inventory heads: random features feeding two logits.
  std::size_t num_frequencies = 256;
  double bandwidth = 1.0;
  std::uint64_t seed = 0;
  double beta = 0.0;  ///< inventory cost per allocated unit
};

class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual const PredictorSpec& spec() const = 0;
  std::size_t input_dim() const { return spec().input_dim; }

  const Eigen::VectorXd& parameters() const { return params_; }
  Eigen::VectorXd& parameters() { return params_; }

  /// Unclamped score.
  virtual double raw(std::span<const double> x, const Action& a) const = 0;
  /// Gradient of raw() with respect to the parameters, written into out.
  virtual void raw_gradient(std::span<const double> x, const Action& a, Eigen::VectorXd& out) const = 0;

  /// Score clamped to [0, 1].
  double predict(std::span<const double> x, const Action& a) const;

  /// Clamped scores of actions 0..count-1 for a finite action set.
  virtual std::vector<double> predict_all(std::span<const double> x, std::size_t count) const;

  /// Clamped score as a function of a continuous action, with any
  /// per-context work done once.
  virtual std::function<double(double)> bind(std::span<const double> x) const;

  virtual std::unique_ptr<Predictor> clone() const = 0;

 protected:
  Eigen::VectorXd params_;
};

/// Per-action linear model over raw context features.
class LinearModel final : public Predictor {
 public:
  explicit LinearModel(PredictorSpec spec);
  LinearModel(std::size_t input_dim, std::size_t num_actions, double offset = 0.5, bool intercept = true);

  const PredictorSpec& spec() const override { return spec_; }
  double raw(std::span<const double> x, const Action& a) const override;
  void raw_gradient(std::span<const double> x, const Action& a, Eigen::VectorXd& out) const override;
  std::vector<double> predict_all(std::span<const double> x, std::size_t count) const override;
  std::unique_ptr<Predictor> clone() const override { return std::make_unique<LinearModel>(*this); }

 private:
  std::size_t block() const { return spec_.input_dim + (spec_.intercept ? 1 : 0); }
  void check(std::span<const double> x, std::size_t action) const;

  PredictorSpec spec_;
};

/// Random-feature model producing (z0, z1) and inducing a pricing or
/// inventory head. The loss-scale score is the reward head mapped through
/// the environment's reward range.
class HeadModel final : public Predictor {
 public:
  explicit HeadModel(PredictorSpec spec);

  struct Context {
    std::vector<double> phi;  ///< random features with a trailing 1
    double u0 = 0.0, u1 = 0.0;
    ZHead z;
  };

  const PredictorSpec& spec() const override { return spec_; }
  Context context(std::span<const double> x) const;

  /// Reward-scale head value and its (z0, z1) derivatives.
  HeadGradient reward_head(const ZHead& z, double a) const;
  LossAdapter adapter() const;

  double raw(std::span<const double> x, const Action& a) const override;
  void raw_gradient(std::span<const double> x, const Action& a, Eigen::VectorXd& out) const override;
  std::function<double(double)> bind(std::span<const double> x) const override;
  std::unique_ptr<Predictor> clone() const override { return std::make_unique<HeadModel>(*this); }

 private:
  std::size_t row() const { return features_.output_dim() + 1; }

  PredictorSpec spec_;
  CauchyRandomFeatures features_;
};

std::unique_ptr<Predictor> make_predictor(const PredictorSpec& spec);

enum class SolverKind { GradientDescent, OnlineNewton };

std::string to_string(SolverKind kind);
SolverKind solver_kind_from_string(const std::string& name);

struct SolverConfig {
  SolverKind kind = SolverKind::GradientDescent;
  /// Gradient descent step eta_t = step_scale / sqrt(t).
  double step_scale = 0.5;
  /// Online Newton step w -= newton_rate * A_t^{-1} g with A_0 = newton_epsilon * I.
  double newton_rate = 1.0;
  double newton_epsilon = 1.0;
};

class OnlineSolver {
 public:
  OnlineSolver(SolverConfig cfg, std::size_t dim);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
  std::size_t steps() const { return t_; }
  const SolverConfig& config() const { return cfg_; }

 private:
  SolverConfig cfg_;
  std::size_t t_ = 0;
  Eigen::MatrixXd a_inv_;
  Eigen::VectorXd work_;
};

struct UpdateResult {
  double prediction = 0.0;     ///< clamped prediction before the step
  double loss_gradient = 0.0;  ///< d loss / d prediction
  bool clamped = false;        ///< gradient zeroed because the output was clamped
};

/// d/dvhat of (v - vhat)^2.
double squared_loss_grad(double v, double vhat);

/// One solver step on the loss whose derivative at the current prediction is
/// loss_gradient(prediction). Clamped outputs receive a zero gradient.
UpdateResult update_with(Predictor& p, OnlineSolver& solver, std::span<const double> x, const Action& a,
                         const std::function<double(double)>& loss_gradient);

/// One online step on expectile loss at (x, a). Throws std::invalid_argument
/// on non-finite features or a loss outside [0, 1].
UpdateResult update(Predictor& p, OnlineSolver& solver, std::span<const double> x, const Action& a,
                    double observed_loss, const risk::ExpectileConfig& cfg);

/// Cumulative online loss of the oracle and, when known, of a fixed comparator.
class RegretLedger {
 public:
  void record(double oracle_loss, std::optional<double> comparator_loss = std::nullopt);

  double cumulative_oracle_loss() const { return oracle_; }
  std::optional<double> cumulative_comparator_loss() const { return comparator_; }
  /// oracle - comparator; requires a comparator.
  double regret() const;
  std::size_t rounds() const { return rounds_; }

 private:
  double oracle_ = 0.0;
  std::optional<double> comparator_;
  std::size_t rounds_ = 0;
};

struct GradientProbe {
  std::vector<double> x;
  Action a;
  double v = 0.0;  ///< observed loss
};

struct GradientReport {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t excluded = 0;  ///< probes at a clamp boundary or the loss kink
};

/// Compares the analytic expectile-loss gradient through the predictor with
/// central finite differences in every parameter.
GradientReport gradient_check(const Predictor& p, std::span<const GradientProbe> probes,
                              const risk::ExpectileConfig& cfg, double step = 1e-6);

/// Versioned checkpoint: a JSON header naming the head, dimensions and seed,
/// followed by the parameter vector.
inline constexpr int kCheckpointVersion = 1;
void save_predictor(const Predictor& p, std::ostream& out);
std::unique_ptr<Predictor> load_predictor(std::istream& in);

}  // namespace rcb::regression
