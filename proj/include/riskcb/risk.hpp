#pragma once

// Expectile loss, the empirical expectile solver and the statistics computed
// from realized reward/loss streams.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rcb::risk {

/// Expectile level q in (0, 1) and its strong-convexity constant.
class ExpectileConfig {
 public:
  explicit ExpectileConfig(double q);

  double q() const { return q_; }
  /// min(q, 1 - q); always in (0, 1/2].
  double theta() const { return theta_; }

 private:
  double q_;
  double theta_;
};

/// Values with optional nonnegative weights (positive total).
class Sample {
 public:
  explicit Sample(std::vector<double> values);
  Sample(std::vector<double> values, std::vector<double> weights);

  std::span<const double> values() const { return values_; }
  std::span<const double> weights() const { return weights_; }
  bool weighted() const { return !weights_.empty(); }
  std::size_t size() const { return values_.size(); }

  double weight(std::size_t i) const { return weights_.empty() ? 1.0 : weights_[i]; }
  double total_weight() const;

 private:
  std::vector<double> values_;
  std::vector<double> weights_;
};

/// (1-q)((v - vhat)_+)^2 + q((vhat - v)_+)^2
double expectile_loss(double v, double vhat, const ExpectileConfig& cfg);

/// Derivative of expectile_loss with respect to vhat.
double expectile_loss_grad(double v, double vhat, const ExpectileConfig& cfg);

/// Absolute tolerance of the bisection solver.
inline constexpr double kExpectileTolerance = 1e-10;

/// Weighted empirical expectile, found by bisection on the first-order
/// condition (1-q) E[(v - x)_+] = q E[(x - v)_+]. The result lies in
/// [min(values), max(values)]. Throws NoDataError on an empty sample.
double expectile_of_sample(const Sample& s, const ExpectileConfig& cfg);

/// Unweighted convenience overload.
double expectile_of_sample(std::span<const double> values, const ExpectileConfig& cfg);

/// Whether larger stream values are better (rewards) or worse (losses).
enum class Orientation { Loss, Reward };

/// Expectile of the realized stream at evaluation level q_eval.
///
/// For Orientation::Loss this is the plain empirical expectile at q_eval.
/// For Orientation::Reward the stream is treated as negated losses, so a
/// risk-averse q_eval < 1/2 reports a value below the mean:
/// -expectile(-stream, q_eval) == expectile(stream, 1 - q_eval).
double realized_marginal_expectile(std::span<const double> stream, double q_eval,
                                   Orientation orientation = Orientation::Loss);

/// A statistic evaluated on a (possibly weighted) sample.
struct Statistic {
  enum class Kind { Mean, Expectile, Fraction };

  Kind kind = Kind::Mean;
  double q = 0.5;  ///< expectile level (Kind::Expectile)
  Orientation orientation = Orientation::Loss;
  /// Kind::Fraction: weighted fraction of values for which the predicate holds.
  std::function<bool(double)> predicate;

  static Statistic mean() { return {}; }
  static Statistic expectile(double q, Orientation o = Orientation::Loss) {
    Statistic s;
    s.kind = Kind::Expectile;
    s.q = q;
    s.orientation = o;
    return s;
  }
  static Statistic fraction(std::function<bool(double)> pred) {
    Statistic s;
    s.kind = Kind::Fraction;
    s.predicate = std::move(pred);
    return s;
  }

  double operator()(const Sample& s) const;
  std::string name() const;
};

double weighted_mean(const Sample& s);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double point = 0.0;  ///< statistic on the full stream

  double width() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool overlaps(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
};

inline constexpr std::size_t kDefaultResamples = 1000;

/// Percentile bootstrap interval of a statistic.
///
/// Each resample draws n indices with replacement; the resample is passed to
/// the statistic as a count-weighted sample. Deterministic given the seed.
Interval bootstrap_ci(std::span<const double> stream, const Statistic& statistic, double coverage,
                      std::size_t resamples, std::uint64_t seed);

}  // namespace rcb::risk
