#pragma once

// Exploration layer: optimization oracles, the inverse-gap-weighted action
// distributions for finite and interval action spaces, and the gamma schedule.
// Everything here works in the loss convention (smaller f is better).

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskcb/random.hpp"
#include "riskcb/types.hpp"

namespace rcb::decision {

using ScalarFunction = std::function<double(double)>;

/// Finite action list (uniform reference measure) or the unit interval with
/// Lebesgue reference measure and smoothing h in (0, 1].
class ActionSpace {
 public:
  static ActionSpace finite(std::size_t count);
  static ActionSpace interval(double h);

  bool is_finite() const { return finite_; }
  std::size_t size() const { return count_; }
  /// Smoothing parameter; 1 / |A| for finite spaces.
  double h() const { return h_; }

 private:
  ActionSpace() = default;
  bool finite_ = true;
  std::size_t count_ = 0;
  double h_ = 1.0;
};

struct ExplorationConfig {
  double gamma = 1.0;
  double theta = 0.5;
  std::optional<std::size_t> horizon;

  ExplorationConfig() = default;
  ExplorationConfig(double gamma, double theta, std::optional<std::size_t> horizon = std::nullopt);
};

/// One sampled action together with its probability (finite), density with
/// respect to the reference measure (interval, accepted branch) or atom mass
/// (interval, returned ahat).
struct ActionDraw {
  Action action;
  double weight = 1.0;
  bool atom = false;
  Action ahat;
};

/// Index of the smallest value; ties go to the lowest index.
std::size_t argmin_exact(std::span<const double> fhat);

/// Empirical argmin over ceil(1/delta) uniform draws on [0, 1].
double argmin_sampled(const ScalarFunction& f, double delta, Rng& rng);
double argmin_sampled(const ScalarFunction& f, double delta, std::uint64_t seed);

/// Number of draws used by argmin_sampled.
std::size_t sampled_oracle_draws(double delta);

/// Minimizer of a unimodal function on [0, 1] by Brent's method, compared
/// against both endpoints. Throws std::runtime_error when the iteration cap
/// is exhausted before the tolerance is met.
double argmin_brent(const ScalarFunction& f, double tol = 1e-8, std::size_t max_iter = 200);

/// Finite-action inverse-gap distribution:
///   p(a) = 1 / (|A| + 4 theta gamma (f(a) - f(ahat)))  for a != ahat,
/// with the remaining mass on ahat. Throws ContractViolation when ahat is
/// not a minimizer of fhat.
std::vector<double> al_distribution(std::span<const double> fhat, std::size_t ahat, const ExplorationConfig& cfg);

/// Draw an index from a probability vector.
std::size_t sample_index(std::span<const double> probs, Rng& rng);

/// dM/dmu(a) = 1 / (1 + 4 theta gamma h max(0, gap)).
double cont_al_density(double gap, const ExplorationConfig& cfg, double h);

/// 1 - M(A), by midpoint quadrature over the unit interval.
double cont_al_atom_mass(const ScalarFunction& f, double ahat, const ExplorationConfig& cfg, double h,
                         std::size_t grid = 512);

/// Exact one-proposal rejection sampler for the interval distribution:
/// a ~ U(0,1), accepted with probability dM/dmu(a), otherwise ahat.
ActionDraw cont_al_sample(const ScalarFunction& f, double ahat, const ActionSpace& space,
                          const ExplorationConfig& cfg, Rng& rng);

/// Fixed-horizon learning rate
///   sqrt(3 T / (h (16 + 12 theta (1 + reg_bound)))).
double gamma_star(double horizon, double h, double theta, double reg_bound);

/// Plug-in online regression regret d log(T) / theta.
double default_reg_bound(std::size_t dim, double horizon, double theta);

enum class GammaMode { Fixed, GammaStar, Doubling };

std::string to_string(GammaMode mode);
GammaMode gamma_mode_from_string(const std::string& name);

/// Per-round learning rate. Fixed returns `gamma`; GammaStar evaluates
/// gamma_star at the known horizon; Doubling restarts gamma_star on epochs
/// of length 2^k, k = floor(log2 t). Both formula modes multiply by `scale`.
/// When reg_bound is unset it follows default_reg_bound(dim, T, theta).
struct GammaSchedule {
  GammaMode mode = GammaMode::Fixed;
  double gamma = 1.0;
  double scale = 1.0;
  std::size_t horizon = 0;
  double h = 1.0;
  double theta = 0.5;
  std::size_t dim = 1;
  std::optional<double> reg_bound;

  double at(std::size_t t) const;
};

struct IndifferenceReport {
  double max_slack = 0.0;  ///< largest value of the inequality's left side
  std::size_t worst_index = 0;
  bool pass = false;
};

inline constexpr double kIndifferenceTolerance = 1e-9;

/// xi(m, z) - z (f(a) + beta) - kappa(a) with the quadratic conjugate
/// phi*(x) = x^2 / (4 theta).
double indifference_expression(double m, double z, double fa, double beta, double kappa, double theta, double gamma);

/// Checks the per-action indifference inequality of the interval
/// distribution on a grid of f values, using
///   beta  = (1 - 2h) / (4 theta gamma h) - f(ahat),
///   kappa = max(0, f(ahat) - f(a)) / h + 1 / (4 theta gamma),
/// maximizing over z in [0, 1/h] on a 1e-3 grid plus the endpoints and the
/// stationary point of the quadratic.
IndifferenceReport verify_indifference(std::span<const double> fhat_grid, double fhat_ahat,
                                       const ExplorationConfig& cfg, double h);

/// Same check with caller-supplied densities (one per grid point).
IndifferenceReport verify_indifference(std::span<const double> fhat_grid, std::span<const double> densities,
                                       double fhat_ahat, const ExplorationConfig& cfg, double h);

}  // namespace rcb::decision
