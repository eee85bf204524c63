#include "riskcb/decision.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "riskcb/errors.hpp"

namespace rcb::decision {

ActionSpace ActionSpace::finite(std::size_t count) {
  if (count == 0) throw std::invalid_argument("finite action space must be nonempty");
  ActionSpace s;
  s.finite_ = true;
  s.count_ = count;
  s.h_ = 1.0 / static_cast<double>(count);
  return s;
}

ActionSpace ActionSpace::interval(double h) {
  if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("smoothing h must lie in (0,1]");
  ActionSpace s;
  s.finite_ = false;
  s.h_ = h;
  return s;
}

ExplorationConfig::ExplorationConfig(double gamma_, double theta_, std::optional<std::size_t> horizon_)
    : gamma(gamma_), theta(theta_), horizon(horizon_) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!(theta > 0.0 && theta <= 0.5)) throw std::invalid_argument("theta must lie in (0, 1/2]");
}

std::size_t argmin_exact(std::span<const double> fhat) {
  if (fhat.empty()) throw std::invalid_argument("argmin over an empty action list");
  std::size_t best = 0;
  for (std::size_t i = 1; i < fhat.size(); ++i) {
    if (fhat[i] < fhat[best]) best = i;
  }
  return best;
}

std::size_t sampled_oracle_draws(double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("oracle delta must be positive");
  return static_cast<std::size_t>(std::ceil(1.0 / delta));
}

double argmin_sampled(const ScalarFunction& f, double delta, Rng& rng) {
  const std::size_t n = sampled_oracle_draws(delta);
  double best_a = rng.uniform();
  double best_f = f(best_a);
  for (std::size_t i = 1; i < n; ++i) {
    const double a = rng.uniform();
    const double v = f(a);
    if (v < best_f) {
      best_f = v;
      best_a = a;
    }
  }
  return best_a;
}

double argmin_sampled(const ScalarFunction& f, double delta, std::uint64_t seed) {
  Rng rng(seed);
  return argmin_sampled(f, delta, rng);
}

double argmin_brent(const ScalarFunction& f, double tol, std::size_t max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("Brent tolerance must be positive");
  const int bits = static_cast<int>(std::ceil(1.0 - std::log2(tol)));
  boost::uintmax_t iterations = max_iter;
  const auto [x, fx] = boost::math::tools::brent_find_minima(f, 0.0, 1.0, bits, iterations);
  if (iterations >= max_iter) {
    throw std::runtime_error("Brent minimization did not reach tolerance within " + std::to_string(max_iter) +
                             " iterations");
  }
  double best = x;
  double best_f = fx;
  for (double end : {0.0, 1.0}) {
    const double v = f(end);
    if (v < best_f) {
      best_f = v;
      best = end;
    }
  }
  return best;
}

std::vector<double> al_distribution(std::span<const double> fhat, std::size_t ahat, const ExplorationConfig& cfg) {
  if (fhat.empty()) throw std::invalid_argument("empty action list");
  if (ahat >= fhat.size()) throw ContractViolation("ahat outside the action list");
  const double best = fhat[ahat];
  for (double v : fhat) {
    if (v < best) throw ContractViolation("ahat is not a minimizer of fhat");
  }
  const double k = static_cast<double>(fhat.size());
  const double rate = 4.0 * cfg.theta * cfg.gamma;
  std::vector<double> p(fhat.size());
  double others = 0.0;
  for (std::size_t a = 0; a < fhat.size(); ++a) {
    if (a == ahat) continue;
    p[a] = 1.0 / (k + rate * (fhat[a] - best));
    others += p[a];
  }
  p[ahat] = 1.0 - others;
  return p;
}

std::size_t sample_index(std::span<const double> probs, Rng& rng) {
  if (probs.empty()) throw std::invalid_argument("sampling from an empty distribution");
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  // Rounding left u above the running total; fall back to the last action with mass.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return i;
  }
  return probs.size() - 1;
}

double cont_al_density(double gap, const ExplorationConfig& cfg, double h) {
  return 1.0 / (1.0 + 4.0 * cfg.theta * cfg.gamma * h * std::max(0.0, gap));
}

double cont_al_atom_mass(const ScalarFunction& f, double ahat, const ExplorationConfig& cfg, double h,
                         std::size_t grid) {
  const double base = f(ahat);
  double mass = 0.0;
  for (std::size_t i = 0; i < grid; ++i) {
    const double a = (static_cast<double>(i) + 0.5) / static_cast<double>(grid);
    mass += cont_al_density(f(a) - base, cfg, h);
  }
  return std::clamp(1.0 - mass / static_cast<double>(grid), 0.0, 1.0);
}

ActionDraw cont_al_sample(const ScalarFunction& f, double ahat, const ActionSpace& space,
                          const ExplorationConfig& cfg, Rng& rng) {
  if (space.is_finite()) throw std::invalid_argument("interval sampler needs an interval action space");
  const double proposal = rng.uniform();
  const double u = rng.uniform();
  const double density = cont_al_density(f(proposal) - f(ahat), cfg, space.h());
  ActionDraw draw;
  draw.ahat = ahat;
  if (u < density) {
    draw.action = proposal;
    draw.weight = density;
    draw.atom = false;
  } else {
    draw.action = ahat;
    draw.weight = std::max(cont_al_atom_mass(f, ahat, cfg, space.h()), std::numeric_limits<double>::min());
    draw.atom = true;
  }
  return draw;
}

double gamma_star(double horizon, double h, double theta, double reg_bound) {
  if (!(horizon > 0.0 && h > 0.0 && theta > 0.0 && reg_bound > 0.0)) {
    throw std::invalid_argument("gamma_star inputs must be positive");
  }
  return std::sqrt(3.0 * horizon / (h * (16.0 + 12.0 * theta * (1.0 + reg_bound))));
}

double default_reg_bound(std::size_t dim, double horizon, double theta) {
  // log(T) is floored at 1 so very short epochs keep a positive bound.
  return static_cast<double>(dim) * std::max(std::log(horizon), 1.0) / theta;
}

std::string to_string(GammaMode mode) {
  switch (mode) {
    case GammaMode::Fixed:
      return "fixed";
    case GammaMode::GammaStar:
      return "gamma_star";
    case GammaMode::Doubling:
      return "doubling";
  }
  return "unknown";
}

GammaMode gamma_mode_from_string(const std::string& name) {
  if (name == "fixed") return GammaMode::Fixed;
  if (name == "gamma_star") return GammaMode::GammaStar;
  if (name == "doubling") return GammaMode::Doubling;
  throw std::invalid_argument("unknown gamma mode '" + name + "' (expected fixed, gamma_star or doubling)");
}

double GammaSchedule::at(std::size_t t) const {
  auto formula = [&](double horizon) {
    const double reg = reg_bound.value_or(default_reg_bound(dim, horizon, theta));
    return scale * gamma_star(horizon, h, theta, reg);
  };
  switch (mode) {
    case GammaMode::Fixed:
      return gamma;
    case GammaMode::GammaStar:
      if (horizon == 0) throw std::invalid_argument("gamma_star mode needs a known horizon");
      return formula(static_cast<double>(horizon));
    case GammaMode::Doubling: {
      const std::size_t round = std::max<std::size_t>(t, 1);
      const int k = static_cast<int>(std::floor(std::log2(static_cast<double>(round))));
      return formula(std::ldexp(1.0, k));
    }
  }
  throw std::logic_error("unknown gamma mode");
}

double indifference_expression(double m, double z, double fa, double beta, double kappa, double theta,
                               double gamma) {
  const double k = 1.0 / (4.0 * theta * gamma);
  // (1-m) gamma phi*(-1/gamma) + m gamma phi*((z/m - 1)/gamma) with phi*(x) = x^2/(4 theta)
  const double xi = (1.0 - m) * k + k * (z - m) * (z - m) / m;
  return xi - z * (fa + beta) - kappa;
}

IndifferenceReport verify_indifference(std::span<const double> fhat_grid, std::span<const double> densities,
                                       double fhat_ahat, const ExplorationConfig& cfg, double h) {
  if (fhat_grid.size() != densities.size()) throw std::invalid_argument("one density per grid point required");
  if (fhat_grid.empty()) throw std::invalid_argument("empty grid");
  const double k = 1.0 / (4.0 * cfg.theta * cfg.gamma);
  const double beta = (1.0 - 2.0 * h) * k / h - fhat_ahat;
  const double z_max = 1.0 / h;
  const auto steps = static_cast<std::size_t>(std::floor(z_max / 1e-3));

  IndifferenceReport report;
  report.max_slack = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < fhat_grid.size(); ++i) {
    const double fa = fhat_grid[i];
    const double m = densities[i];
    const double kappa = std::max(0.0, fhat_ahat - fa) / h + k;
    auto eval = [&](double z) { return indifference_expression(m, z, fa, beta, kappa, cfg.theta, cfg.gamma); };

    double worst = std::max(eval(0.0), eval(z_max));
    for (std::size_t s = 1; s < steps; ++s) worst = std::max(worst, eval(1e-3 * static_cast<double>(s)));
    // Stationary point of the quadratic in z.
    const double vertex = m + m * (fa + beta) / (2.0 * k);
    if (vertex > 0.0 && vertex < z_max) worst = std::max(worst, eval(vertex));

    if (worst > report.max_slack) {
      report.max_slack = worst;
      report.worst_index = i;
    }
  }
  report.pass = report.max_slack <= kIndifferenceTolerance;
  return report;
}

IndifferenceReport verify_indifference(std::span<const double> fhat_grid, double fhat_ahat,
                                       const ExplorationConfig& cfg, double h) {
  std::vector<double> densities(fhat_grid.size());
  for (std::size_t i = 0; i < fhat_grid.size(); ++i) {
    densities[i] = cont_al_density(fhat_grid[i] - fhat_ahat, cfg, h);
  }
  return verify_indifference(fhat_grid, densities, fhat_ahat, cfg, h);
}

}  // namespace rcb::decision
