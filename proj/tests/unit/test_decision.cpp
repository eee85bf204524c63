#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "riskcb/decision.hpp"
#include "riskcb/errors.hpp"
#include "riskcb/heads.hpp"

using namespace rcb;
using namespace rcb::decision;

TEST(ArgminExact, ExamplesAndTies) {
  EXPECT_EQ(argmin_exact(std::vector<double>{0.3, 0.1, 0.5}), 1u);
  EXPECT_EQ(argmin_exact(std::vector<double>{0.2, 0.2, 0.2}), 0u);
  EXPECT_THROW(argmin_exact(std::vector<double>{}), std::invalid_argument);
}

TEST(ArgminExact, AgreesWithLinearScan) {
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> f(1 + rng.index(20));
    for (double& v : f) v = std::round(rng.uniform() * 10.0) / 10.0;  // coarse values force ties
    std::size_t best = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f[i] < f[best]) best = i;
    }
    EXPECT_EQ(argmin_exact(f), best);
  }
}

TEST(ArgminSampled, DrawCountAndConstantFunction) {
  EXPECT_EQ(sampled_oracle_draws(0.01), 100u);
  EXPECT_EQ(sampled_oracle_draws(0.3), 4u);
  EXPECT_THROW(sampled_oracle_draws(0.0), std::invalid_argument);
  const double a = argmin_sampled([](double) { return 0.4; }, 0.1, std::uint64_t{3});
  EXPECT_GE(a, 0.0);
  EXPECT_LE(a, 1.0);
}

TEST(ArgminSampled, LinearFunctionOrderStatistics) {
  // The min of 100 uniforms exceeds 0.05 with probability 0.95^100 < 0.006.
  int small = 0;
  const int seeds = 2000;
  for (int s = 0; s < seeds; ++s) {
    if (argmin_sampled([](double x) { return x; }, 0.01, static_cast<std::uint64_t>(s)) <= 0.05) ++small;
  }
  EXPECT_GE(static_cast<double>(small) / seeds, 0.99);
}

TEST(ArgminSampled, GapContractForLinearFunction) {
  // E_mu[max(0, ahat - a)] = ahat^2 / 2 for f(a) = a.
  Rng rng(4);
  for (double delta : {0.1, 0.01}) {
    double acc = 0.0;
    const int reps = 10000;
    for (int r = 0; r < reps; ++r) {
      const double ahat = argmin_sampled([](double x) { return x; }, delta, rng);
      acc += ahat * ahat / 2.0;
    }
    EXPECT_LE(acc / reps, delta);
  }
}

TEST(ArgminBrent, QuadraticMonotoneAndPricingHead) {
  EXPECT_NEAR(argmin_brent([](double a) { return (a - 0.3) * (a - 0.3); }), 0.3, 1e-8);
  EXPECT_DOUBLE_EQ(argmin_brent([](double a) { return a; }), 0.0);
  EXPECT_DOUBLE_EQ(argmin_brent([](double a) { return -a; }), 1.0);

  const regression::ZHead z{0.5, 0.2};
  auto f = [&](double a) { return -regression::pricing_predictor(z, a); };
  double best = 0.0, best_v = f(0.0);
  for (long i = 1; i <= 1000000; ++i) {
    const double a = 1e-6 * static_cast<double>(i);
    if (f(a) < best_v) {
      best_v = f(a);
      best = a;
    }
  }
  EXPECT_NEAR(argmin_brent(f), best, 1e-5);
}

TEST(ArgminBrent, IterationCapIsAnError) {
  EXPECT_THROW(argmin_brent([](double a) { return std::cos(40 * a); }, 1e-12, 2), std::runtime_error);
}

TEST(AlDistribution, Examples) {
  const auto uniform = al_distribution(std::vector<double>{0.4, 0.4, 0.4, 0.4}, 2, {5.0, 0.3});
  for (double p : uniform) EXPECT_NEAR(p, 0.25, 1e-15);
  const auto two = al_distribution(std::vector<double>{0.0, 1.0}, 0, {1.0, 0.5});
  EXPECT_NEAR(two[1], 0.25, 1e-15);
  EXPECT_NEAR(two[0], 0.75, 1e-15);
}

TEST(AlDistribution, NonMinimizerIsAContractViolation) {
  EXPECT_THROW(al_distribution(std::vector<double>{0.1, 0.3}, 1, {1.0, 0.5}), ContractViolation);
}

TEST(AlDistribution, RandomInstancesAreValid) {
  Rng rng(5);
  for (int t = 0; t < 10000; ++t) {
    std::vector<double> f(1 + rng.index(22));
    for (double& v : f) v = rng.uniform();
    const std::size_t ahat = argmin_exact(f);
    const ExplorationConfig cfg(std::exp(rng.uniform(-3.0, 8.0)), rng.uniform(0.01, 0.5));
    const auto p = al_distribution(f, ahat, cfg);
    const double k = static_cast<double>(f.size());
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
    EXPECT_GE(p[ahat], 1.0 / k - 1e-15);
    for (std::size_t i = 0; i < f.size(); ++i) {
      EXPECT_GT(p[i], 0.0);
      EXPECT_LE(p[i], p[ahat]);
      if (i != ahat) {
        EXPECT_NEAR(p[i], 1.0 / (k + 4.0 * cfg.theta * cfg.gamma * (f[i] - f[ahat])), 1e-15);
        // Finite actions are the interval formula with h = 1/|A| and atoms of mass 1/|A|.
        EXPECT_NEAR(p[i], cont_al_density(f[i] - f[ahat], cfg, 1.0 / k) / k, 1e-15);
      }
    }
  }
}

TEST(AlDistribution, HalfLevelIsSquaredLossInverseGapWeighting) {
  Rng rng(6);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> f(2 + rng.index(10));
    for (double& v : f) v = rng.uniform();
    const std::size_t ahat = argmin_exact(f);
    const double gamma = rng.uniform(0.5, 500.0);
    const auto p = al_distribution(f, ahat, {gamma, 0.5});
    // Squared-loss inverse-gap weighting at rate g: 1 / (K + g gap), g = 2 gamma.
    const double k = static_cast<double>(f.size());
    double rest = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i == ahat) continue;
      const double ref = 1.0 / (k + 2.0 * gamma * (f[i] - f[ahat]));
      rest += ref;
      EXPECT_NEAR(p[i], ref, 1e-12);
    }
    EXPECT_NEAR(p[ahat], 1.0 - rest, 1e-12);
  }
}

TEST(SampleIndex, FollowsProbabilities) {
  Rng rng(7);
  const std::vector<double> p{0.1, 0.6, 0.3};
  std::vector<int> counts(3, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[sample_index(p, rng)];
  for (std::size_t i = 0; i < 3; ++i) {
    const double se = std::sqrt(p[i] * (1 - p[i]) / n);
    EXPECT_NEAR(counts[i] / static_cast<double>(n), p[i], 4 * se);
  }
}

TEST(ContAl, DensityExamplesAndBounds) {
  EXPECT_NEAR(cont_al_density(1.0, {1.0, 0.5}, 1.0), 1.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(cont_al_density(0.0, {7.0, 0.2}, 0.1), 1.0);
  EXPECT_DOUBLE_EQ(cont_al_density(-0.3, {7.0, 0.2}, 0.1), 1.0);
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const double d = cont_al_density(rng.uniform(), {rng.uniform(0.1, 1e4), rng.uniform(0.01, 0.5)}, rng.uniform(0.01, 1.0));
    EXPECT_GT(d, 0.0);
    EXPECT_LE(d, 1.0);
  }
}

TEST(ContAl, ConstantFunctionIsUniformWithoutAtom) {
  Rng rng(9);
  const auto space = ActionSpace::interval(0.2);
  const ExplorationConfig cfg(50.0, 0.3);
  auto f = [](double) { return 0.6; };
  EXPECT_NEAR(cont_al_atom_mass(f, 0.5, cfg, 0.2), 0.0, 1e-15);
  std::vector<double> draws;
  for (int i = 0; i < 20000; ++i) {
    const auto d = cont_al_sample(f, 0.5, space, cfg, rng);
    EXPECT_FALSE(d.atom);
    EXPECT_DOUBLE_EQ(d.weight, 1.0);
    draws.push_back(action_point(d.action));
  }
  EXPECT_LT(oracle::kolmogorov(draws, [](double x) { return x; }), 0.02);
}

TEST(ContAl, LinearFunctionMatchesAnalyticMixture) {
  // f(a) = a, ahat = 0: density 1/(1 + c a) with c = 4 theta gamma h, whose
  // integral is log(1 + c x)/c; the remaining mass sits on 0.
  const double theta = 0.3, gamma = 20.0, h = 0.25;
  const double c = 4.0 * theta * gamma * h;
  const double atom = 1.0 - std::log1p(c) / c;
  const ExplorationConfig cfg(gamma, theta);
  auto f = [](double a) { return a; };
  EXPECT_NEAR(cont_al_atom_mass(f, 0.0, cfg, h), atom, 1e-5);

  Rng rng(10);
  const auto space = ActionSpace::interval(h);
  std::vector<double> draws;
  std::size_t atoms = 0;
  for (int i = 0; i < 100000; ++i) {
    const auto d = cont_al_sample(f, 0.0, space, cfg, rng);
    if (d.atom) {
      ++atoms;
      EXPECT_DOUBLE_EQ(action_point(d.action), 0.0);
    } else {
      EXPECT_NEAR(d.weight, 1.0 / (1.0 + c * action_point(d.action)), 1e-15);
    }
    draws.push_back(action_point(d.action));
  }
  const double ks = oracle::kolmogorov(
      draws, [&](double x) { return atom + std::log1p(c * x) / c; }, [&](double x) { return x == 0.0 ? atom : 0.0; });
  EXPECT_LT(ks, 0.01);
}

TEST(ContAl, TotalMassIsOne) {
  Rng rng(11);
  const double h = 0.1;
  const ExplorationConfig cfg(30.0, 0.25);
  auto f = [](double a) { return 0.5 + 0.4 * std::sin(6.0 * a); };
  const double ahat = argmin_brent(f);
  const int n = 100000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = cont_al_density(f(rng.uniform()) - f(ahat), cfg, h);
    s += d;
    s2 += d * d;
  }
  const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
  const double atom = cont_al_atom_mass(f, ahat, cfg, h);
  EXPECT_GE(atom, 0.0);
  EXPECT_LE(atom, 1.0);
  EXPECT_NEAR(mean + atom, 1.0, 3.0 * se);
}

TEST(ContAl, RequiresIntervalSpace) {
  Rng rng(1);
  EXPECT_THROW(cont_al_sample([](double a) { return a; }, 0.0, ActionSpace::finite(3), {1.0, 0.5}, rng),
               std::invalid_argument);
  EXPECT_THROW(ActionSpace::interval(0.0), std::invalid_argument);
  EXPECT_THROW(ActionSpace::interval(1.5), std::invalid_argument);
  EXPECT_THROW(ExplorationConfig(0.0, 0.5), std::invalid_argument);
}

TEST(GammaStar, ScalingAndBoundMinimizer) {
  EXPECT_NEAR(gamma_star(2e4, 0.1, 0.3, 50.0) / gamma_star(1e4, 0.1, 0.3, 50.0), std::sqrt(2.0), 1e-12);
  // Golden-section minimization of T 3/(4 theta gamma h) + 3 gamma + 3 gamma Reg + 4 gamma / theta.
  const double T = 1e4, h = 0.1, theta = 0.3, reg = 50.0;
  auto bound = [&](double g) { return T * 3.0 / (4.0 * theta * g * h) + 3.0 * g + 3.0 * g * reg + 4.0 * g / theta; };
  double lo = 1e-3, hi = 1e4;
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < 300; ++i) {
    const double a = hi - r * (hi - lo), b = lo + r * (hi - lo);
    (bound(a) < bound(b) ? hi : lo) = bound(a) < bound(b) ? b : a;
  }
  EXPECT_NEAR(gamma_star(T, h, theta, reg), 0.5 * (lo + hi), 1e-6);
  EXPECT_GT(gamma_star(1.0, 1.0, 0.5, 1e-9), 0.0);
  EXPECT_THROW(gamma_star(0.0, 0.1, 0.3, 1.0), std::invalid_argument);
}

TEST(GammaSchedule, Modes) {
  GammaSchedule s;
  s.mode = GammaMode::Fixed;
  s.gamma = 42.0;
  EXPECT_DOUBLE_EQ(s.at(1), 42.0);
  EXPECT_DOUBLE_EQ(s.at(1000), 42.0);

  s.mode = GammaMode::GammaStar;
  s.horizon = 5000;
  s.h = 0.2;
  s.theta = 0.3;
  s.dim = 11;
  const double reg = 11.0 * std::log(5000.0) / 0.3;
  EXPECT_NEAR(default_reg_bound(11, 5000.0, 0.3), reg, 1e-12);
  EXPECT_NEAR(s.at(7), gamma_star(5000.0, 0.2, 0.3, reg), 1e-12);
  s.scale = 3.0;
  EXPECT_NEAR(s.at(7), 3.0 * gamma_star(5000.0, 0.2, 0.3, reg), 1e-12);

  s.mode = GammaMode::Doubling;
  s.scale = 1.0;
  s.reg_bound = 10.0;
  EXPECT_NEAR(s.at(1), gamma_star(1.0, 0.2, 0.3, 10.0), 1e-12);
  EXPECT_NEAR(s.at(5), gamma_star(4.0, 0.2, 0.3, 10.0), 1e-12);
  EXPECT_NEAR(s.at(8), gamma_star(8.0, 0.2, 0.3, 10.0), 1e-12);
  EXPECT_NEAR(s.at(15), gamma_star(8.0, 0.2, 0.3, 10.0), 1e-12);
  EXPECT_EQ(gamma_mode_from_string(to_string(GammaMode::Doubling)), GammaMode::Doubling);
  EXPECT_THROW(gamma_mode_from_string("anytime"), std::invalid_argument);
}

TEST(Indifference, ConstantFunctionPasses) {
  const std::vector<double> grid(101, 0.3);
  const auto r = verify_indifference(grid, 0.3, {25.0, 0.2}, 0.1);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.max_slack, 0.0 + kIndifferenceTolerance);
}

namespace {

struct Instance {
  std::vector<double> grid;
  double fmin;
  ExplorationConfig cfg;
  double h;
};

Instance random_instance(Rng& rng) {
  std::vector<double> knots(2 + rng.index(6));
  for (double& y : knots) y = rng.uniform();
  Instance in;
  in.grid.resize(201);
  for (std::size_t i = 0; i < in.grid.size(); ++i) {
    const double pos = static_cast<double>(i) / 200.0 * static_cast<double>(knots.size() - 1);
    const auto j = std::min(static_cast<std::size_t>(pos), knots.size() - 2);
    in.grid[i] = knots[j] + (pos - static_cast<double>(j)) * (knots[j + 1] - knots[j]);
  }
  in.fmin = *std::min_element(in.grid.begin(), in.grid.end());
  in.cfg = ExplorationConfig(std::exp(rng.uniform(0.0, std::log(1000.0))), rng.uniform(0.05, 0.5));
  in.h = rng.uniform(0.05, 1.0);
  return in;
}

}  // namespace

TEST(Indifference, RandomPiecewiseLinearInstancesPass) {
  Rng rng(12);
  for (int t = 0; t < 100; ++t) {
    const auto in = random_instance(rng);
    const auto r = verify_indifference(in.grid, in.fmin, in.cfg, in.h);
    EXPECT_TRUE(r.pass) << "slack " << r.max_slack;
  }
}

TEST(Indifference, LoweredDensityFails) {
  // The inequality bounds the density from below where gaps are positive.
  Rng rng(13);
  int failures = 0;
  for (int t = 0; t < 100; ++t) {
    const auto in = random_instance(rng);
    std::vector<double> dens(in.grid.size());
    bool any_gap = false;
    for (std::size_t i = 0; i < dens.size(); ++i) {
      const double gap = in.grid[i] - in.fmin;
      dens[i] = cont_al_density(gap, in.cfg, in.h);
      if (gap > 0.0) {
        dens[i] = std::max(dens[i] - 0.05, 1e-6);
        any_gap = true;
      }
    }
    if (!any_gap) continue;
    if (!verify_indifference(in.grid, dens, in.fmin, in.cfg, in.h).pass) ++failures;
  }
  EXPECT_EQ(failures, 100);
}

TEST(Indifference, RaisedDensityStillSatisfiesTheInequality) {
  // Only a lower bound on the density is implied, so raising it keeps the check green.
  Rng rng(14);
  for (int t = 0; t < 50; ++t) {
    const auto in = random_instance(rng);
    std::vector<double> dens(in.grid.size());
    for (std::size_t i = 0; i < dens.size(); ++i) {
      dens[i] = std::min(1.0, cont_al_density(in.grid[i] - in.fmin, in.cfg, in.h) + 0.05);
    }
    EXPECT_TRUE(verify_indifference(in.grid, dens, in.fmin, in.cfg, in.h).pass);
  }
}
