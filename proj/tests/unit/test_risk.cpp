#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "riskcb/errors.hpp"
#include "riskcb/random.hpp"
#include "riskcb/risk.hpp"

using namespace rcb;
using risk::ExpectileConfig;

TEST(ExpectileLoss, Examples) {
  EXPECT_DOUBLE_EQ(risk::expectile_loss(1.0, 1.0, ExpectileConfig(0.3)), 0.0);
  EXPECT_DOUBLE_EQ(risk::expectile_loss(1.0, 0.0, ExpectileConfig(0.2)), 0.8);
  EXPECT_DOUBLE_EQ(risk::expectile_loss(0.0, 1.0, ExpectileConfig(0.2)), 0.2);
}

TEST(ExpectileLoss, GradientExamples) {
  EXPECT_DOUBLE_EQ(risk::expectile_loss_grad(0.4, 0.4, ExpectileConfig(0.2)), 0.0);
  EXPECT_DOUBLE_EQ(risk::expectile_loss_grad(1.0, 0.0, ExpectileConfig(0.2)), -1.6);
}

TEST(ExpectileLoss, GradientMatchesCentralDifference) {
  Rng rng(11);
  const double step = 1e-5;
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(), vhat = rng.uniform(), q = rng.uniform(0.01, 0.99);
    if (std::abs(v - vhat) < 10 * step) continue;  // kink
    const ExpectileConfig cfg(q);
    const double fd =
        (risk::expectile_loss(v, vhat + step, cfg) - risk::expectile_loss(v, vhat - step, cfg)) / (2 * step);
    EXPECT_NEAR(risk::expectile_loss_grad(v, vhat, cfg), fd, 1e-6);
    EXPECT_LE(std::abs(risk::expectile_loss_grad(v, vhat, cfg)),
              2.0 * std::max(q, 1.0 - q) * std::abs(v - vhat) + 1e-15);
    ++checked;
  }
  EXPECT_GT(checked, 950);
}

TEST(ExpectileLoss, NonnegativeAndZeroOnlyAtTarget) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const double v = rng.uniform(), vhat = rng.uniform();
    const ExpectileConfig cfg(rng.uniform(0.05, 0.95));
    EXPECT_GT(risk::expectile_loss(v, vhat, cfg), 0.0);
    EXPECT_EQ(risk::expectile_loss(v, v, cfg), 0.0);
  }
}

TEST(ExpectileConfig, RejectsLevelsOutsideUnitInterval) {
  EXPECT_THROW(ExpectileConfig(0.0), std::invalid_argument);
  EXPECT_THROW(ExpectileConfig(1.0), std::invalid_argument);
  EXPECT_DOUBLE_EQ(ExpectileConfig(0.8).theta(), 0.2);
}

TEST(ExpectileOfSample, Examples) {
  const std::vector<double> v{0.0, 1.0};
  EXPECT_NEAR(risk::expectile_of_sample(v, ExpectileConfig(0.5)), 0.5, 1e-10);
  EXPECT_NEAR(risk::expectile_of_sample(v, ExpectileConfig(0.2)), oracle::bernoulli_expectile(0.5, 0.2), 1e-10);
  EXPECT_NEAR(oracle::bernoulli_expectile(0.5, 0.2), 0.8, 1e-15);
}

TEST(ExpectileOfSample, HalfLevelIsWeightedMean) {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> v(1 + rng.index(300)), w(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = rng.normal();
      w[i] = rng.uniform(0.1, 2.0);
    }
    const double mean = std::inner_product(v.begin(), v.end(), w.begin(), 0.0) / std::accumulate(w.begin(), w.end(), 0.0);
    EXPECT_NEAR(risk::expectile_of_sample(risk::Sample(v, w), ExpectileConfig(0.5)), mean, 1e-9);
  }
}

TEST(ExpectileOfSample, WeightedTwoPointLaw) {
  // Weights {1, 3} on {0, 1} are the law with P(1) = 3/4.
  const risk::Sample s({0.0, 1.0}, {1.0, 3.0});
  for (double q : {0.1, 0.3, 0.7}) {
    EXPECT_NEAR(risk::expectile_of_sample(s, ExpectileConfig(q)), oracle::bernoulli_expectile(0.75, q), 1e-9);
  }
}

TEST(ExpectileOfSample, EmptySampleSignalsNoData) {
  EXPECT_THROW(risk::expectile_of_sample(std::vector<double>{}, ExpectileConfig(0.3)), NoDataError);
  EXPECT_THROW(risk::realized_marginal_expectile(std::vector<double>{}, 0.3), NoDataError);
}

TEST(ExpectileOfSample, AgreesWithGridMinimization) {
  Rng rng(21);
  for (int t = 0; t < 12; ++t) {
    std::vector<double> v(3 + rng.index(120));
    for (double& x : v) x = rng.uniform();
    const double q = 0.05 * static_cast<double>(1 + rng.index(19));
    const double lo = *std::min_element(v.begin(), v.end()), hi = *std::max_element(v.begin(), v.end());
    EXPECT_NEAR(risk::expectile_of_sample(v, ExpectileConfig(q)), oracle::grid_expectile(v, q, lo, hi, 1e-5), 2e-5);
  }
}

TEST(ExpectileOfSample, LargeSamplePathMatchesSmallSamplePath) {
  // Samples above 64 values use the sorted prefix-sum search; duplicating a
  // small sample keeps the expectile while switching paths.
  Rng rng(8);
  for (int t = 0; t < 30; ++t) {
    std::vector<double> small(5 + rng.index(40));
    for (double& x : small) x = rng.normal();
    std::vector<double> big;
    for (int k = 0; k < 4; ++k) big.insert(big.end(), small.begin(), small.end());
    const ExpectileConfig cfg(rng.uniform(0.05, 0.95));
    EXPECT_NEAR(risk::expectile_of_sample(small, cfg), risk::expectile_of_sample(big, cfg), 1e-9);
  }
}

TEST(ExpectileProperties, TranslationHomogeneityAndBounds) {
  Rng rng(31);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> v(1 + rng.index(200));
    for (double& x : v) x = rng.normal(0.0, 2.0);
    const ExpectileConfig cfg(rng.uniform(0.05, 0.95));
    const double e = risk::expectile_of_sample(v, cfg);
    const double c = rng.uniform(-5.0, 5.0), k = rng.uniform(0.1, 10.0);
    std::vector<double> shifted(v), scaled(v);
    for (double& x : shifted) x += c;
    for (double& x : scaled) x *= k;
    EXPECT_NEAR(risk::expectile_of_sample(shifted, cfg), e + c, 1e-8);
    EXPECT_NEAR(risk::expectile_of_sample(scaled, cfg), k * e, 1e-8 * std::max(1.0, k));
    EXPECT_GE(e, *std::min_element(v.begin(), v.end()));
    EXPECT_LE(e, *std::max_element(v.begin(), v.end()));
  }
}

TEST(ExpectileProperties, OrderedInLevel) {
  // The level q weights overprediction, so the solution moves down as q grows.
  Rng rng(41);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> v(2 + rng.index(100));
    for (double& x : v) x = rng.uniform();
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 9; ++k) {
      const double e = risk::expectile_of_sample(v, ExpectileConfig(0.1 * k));
      EXPECT_LE(e, prev + 1e-10);
      prev = e;
    }
  }
}

TEST(ExpectileProperties, StrongConvexityAroundTheExpectile) {
  Rng rng(51);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> v(1 + rng.index(50));
    for (double& x : v) x = rng.uniform();
    const ExpectileConfig cfg(rng.uniform(0.05, 0.95));
    const double star = risk::expectile_of_sample(v, cfg);
    auto avg = [&](double x) {
      double s = 0.0;
      for (double y : v) s += risk::expectile_loss(y, x, cfg);
      return s / static_cast<double>(v.size());
    };
    for (int j = 0; j < 10; ++j) {
      const double x = rng.uniform();
      EXPECT_GE(avg(x) - avg(star), cfg.theta() * (x - star) * (x - star) - 1e-12);
    }
  }
}

TEST(RealizedMarginalExpectile, Examples) {
  EXPECT_NEAR(risk::realized_marginal_expectile(std::vector<double>(17, 0.37), 0.1), 0.37, 1e-12);
  std::vector<double> alt;
  for (int i = 0; i < 100; ++i) alt.push_back(i % 2);
  EXPECT_NEAR(risk::realized_marginal_expectile(alt, 0.2), 0.8, 1e-9);
  // Reward orientation: a risk-averse level reports below the mean.
  EXPECT_NEAR(risk::realized_marginal_expectile(alt, 0.2, risk::Orientation::Reward), 0.2, 1e-9);
}

TEST(RealizedMarginalExpectile, RewardCurveIsMonotoneAndMatchesGrid) {
  Rng rng(61);
  std::vector<double> stream(400);
  for (double& x : stream) x = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.3, 1.0);
  double prev = -1.0;
  for (double qe : {0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9}) {
    const double e = risk::realized_marginal_expectile(stream, qe, risk::Orientation::Reward);
    // Reward orientation at q_eval is the plain expectile at 1 - q_eval.
    EXPECT_NEAR(e, oracle::grid_expectile(stream, 1.0 - qe, 0.0, 1.0, 1e-4), 1e-4);
    EXPECT_GE(e, prev);
    prev = e;
  }
}

TEST(Bootstrap, ConstantStreamHasZeroWidth) {
  const std::vector<double> s(500, 0.25);
  const auto ci = risk::bootstrap_ci(s, risk::Statistic::mean(), 0.95, 200, 1);
  EXPECT_DOUBLE_EQ(ci.lo, 0.25);
  EXPECT_DOUBLE_EQ(ci.hi, 0.25);
  EXPECT_DOUBLE_EQ(ci.width(), 0.0);
}

TEST(Bootstrap, MeanIntervalBracketsSampleMean) {
  Rng rng(71);
  std::vector<double> s(10000);
  for (double& x : s) x = rng.uniform();
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
  const auto ci = risk::bootstrap_ci(s, risk::Statistic::mean(), 0.95, 1000, 2);
  EXPECT_TRUE(ci.contains(mean));
  EXPECT_NEAR(ci.point, mean, 1e-12);
}

TEST(Bootstrap, DeterministicGivenSeed) {
  Rng rng(81);
  std::vector<double> s(3000);
  for (double& x : s) x = rng.normal();
  for (const auto& stat : {risk::Statistic::mean(), risk::Statistic::expectile(0.2, risk::Orientation::Reward),
                           risk::Statistic::fraction([](double x) { return x < 0.0; })}) {
    const auto a = risk::bootstrap_ci(s, stat, 0.9, 300, 99);
    const auto b = risk::bootstrap_ci(s, stat, 0.9, 300, 99);
    EXPECT_EQ(a.lo, b.lo);
    EXPECT_EQ(a.hi, b.hi);
    EXPECT_TRUE(a.contains(a.point));
  }
}

TEST(Bootstrap, RejectsBadInputs) {
  EXPECT_THROW(risk::bootstrap_ci(std::vector<double>{}, risk::Statistic::mean(), 0.95, 10, 0), NoDataError);
  EXPECT_THROW(risk::bootstrap_ci(std::vector<double>{1.0}, risk::Statistic::mean(), 1.0, 10, 0),
               std::invalid_argument);
}

TEST(Statistic, FractionCountsPredicate) {
  const risk::Sample s({-1.0, 0.5, -0.2, 2.0});
  EXPECT_DOUBLE_EQ(risk::Statistic::fraction([](double x) { return x < 0.0; })(s), 0.5);
  EXPECT_DOUBLE_EQ(risk::weighted_mean(s), 0.325);
}
