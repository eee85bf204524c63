#include <algorithm>
#include <functional>
#include <limits>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "riskcb/cli.hpp"
#include "riskcb/decision.hpp"
#include "riskcb/predictor.hpp"
#include "riskcb/random.hpp"
#include "riskcb/risk.hpp"

namespace rcb::cli {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

// Empirical expectile by exhaustive grid search of the asymmetric squared
// objective on [min, max] with the given step. Sorted prefix sums make each
// grid point O(1) amortized.
double grid_expectile(std::vector<double> v, double q, double step) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  std::vector<double> c1(n + 1, 0.0), c2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    c1[i + 1] = c1[i] + v[i];
    c2[i + 1] = c2[i] + v[i] * v[i];
  }
  double best_x = v.front();
  double best = std::numeric_limits<double>::infinity();
  std::size_t k = 0;  // values <= x
  const auto steps = static_cast<std::size_t>(std::ceil((v.back() - v.front()) / step));
  for (std::size_t s = 0; s <= steps; ++s) {
    const double x = std::min(v.front() + step * static_cast<double>(s), v.back());
    while (k < n && v[k] <= x) ++k;
    const double nb = static_cast<double>(k), na = static_cast<double>(n - k);
    const double below = nb * x * x - 2.0 * x * c1[k] + c2[k];
    const double above = (c2[n] - c2[k]) - 2.0 * x * (c1[n] - c1[k]) + na * x * x;
    const double obj = q * below + (1.0 - q) * above;
    if (obj < best) {
      best = obj;
      best_x = x;
    }
  }
  return best_x;
}

SuiteResult expectile_suite(std::uint64_t seed, bool corrupt) {
  Rng rng(seed);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng.index(998);
    std::vector<double> v(n);
    const int shape = static_cast<int>(rng.index(3));
    for (double& x : v) {
      const double u = rng.uniform();
      x = shape == 0 ? u : shape == 1 ? u * u * u : (u < 0.8 ? 0.1 * u : 0.5 + 0.5 * u);
    }
    const double q = 0.05 * static_cast<double>(1 + rng.index(19));
    double solved = risk::expectile_of_sample(v, risk::ExpectileConfig(q));
    if (corrupt) solved += 1e-3;
    worst = std::max(worst, std::abs(solved - grid_expectile(v, q, 1e-5)));
  }
  return {"expectile", worst < 2e-5, "max |bisection - grid| = " + fmt(worst) + " over 200 samples (bar 2e-5)"};
}

SuiteResult indifference_suite(std::uint64_t seed, bool corrupt) {
  Rng rng(seed);
  double worst = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 100; ++trial) {
    // Piecewise-linear fhat through random knots, sampled on a 201-point grid.
    const std::size_t knots = 2 + rng.index(6);
    std::vector<double> kv(knots);
    for (double& y : kv) y = rng.uniform();
    std::vector<double> grid(201);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double pos = static_cast<double>(i) / 200.0 * static_cast<double>(knots - 1);
      const auto j = std::min(static_cast<std::size_t>(pos), knots - 2);
      grid[i] = kv[j] + (pos - static_cast<double>(j)) * (kv[j + 1] - kv[j]);
    }
    const double fmin = *std::min_element(grid.begin(), grid.end());
    const double theta = rng.uniform(0.05, 0.5);
    const double gamma = std::exp(rng.uniform(std::log(1.0), std::log(1000.0)));
    const double h = rng.uniform(0.05, 1.0);
    const decision::ExplorationConfig cfg(gamma, theta);
    std::vector<double> density(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double gap = grid[i] - fmin;
      density[i] = decision::cont_al_density(gap, cfg, h);
      if (corrupt && gap > 0.0) density[i] = std::max(density[i] - 0.05, 1e-6);
    }
    const auto report = decision::verify_indifference(grid, density, fmin, cfg, h);
    worst = std::max(worst, report.max_slack);
  }
  return {"indifference", worst <= decision::kIndifferenceTolerance,
          "max slack " + fmt(worst) + " over 100 instances (bar 1e-9)" + (corrupt ? " [density lowered by 0.05]" : "")};
}

SuiteResult oracle_delta_suite(std::uint64_t seed, bool corrupt) {
  // E_mu[max(0, f(ahat) - f(a))] in closed form for each shape.
  struct Shape {
    const char* name;
    std::function<double(double)> f;
    std::function<double(double)> excess;
  };
  const std::vector<Shape> shapes = {
      {"linear", [](double a) { return a; }, [](double x) { return 0.5 * x * x; }},
      {"quadratic", [](double a) { return (a - 0.3) * (a - 0.3); },
       [](double x) {
         // measure of {a : (a-0.3)^2 < (x-0.3)^2} times the mean gap over it
         const double r = std::abs(x - 0.3);
         const double lo = std::max(0.0, 0.3 - r), hi = std::min(1.0, 0.3 + r);
         auto prim = [](double a) { return (a - 0.3) * (a - 0.3) * (a - 0.3) / 3.0; };
         return r * r * (hi - lo) - (prim(hi) - prim(lo));
       }},
      {"step", [](double a) { return a < 0.6 ? 1.0 : 0.0; }, [](double x) { return x < 0.6 ? 0.4 : 0.0; }},
  };
  Rng rng(seed);
  std::ostringstream detail;
  bool pass = true;
  for (double delta : {0.1, 0.01}) {
    for (const auto& s : shapes) {
      const int reps = 4000;
      double acc = 0.0;
      for (int r = 0; r < reps; ++r) {
        const double d = corrupt ? 1.0 : delta;  // one draw per round breaks the contract
        const double ahat = decision::argmin_sampled(s.f, d, rng);
        acc += s.excess(ahat);
      }
      const double est = acc / reps;
      pass = pass && est <= delta;
      detail << s.name << "@" << delta << "=" << fmt(est) << " ";
    }
  }
  return {"oracle-delta", pass, detail.str()};
}

SuiteResult gradient_suite(std::uint64_t seed) {
  Rng rng(seed);
  const risk::ExpectileConfig cfg(0.3);
  std::ostringstream detail;
  bool pass = true;

  auto probes_for = [&](std::size_t dim, bool finite, std::size_t actions) {
    std::vector<regression::GradientProbe> probes;
    for (int i = 0; i < 40; ++i) {
      regression::GradientProbe p;
      p.x.resize(dim);
      for (double& v : p.x) v = rng.normal();
      if (finite) {
        p.a = static_cast<std::size_t>(rng.index(actions));
      } else {
        p.a = rng.uniform(0.05, 0.95);
      }
      p.v = rng.uniform();
      probes.push_back(std::move(p));
    }
    return probes;
  };
  auto randomize = [&](regression::Predictor& p, double scale) {
    for (Eigen::Index i = 0; i < p.parameters().size(); ++i) p.parameters()[i] = scale * rng.normal();
  };

  regression::LinearModel linear(4, 3);
  randomize(linear, 0.1);
  const auto lin = regression::gradient_check(linear, probes_for(4, true, 3), cfg);
  pass = pass && lin.max_relative_error < 1e-5;
  detail << "linear " << fmt(lin.max_relative_error) << " ";

  for (auto head : {regression::HeadKind::Pricing, regression::HeadKind::Inventory}) {
    regression::PredictorSpec spec;
    spec.head = head;
    spec.input_dim = 3;
    spec.num_frequencies = 16;
    spec.seed = rng.split();
    spec.beta = 1.0 / 3.0;
    regression::HeadModel model(spec);
    randomize(model, 0.3);
    const auto rep = regression::gradient_check(model, probes_for(3, false, 0), cfg);
    pass = pass && rep.max_relative_error < 1e-4 && rep.checked > 0;
    detail << regression::to_string(head) << " " << fmt(rep.max_relative_error) << " (" << rep.checked << " checked, "
           << rep.excluded << " excluded) ";
  }
  return {"gradients", pass, detail.str()};
}

}  // namespace

std::vector<std::string> suite_names() { return {"indifference", "oracle-delta", "expectile", "gradients"}; }

SuiteResult run_suite(const std::string& suite, std::uint64_t seed, bool corrupt) {
  if (suite == "expectile") return expectile_suite(seed, corrupt);
  if (suite == "indifference") return indifference_suite(seed, corrupt);
  if (suite == "oracle-delta") return oracle_delta_suite(seed, corrupt);
  if (suite == "gradients") {
    if (corrupt) throw std::invalid_argument("the gradients suite has no meta-test");
    return gradient_suite(seed);
  }
  throw std::invalid_argument("unknown verify suite '" + suite + "'");
}

}  // namespace rcb::cli
