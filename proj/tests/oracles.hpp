#pragma once

// Reference computations used as test oracles. Each one is written from the
// defining formula, without sharing code with the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

/// Sum over the sample of the asymmetric squared objective at x.
inline double expectile_objective(const std::vector<double>& v, double q, double x) {
  double s = 0.0;
  for (double y : v) {
    const double d = y - x;
    s += d > 0.0 ? (1.0 - q) * d * d : q * d * d;
  }
  return s;
}

/// Grid minimizer of the expectile objective on [lo, hi]; O(n) per point.
inline double grid_expectile(const std::vector<double>& v, double q, double lo, double hi, double step) {
  double best_x = lo, best = std::numeric_limits<double>::infinity();
  const auto n = static_cast<long>(std::ceil((hi - lo) / step));
  for (long i = 0; i <= n; ++i) {
    const double x = std::min(lo + step * static_cast<double>(i), hi);
    const double obj = expectile_objective(v, q, x);
    if (obj < best) {
      best = obj;
      best_x = x;
    }
  }
  return best_x;
}

/// Two-point law: value 1 with probability p, 0 otherwise. Solving
/// (1-q) p (1-x) = q (1-p) x gives x = (1-q) p / ((1-q) p + q (1-p)).
inline double bernoulli_expectile(double p, double q) { return (1.0 - q) * p / ((1.0 - q) * p + q * (1.0 - p)); }

/// erf by its Maclaurin series in long double; accurate to ~1e-18 for |x| <= 3.
inline long double erf_series(long double x) {
  long double term = x, sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= -x * x / n;
    const long double add = term / (2 * n + 1);
    sum += add;
    if (std::fabs(add) < 1e-22L) break;
  }
  return 2.0L / std::sqrt(3.14159265358979323846264338327950288L) * sum;
}

/// Composite trapezoid rule with n intervals.
inline double trapezoid(const std::function<double(double)>& f, double a, double b, std::size_t n) {
  const double h = (b - a) / static_cast<double>(n);
  double s = 0.5 * (f(a) + f(b));
  for (std::size_t i = 1; i < n; ++i) s += f(a + h * static_cast<double>(i));
  return s * h;
}

/// E[min(a, P)] - beta a for P ~ Normal(z0, z1^2) truncated to [0, 1].
inline double inventory_by_quadrature(double z0, double z1, double a, double beta, std::size_t n = 1000000) {
  auto dens = [&](double p) { return std::exp(-0.5 * (p - z0) * (p - z0) / (z1 * z1)); };
  const double mass = trapezoid(dens, 0.0, 1.0, n);
  const double num = trapezoid([&](double p) { return std::min(a, p) * dens(p); }, 0.0, 1.0, n);
  return num / mass - beta * a;
}

/// Sup distance between the empirical CDF of draws and a reference CDF.
/// `atom(v)` is the reference mass at v, so the left limit is cdf(v) - atom(v).
inline double kolmogorov(std::vector<double> draws, const std::function<double(double)>& cdf,
                         const std::function<double(double)>& atom = [](double) { return 0.0; }) {
  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  double d = 0.0;
  for (std::size_t i = 0; i < draws.size();) {
    std::size_t j = i;
    while (j < draws.size() && draws[j] == draws[i]) ++j;
    const double f = cdf(draws[i]);
    d = std::max({d, std::abs(f - static_cast<double>(j) / n),
                  std::abs(f - atom(draws[i]) - static_cast<double>(i) / n)});
    i = j;
  }
  return d;
}

}  // namespace oracle
