#include "riskcb/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "riskcb/errors.hpp"
#include "riskcb/random.hpp"

namespace rcb::risk {

ExpectileConfig::ExpectileConfig(double q) : q_(q), theta_(std::min(q, 1.0 - q)) {
  if (!(q > 0.0 && q < 1.0)) {
    throw std::invalid_argument("expectile level q must lie in (0,1), got " + std::to_string(q));
  }
}

Sample::Sample(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw NoDataError("sample is empty");
}

Sample::Sample(std::vector<double> values, std::vector<double> weights)
    : values_(std::move(values)), weights_(std::move(weights)) {
  if (values_.empty()) throw NoDataError("sample is empty");
  if (weights_.size() != values_.size()) {
    throw std::invalid_argument("sample weights must match values in length");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw std::invalid_argument("sample weights must be nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("sample weights must have a positive total");
}

double Sample::total_weight() const {
  if (weights_.empty()) return static_cast<double>(values_.size());
  double total = 0.0;
  for (double w : weights_) total += w;
  return total;
}

double expectile_loss(double v, double vhat, const ExpectileConfig& cfg) {
  const double under = std::max(v - vhat, 0.0);
  const double over = std::max(vhat - v, 0.0);
  return (1.0 - cfg.q()) * under * under + cfg.q() * over * over;
}

double expectile_loss_grad(double v, double vhat, const ExpectileConfig& cfg) {
  const double under = std::max(v - vhat, 0.0);
  const double over = std::max(vhat - v, 0.0);
  return -2.0 * (1.0 - cfg.q()) * under + 2.0 * cfg.q() * over;
}

namespace {

// q E[(x - v)_+] - (1 - q) E[(v - x)_+], unnormalized. Nondecreasing in x.
double first_order_condition(const Sample& s, double x, double q) {
  double above = 0.0;
  double below = 0.0;
  const auto values = s.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = s.weight(i);
    if (w == 0.0) continue;
    const double d = x - values[i];
    if (d > 0.0) {
      below += w * d;
    } else {
      above -= w * d;
    }
  }
  return q * below - (1.0 - q) * above;
}

}  // namespace

double expectile_of_sample(const Sample& s, const ExpectileConfig& cfg) {
  const auto values = s.values();
  // Small samples: evaluate the condition directly.
  if (values.size() <= 64) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (s.weight(i) == 0.0) continue;
      lo = std::min(lo, values[i]);
      hi = std::max(hi, values[i]);
    }
    if (lo == hi) return lo;
    for (int iter = 0; iter < 400 && hi - lo > kExpectileTolerance; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (first_order_condition(s, mid, cfg.q()) < 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }

  // Large samples: sort once, then each evaluation of the condition is a
  // binary search over prefix sums of w and w * v.
  std::vector<std::pair<double, double>> vw;
  vw.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (s.weight(i) > 0.0) vw.emplace_back(values[i], s.weight(i));
  }
  if (!std::is_sorted(vw.begin(), vw.end(), [](const auto& a, const auto& b) { return a.first < b.first; })) {
    std::sort(vw.begin(), vw.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  }
  const std::size_t n = vw.size();
  double lo = vw.front().first;
  double hi = vw.back().first;
  if (lo == hi) return lo;
  // Sums are taken relative to the smallest value to limit cancellation.
  std::vector<double> sorted(n), cw(n + 1, 0.0), cwv(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    sorted[i] = vw[i].first;
    cw[i + 1] = cw[i] + vw[i].second;
    cwv[i + 1] = cwv[i] + vw[i].second * (vw[i].first - lo);
  }
  const double origin = lo;
  const double q = cfg.q();
  auto foc = [&](double x) {
    const auto k = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin());
    const double xs = x - origin;
    const double below = xs * cw[k] - cwv[k];
    const double above = (cwv[n] - cwv[k]) - xs * (cw[n] - cw[k]);
    return q * below - (1.0 - q) * above;
  };
  for (int iter = 0; iter < 400 && hi - lo > kExpectileTolerance; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (foc(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double expectile_of_sample(std::span<const double> values, const ExpectileConfig& cfg) {
  return expectile_of_sample(Sample(std::vector<double>(values.begin(), values.end())), cfg);
}

double realized_marginal_expectile(std::span<const double> stream, double q_eval, Orientation orientation) {
  if (stream.empty()) throw NoDataError("realized expectile of an empty stream");
  const double level = orientation == Orientation::Loss ? q_eval : 1.0 - q_eval;
  return expectile_of_sample(stream, ExpectileConfig(level));
}

double weighted_mean(const Sample& s) {
  // Centered on the first value so a constant sample reproduces exactly.
  const auto values = s.values();
  const double origin = values.front();
  double acc = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = s.weight(i);
    acc += w * (values[i] - origin);
    total += w;
  }
  return origin + acc / total;
}

double Statistic::operator()(const Sample& s) const {
  switch (kind) {
    case Kind::Mean:
      return weighted_mean(s);
    case Kind::Expectile: {
      const double level = orientation == Orientation::Loss ? q : 1.0 - q;
      return expectile_of_sample(s, ExpectileConfig(level));
    }
    case Kind::Fraction: {
      if (!predicate) throw std::invalid_argument("fraction statistic without a predicate");
      double hit = 0.0;
      const auto values = s.values();
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (predicate(values[i])) hit += s.weight(i);
      }
      return hit / s.total_weight();
    }
  }
  throw std::logic_error("unknown statistic kind");
}

std::string Statistic::name() const {
  switch (kind) {
    case Kind::Mean:
      return "mean";
    case Kind::Expectile: {
      std::ostringstream os;
      os << "expectile_" << q;
      return os.str();
    }
    case Kind::Fraction:
      return "fraction";
  }
  return "unknown";
}

namespace {

double percentile(std::span<const double> sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto below = static_cast<std::size_t>(std::floor(pos));
  const std::size_t above = std::min(below + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(below);
  if (frac == 0.0 || sorted[below] == sorted[above]) return sorted[below];
  return sorted[below] + frac * (sorted[above] - sorted[below]);
}

}  // namespace

Interval bootstrap_ci(std::span<const double> stream, const Statistic& statistic, double coverage,
                      std::size_t resamples, std::uint64_t seed) {
  if (stream.empty()) throw NoDataError("bootstrap of an empty stream");
  if (!(coverage > 0.0 && coverage < 1.0)) throw std::invalid_argument("coverage must lie in (0,1)");
  if (resamples == 0) throw std::invalid_argument("bootstrap needs at least one resample");

  // Every statistic here is permutation invariant; sorting lets the expectile
  // solver skip its own sort on each resample.
  std::vector<double> values(stream.begin(), stream.end());
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  Interval out;
  out.point = statistic(Sample(values));

  Rng rng(seed);
  std::vector<double> stats;
  stats.reserve(resamples);
  std::vector<double> counts(n);
  for (std::size_t r = 0; r < resamples; ++r) {
    std::fill(counts.begin(), counts.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) counts[rng.index(n)] += 1.0;
    stats.push_back(statistic(Sample(values, counts)));
  }
  std::sort(stats.begin(), stats.end());
  const double tail = 0.5 * (1.0 - coverage);
  out.lo = percentile(stats, tail);
  out.hi = percentile(stats, 1.0 - tail);
  return out;
}

}  // namespace rcb::risk
