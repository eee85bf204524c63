#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "riskcb/environments.hpp"
#include "riskcb/heads.hpp"
#include "riskcb/random.hpp"

namespace rcb::env {

namespace {

constexpr std::size_t kMinQueryActions = 2;
constexpr std::size_t kMaxQueryActions = 22;

/// Seeded Gaussian mixture over R^d.
struct Mixture {
  std::size_t dim;
  std::vector<std::vector<double>> means;
  double spread;

  Mixture(std::size_t d, std::size_t components, double spread_, Rng& rng) : dim(d), spread(spread_) {
    for (std::size_t k = 0; k < components; ++k) {
      std::vector<double> m(d);
      for (double& v : m) v = rng.normal();
      means.push_back(std::move(m));
    }
  }

  void draw(Rng& rng, double* out) const {
    const auto& m = means[rng.index(means.size())];
    for (std::size_t j = 0; j < dim; ++j) out[j] = m[j] + spread * rng.normal();
  }
};

std::vector<double> random_direction(std::size_t d, double norm, Rng& rng) {
  std::vector<double> w(d);
  double s = 0.0;
  for (double& v : w) {
    v = rng.normal();
    s += v * v;
  }
  const double scale = norm / std::sqrt(s);
  for (double& v : w) v *= scale;
  return w;
}

double dot(const std::vector<double>& w, const double* x) {
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[j];
  return s;
}

double truncated_normal(double mean, double sd, Rng& rng) {
  for (int tries = 0; tries < 1000; ++tries) {
    const double v = rng.normal(mean, sd);
    if (v >= 0.0 && v <= 1.0) return v;
  }
  return std::clamp(mean, 0.0, 1.0);
}

FeatureTable mixture_contexts(std::size_t rows, std::size_t dim, Rng& rng) {
  Mixture mix(dim, 4, 0.7, rng);
  std::vector<double> data(rows * dim);
  for (std::size_t i = 0; i < rows; ++i) mix.draw(rng, data.data() + i * dim);
  return FeatureTable(dim, std::move(data));
}

/// Location and scale of y | x: a monotone logistic map of one projection
/// and a heteroscedastic scale driven by another.
struct NoisyMonotoneMap {
  std::vector<double> loc_dir, scale_dir;
  double loc_lo, loc_span, scale_lo, scale_span;

  double loc(const double* x) const { return loc_lo + loc_span * regression::logistic(dot(loc_dir, x)); }
  double scale(const double* x) const { return scale_lo + scale_span * regression::logistic(dot(scale_dir, x)); }
};

NoisyMonotoneMap make_map(std::size_t dim, double loc_lo, double loc_span, double scale_lo, double scale_span,
                          Rng& rng) {
  return {random_direction(dim, 1.0, rng), random_direction(dim, 1.0, rng), loc_lo, loc_span, scale_lo, scale_span};
}

// Cumulative distribution of per-query configuration counts.
std::vector<double> query_count_cdf() {
  std::vector<double> cdf;
  double acc = 0.0;
  for (std::size_t k = 0; k <= kMaxQueryActions; ++k) {
    acc += query_action_count_pmf(k);
    cdf.push_back(acc);
  }
  return cdf;
}

// Tail ratio r of the geometric part on 4..22, chosen so the overall mean
// count is 4.3 given P(2) = 0.35 and P(3) = 0.25.
double tail_ratio() {
  static const double r = [] {
    const double target = (4.3 - 0.35 * 2.0 - 0.25 * 3.0) / 0.40;
    auto tail_mean = [](double ratio) {
      double w = 0.0, m = 0.0, p = 1.0;
      for (std::size_t k = 4; k <= kMaxQueryActions; ++k) {
        w += p;
        m += p * static_cast<double>(k);
        p *= ratio;
      }
      return m / w;
    };
    double lo = 1e-6, hi = 1.0 - 1e-9;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (tail_mean(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return r;
}

struct QueryProfile {
  double mean;
  double sd;
  double tilt;  // context sensitivity of the mean
  std::vector<double> dir;
};

std::unique_ptr<Environment> make_query_opt(std::size_t rows, std::size_t dim, Rng& rng) {
  FeatureTable table = mixture_contexts(rows, dim, rng);

  // Stratified counts: the i-th query takes the inverse-cdf value at
  // (i + 1/2) / rows, then the counts are shuffled.
  const auto cdf = query_count_cdf();
  std::vector<std::size_t> counts(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(rows);
    std::size_t k = kMinQueryActions;
    while (k < kMaxQueryActions && cdf[k] <= u) ++k;
    counts[i] = k;
  }
  for (std::size_t i = rows; i > 1; --i) std::swap(counts[i - 1], counts[rng.index(i)]);

  // Configuration 0 is the default strategy (zero change). Configuration 1
  // is a reliable modest win, 2 a larger but often regressing win; the
  // rest are mostly neutral-to-harmful alternatives.
  std::vector<QueryProfile> profiles(kMaxQueryActions);
  profiles[1] = {0.26, 0.05, 0.05, random_direction(dim, 1.0, rng)};
  profiles[2] = {0.36, 0.42, 0.05, random_direction(dim, 1.0, rng)};
  for (std::size_t j = 3; j < kMaxQueryActions; ++j) {
    profiles[j] = {rng.uniform(-0.25, 0.12), rng.uniform(0.05, 0.5), 0.1, random_direction(dim, 1.0, rng)};
  }

  std::vector<std::vector<double>> rewards(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const double* x = table.row(i).data();
    auto& r = rewards[i];
    r.assign(counts[i], 0.0);
    for (std::size_t j = 1; j < counts[i]; ++j) {
      const auto& p = profiles[j];
      const double m = p.mean + p.tilt * std::tanh(dot(p.dir, x));
      r[j] = std::clamp(m + p.sd * rng.normal(), -kQueryRewardBound, kQueryRewardBound);
    }
  }
  return std::make_unique<QueryOptEnv>(std::move(table), std::move(rewards));
}

std::unique_ptr<Environment> make_realizable(std::size_t rows, const SyntheticOptions& opt, Rng& rng) {
  const std::size_t dim = opt.dim;
  std::vector<double> data(rows * dim);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto x = random_direction(dim, 1.0, rng);
    std::copy(x.begin(), x.end(), data.begin() + static_cast<std::ptrdiff_t>(i * dim));
  }
  std::vector<double> weights;
  for (std::size_t a = 0; a < opt.num_actions; ++a) {
    const auto w = random_direction(dim, 0.25, rng);
    weights.insert(weights.end(), w.begin(), w.end());
  }
  std::vector<std::uint8_t> signs(rows * opt.num_actions);
  for (auto& s : signs) s = rng.uniform() < 0.5 ? 1 : 0;
  const double scale = 0.25 / std::max(opt.q, 1.0 - opt.q);
  return std::make_unique<RealizableEnv>(FeatureTable(dim, std::move(data)), std::move(weights), opt.num_actions,
                                         opt.q, scale, std::move(signs));
}

}  // namespace

double query_action_count_pmf(std::size_t k) {
  if (k < kMinQueryActions || k > kMaxQueryActions) return 0.0;
  if (k == 2) return 0.35;
  if (k == 3) return 0.25;
  const double r = tail_ratio();
  double norm = 0.0, p = 1.0;
  for (std::size_t j = 4; j <= kMaxQueryActions; ++j) {
    norm += p;
    p *= r;
  }
  return 0.40 * std::pow(r, static_cast<double>(k - 4)) / norm;
}

std::unique_ptr<Environment> synthetic_surrogate(EnvKind kind, std::size_t rows, std::uint64_t seed,
                                                 const SyntheticOptions& options) {
  if (rows == 0) throw std::invalid_argument("synthetic environment needs at least one row");
  SyntheticOptions opt = options;
  if (opt.dim == 0) opt.dim = kind == EnvKind::Realizable ? 10 : kind == EnvKind::QueryOpt ? 8 : 6;
  Rng rng(seed);

  std::unique_ptr<Environment> env;
  switch (kind) {
    case EnvKind::PricingDiscrete: {
      FeatureTable table = mixture_contexts(rows, opt.dim, rng);
      const auto map = make_map(opt.dim, 0.0, 1.0, 0.0, 0.0, rng);
      std::vector<int> labels(rows);
      for (std::size_t i = 0; i < rows; ++i) {
        const double u = regression::logistic(dot(map.loc_dir, table.row(i).data()) + 0.6 * rng.normal());
        labels[i] = std::clamp(1 + static_cast<int>(std::floor(8.0 * u)), 1, 8);
      }
      env = std::make_unique<PricingDiscreteEnv>(std::move(table), std::move(labels));
      break;
    }
    case EnvKind::PricingContinuous:
    case EnvKind::Inventory: {
      FeatureTable table = mixture_contexts(rows, opt.dim, rng);
      const auto map = kind == EnvKind::PricingContinuous ? make_map(opt.dim, 0.15, 0.7, 0.04, 0.16, rng)
                                                          : make_map(opt.dim, 0.1, 0.8, 0.05, 0.2, rng);
      std::vector<double> y(rows);
      for (std::size_t i = 0; i < rows; ++i) {
        const double* x = table.row(i).data();
        y[i] = truncated_normal(map.loc(x), map.scale(x), rng);
      }
      if (kind == EnvKind::PricingContinuous) {
        env = std::make_unique<PricingContinuousEnv>(std::move(table), std::move(y));
      } else {
        env = std::make_unique<InventoryEnv>(std::move(table), std::move(y));
      }
      break;
    }
    case EnvKind::QueryOpt:
      env = make_query_opt(rows, opt.dim, rng);
      break;
    case EnvKind::Realizable:
      env = make_realizable(rows, opt, rng);
      break;
  }
  env->set_content_hash(sha256_hex("synthetic:" + to_string(kind) + ":" + std::to_string(rows) + ":" +
                                   std::to_string(seed) + ":" + std::to_string(opt.dim) + ":" +
                                   std::to_string(opt.num_actions) + ":" + std::to_string(opt.q)));
  return env;
}

void write_dataset(const Environment& env, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  const std::size_t d = env.context_dim();

  if (env.kind() == EnvKind::QueryOpt) {
    const auto& q = dynamic_cast<const QueryOptEnv&>(env);
    for (std::size_t i = 0; i < env.size(); ++i) {
      const auto x = env.context(i);
      nlohmann::json j;
      j["features"] = std::vector<double>(x.begin(), x.end());
      j["rewards"] = q.rewards(i);
      out << j.dump() << '\n';
    }
    return;
  }
  if (env.kind() == EnvKind::Realizable) throw std::invalid_argument("realizable instances are generated, not written");

  for (std::size_t j = 0; j < d; ++j) out << 'x' << j << ',';
  out << "y\n";
  for (std::size_t i = 0; i < env.size(); ++i) {
    for (double v : env.context(i)) out << num(v) << ',';
    if (env.kind() == EnvKind::PricingDiscrete) {
      out << static_cast<int>(env.label(i)) << '\n';
    } else {
      out << num(env.label(i)) << '\n';
    }
  }
}

}  // namespace rcb::env
