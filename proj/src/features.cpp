#include "riskcb/features.hpp"

#include <cmath>
#include <stdexcept>

#include "riskcb/random.hpp"

namespace rcb::regression {

CauchyRandomFeatures::CauchyRandomFeatures(std::size_t input_dim, std::size_t num_frequencies, double bandwidth,
                                           std::uint64_t seed)
    : input_dim_(input_dim), num_frequencies_(num_frequencies), bandwidth_(bandwidth), seed_(seed) {
  if (num_frequencies == 0) throw std::invalid_argument("random feature dimension must be positive");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("random feature bandwidth must be positive");
  Rng rng(seed);
  omega_.resize(num_frequencies * input_dim);
  for (double& w : omega_) w = rng.laplace() / bandwidth;
}

void CauchyRandomFeatures::map_into(std::span<const double> x, std::span<double> out) const {
  if (x.size() != input_dim_) {
    throw std::invalid_argument("random features expect input dimension " + std::to_string(input_dim_) + ", got " +
                                std::to_string(x.size()));
  }
  if (out.size() != output_dim()) throw std::invalid_argument("random feature output buffer has wrong size");
  const double scale = 1.0 / std::sqrt(static_cast<double>(num_frequencies_));
  for (std::size_t j = 0; j < num_frequencies_; ++j) {
    const double* w = omega_.data() + j * input_dim_;
    double phase = 0.0;
    for (std::size_t i = 0; i < input_dim_; ++i) phase += w[i] * x[i];
    out[2 * j] = scale * std::cos(phase);
    out[2 * j + 1] = scale * std::sin(phase);
  }
}

std::vector<double> CauchyRandomFeatures::map(std::span<const double> x) const {
  std::vector<double> out(output_dim());
  map_into(x, out);
  return out;
}

std::vector<double> cauchy_random_features(std::span<const double> x, std::size_t dim, double bandwidth,
                                           std::uint64_t seed) {
  return CauchyRandomFeatures(x.size(), dim, bandwidth, seed).map(x);
}

double cauchy_kernel(std::span<const double> x, std::span<const double> y, double bandwidth) {
  if (x.size() != y.size()) throw std::invalid_argument("kernel arguments differ in dimension");
  double k = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = (x[i] - y[i]) / bandwidth;
    k /= 1.0 + d * d;
  }
  return k;
}

}  // namespace rcb::regression
