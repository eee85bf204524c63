#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rcb::regression {

/// Random Fourier features for the product-Cauchy kernel
/// k(x, y) = prod_i 1 / (1 + ((x_i - y_i) / bandwidth)^2).
///
/// The kernel's spectral density is a unit-scale Laplace law per coordinate,
/// so frequencies are Laplace(1) / bandwidth. Each frequency contributes a
/// cosine and a sine feature; the map is normalized so that <phi(x), phi(x)> = 1.
class CauchyRandomFeatures {
 public:
  CauchyRandomFeatures(std::size_t input_dim, std::size_t num_frequencies, double bandwidth, std::uint64_t seed);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t num_frequencies() const { return num_frequencies_; }
  /// Length of the mapped vector: 2 * num_frequencies.
  std::size_t output_dim() const { return 2 * num_frequencies_; }
  double bandwidth() const { return bandwidth_; }
  std::uint64_t seed() const { return seed_; }

  std::vector<double> map(std::span<const double> x) const;
  void map_into(std::span<const double> x, std::span<double> out) const;

 private:
  std::size_t input_dim_;
  std::size_t num_frequencies_;
  double bandwidth_;
  std::uint64_t seed_;
  std::vector<double> omega_;  // num_frequencies x input_dim, row-major
};

/// One-shot form: builds the frequency draw for (x.size(), dim, bandwidth, seed) and maps x.
std::vector<double> cauchy_random_features(std::span<const double> x, std::size_t dim, double bandwidth,
                                           std::uint64_t seed);

/// Exact product-Cauchy kernel.
double cauchy_kernel(std::span<const double> x, std::span<const double> y, double bandwidth);

}  // namespace rcb::regression
