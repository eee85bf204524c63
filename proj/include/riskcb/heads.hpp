#pragma once

// Scalar prediction heads over a location/scale pair (z0, z1) used by the
// continuous-action experiments. Both heads are reward-valued.

namespace rcb::regression {

/// Location z0 in [0, 1] and scale z1 > 0.
struct ZHead {
  double z0 = 0.5;
  double z1 = 1.0;
};

/// Lower bound added to the softplus scale link.
inline constexpr double kScaleFloor = 1e-3;

double logistic(double u);
double softplus(double u);

/// z0 = logistic(u0), z1 = softplus(u1) + kScaleFloor.
ZHead zhead_from_logits(double u0, double u1);

/// Value of a head and its partial derivatives in (z0, z1).
struct HeadGradient {
  double value = 0.0;
  double d_z0 = 0.0;
  double d_z1 = 0.0;
};

/// Listing-price head:
///   a [erf((1-z0)/z1) - erf((a-z0)/z1)] / [erf((1-z0)/z1) + erf(z0/z1)].
/// Zero at a = 0 and a = 1, nonnegative and at most a in between.
double pricing_predictor(const ZHead& z, double a);
HeadGradient pricing_predictor_grad(const ZHead& z, double a);

/// E[min(a, P)] for P ~ Normal(z0, z1^2) truncated to [0, 1].
double expected_min_truncated_normal(const ZHead& z, double a);

/// Allocation head: E[min(a, P)] - beta * a.
double inventory_predictor(const ZHead& z, double a, double beta);
HeadGradient inventory_predictor_grad(const ZHead& z, double a, double beta);

}  // namespace rcb::regression
