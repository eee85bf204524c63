#include "riskcb/heads.hpp"

#include <cmath>
#include <numbers>

namespace rcb::regression {

namespace {

constexpr double kTwoOverSqrtPi = 2.0 / 1.7724538509055160273;  // 2 / sqrt(pi)
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double erf_prime(double u) { return kTwoOverSqrtPi * std::exp(-u * u); }
double norm_cdf(double s) { return 0.5 * std::erfc(-s / std::numbers::sqrt2); }
double norm_pdf(double s) { return kInvSqrt2Pi * std::exp(-0.5 * s * s); }

}  // namespace

double logistic(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double softplus(double u) { return u > 30.0 ? u : std::log1p(std::exp(u)); }

ZHead zhead_from_logits(double u0, double u1) { return {logistic(u0), softplus(u1) + kScaleFloor}; }

double pricing_predictor(const ZHead& z, double a) { return pricing_predictor_grad(z, a).value; }

HeadGradient pricing_predictor_grad(const ZHead& z, double a) {
  const double upper = (1.0 - z.z0) / z.z1;
  const double at = (a - z.z0) / z.z1;
  const double lower = z.z0 / z.z1;

  const double num = std::erf(upper) - std::erf(at);
  const double den = std::erf(upper) + std::erf(lower);

  // d(arg)/dz0 = -1/z1 for upper and at, +1/z1 for lower; d(arg)/dz1 = -arg/z1.
  const double e_upper = erf_prime(upper);
  const double e_at = erf_prime(at);
  const double e_lower = erf_prime(lower);

  const double dnum_dz0 = (-e_upper + e_at) / z.z1;
  const double dden_dz0 = (-e_upper + e_lower) / z.z1;
  const double dnum_dz1 = (-e_upper * upper + e_at * at) / z.z1;
  const double dden_dz1 = (-e_upper * upper - e_lower * lower) / z.z1;

  HeadGradient g;
  g.value = a * num / den;
  g.d_z0 = a * (dnum_dz0 * den - num * dden_dz0) / (den * den);
  g.d_z1 = a * (dnum_dz1 * den - num * dden_dz1) / (den * den);
  return g;
}

namespace {

// Truncated-normal partial expectation pieces, with derivatives.
struct MinTerm {
  double g = 0.0;  // numerator: int_0^1 min(a, p) dN(p)
  double norm = 0.0;  // Z = int_0^1 dN(p)
  double dg_dz0 = 0.0, dg_dz1 = 0.0;
  double dnorm_dz0 = 0.0, dnorm_dz1 = 0.0;
};

MinTerm min_term(const ZHead& z, double a) {
  const double mu = z.z0;
  const double sd = z.z1;
  const double lo = -mu / sd;
  const double at = (a - mu) / sd;
  const double hi = (1.0 - mu) / sd;

  const double cdf_lo = norm_cdf(lo), cdf_at = norm_cdf(at), cdf_hi = norm_cdf(hi);
  const double pdf_lo = norm_pdf(lo), pdf_at = norm_pdf(at), pdf_hi = norm_pdf(hi);

  MinTerm m;
  // a * P(a < P <= 1) + [mu (Phi(at) - Phi(lo)) - sd (phi(at) - phi(lo))]
  m.g = a * (cdf_hi - cdf_at) + mu * (cdf_at - cdf_lo) - sd * (pdf_at - pdf_lo);
  m.norm = cdf_hi - cdf_lo;

  // Standardized arguments s move as ds/dmu = -1/sd, ds/dsd = -s/sd;
  // dPhi(s) = phi(s) ds, dphi(s) = -s phi(s) ds.
  const double dlo_dmu = -1.0 / sd, dat_dmu = -1.0 / sd, dhi_dmu = -1.0 / sd;
  const double dlo_dsd = -lo / sd, dat_dsd = -at / sd, dhi_dsd = -hi / sd;

  auto dg = [&](double dlo, double dat, double dhi, double dmu, double dsd) {
    return a * (pdf_hi * dhi - pdf_at * dat) + dmu * (cdf_at - cdf_lo) + mu * (pdf_at * dat - pdf_lo * dlo) -
           dsd * (pdf_at - pdf_lo) - sd * (-at * pdf_at * dat + lo * pdf_lo * dlo);
  };
  m.dg_dz0 = dg(dlo_dmu, dat_dmu, dhi_dmu, 1.0, 0.0);
  m.dg_dz1 = dg(dlo_dsd, dat_dsd, dhi_dsd, 0.0, 1.0);
  m.dnorm_dz0 = pdf_hi * dhi_dmu - pdf_lo * dlo_dmu;
  m.dnorm_dz1 = pdf_hi * dhi_dsd - pdf_lo * dlo_dsd;
  return m;
}

}  // namespace

double expected_min_truncated_normal(const ZHead& z, double a) {
  const MinTerm m = min_term(z, a);
  return m.g / m.norm;
}

double inventory_predictor(const ZHead& z, double a, double beta) {
  return expected_min_truncated_normal(z, a) - beta * a;
}

HeadGradient inventory_predictor_grad(const ZHead& z, double a, double beta) {
  const MinTerm m = min_term(z, a);
  const double n2 = m.norm * m.norm;
  HeadGradient g;
  g.value = m.g / m.norm - beta * a;
  g.d_z0 = (m.dg_dz0 * m.norm - m.g * m.dnorm_dz0) / n2;
  g.d_z1 = (m.dg_dz1 * m.norm - m.g * m.dnorm_dz1) / n2;
  return g;
}

}  // namespace rcb::regression
