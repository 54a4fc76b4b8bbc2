#include "slvfx/analytics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace slvfx {

double CriticalMaturity::value() const
{
  return years_ ? *years_ : std::numeric_limits<double>::infinity();
}

std::string CriticalMaturity::to_string() const
{
  if (!years_)
    return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", *years_);
  return buf;
}

bool operator<=(const CriticalMaturity& a, const CriticalMaturity& b)
{
  if (b.is_infinite())
    return true;
  if (a.is_infinite())
    return false;
  return *a.years_ <= *b.years_;
}

namespace {

// 1/0 style limits come out as explicit infinities.
CriticalMaturity ratio(double num, double den, int branch)
{
  if (den <= 0.0)
    return CriticalMaturity::infinite(branch);
  const double v = num / den;
  if (!std::isfinite(v))
    return CriticalMaturity::infinite(branch);
  return CriticalMaturity::finite(v, branch);
}

// (2 / s) [pi/2 + arctan(k / s)] with s = sqrt(c^2 - k^2), finite when k < c.
CriticalMaturity arctan_form(double k, double c)
{
  if (!(k < c))
    return CriticalMaturity::infinite(2);
  const double s = std::sqrt(c * c - k * k);
  return ratio(2.0 * (0.5 * std::numbers::pi + std::atan(k / s)), s, 1);
}

void require_positive_k(double k)
{
  if (!(k >= 0.0) || !std::isfinite(k))
    throw std::invalid_argument("mean-reversion speed must be non-negative");
}

} // namespace

double phi(double alpha)
{
  if (!(alpha >= 1.0))
    throw std::invalid_argument("moment order alpha must be >= 1");
  return alpha + std::sqrt((alpha - 1.0) * alpha);
}

double lambda_for(double phi_value, double zeta, double xi)
{
  if (!(xi > 0.0))
    throw std::invalid_argument("lambda_for: xi must be positive");
  return phi_value * phi_value * zeta * zeta / (2.0 * xi * xi);
}

CriticalMaturity t_star_L1(double k, double zeta)
{
  require_positive_k(k);
  if (zeta < 2.0 * k)
    return ratio(4.0 * k, zeta * zeta, 1);
  return ratio(1.0, zeta - k, 2);
}

CriticalMaturity t_star_calibration(double k, double zeta)
{
  return t_star_moments_exact(2.0, k, zeta);
}

CriticalMaturity explosion_time_exact_cir(const CirParams& cir, double lambda)
{
  if (!(lambda > 0.0))
    throw std::invalid_argument("lambda must be positive");
  require_positive_k(cir.kappa);
  return arctan_form(cir.kappa, std::sqrt(2.0 * lambda) * cir.xi);
}

CriticalMaturity explosion_time_fte_cir(const CirParams& cir, double lambda)
{
  if (!(lambda > 0.0))
    throw std::invalid_argument("lambda must be positive");
  const double k = cir.kappa;
  require_positive_k(k);
  if (k <= std::sqrt(0.5 * lambda) * cir.xi)
    return ratio(1.0, std::sqrt(2.0 * lambda) * cir.xi - k, 1);
  return ratio(2.0 * k, lambda * cir.xi * cir.xi, 2);
}

CriticalMaturity t_star_moments_exact(double alpha, double k, double zeta)
{
  require_positive_k(k);
  return arctan_form(k, phi(alpha) * zeta);
}

CriticalMaturity t_star_moments_fte(double alpha, double k, double zeta)
{
  require_positive_k(k);
  const double p = phi(alpha);
  if (k <= 0.5 * p * zeta)
    return ratio(1.0, p * zeta - k, 1);
  return ratio(4.0 * k, p * p * zeta * zeta, 2);
}

double nu_y(const CirParams& cir, double delta_T)
{
  const double k = cir.kappa;
  const double one_minus = 1.0 - k * delta_T;
  if (!(delta_T >= 0.0) || !(one_minus > 0.0))
    throw std::invalid_argument("delta_T too large");
  const double xi2 = cir.xi * cir.xi;
  const double pi = std::numbers::pi;
  const double om2 = one_minus * one_minus;
  const double inner = std::sqrt(xi2 * xi2 / (4.0 * om2 * om2) + k * k * cir.theta * cir.theta / om2);
  return std::sqrt(xi2 / (4.0 * pi * om2) + inner / (2.0 * pi));
}

double eta_root(const CirParams& cir, double lambda, double T)
{
  const double a = lambda * cir.xi * cir.xi * T * T;
  const double half_b = 1.0 + cir.kappa * T;
  if (a == 0.0)
    return 1.0; // linear case: any eta >= 1 / (1 + kT) works
  double disc = half_b * half_b - 2.0 * a;
  // Rounding slack so that T exactly at the horizon is accepted.
  const double slack = 1e-12 * half_b * half_b;
  if (disc < -slack)
    throw std::domain_error("beyond critical maturity");
  disc = std::max(disc, 0.0);
  const double root = std::sqrt(disc);
  const double upper = (half_b + root) / a;
  if (upper < 1.0 - 1e-12)
    throw std::domain_error("beyond critical maturity");
  // Lower root in cancellation-free form: product of roots is 2 / a.
  const double lower = 2.0 / (half_b + root);
  return std::max(1.0, lower);
}

double fte_exp_moment_bound(const CirParams& cir, double lambda, double T, double delta_T)
{
  if (!(lambda > 0.0) || !(T >= 0.0))
    throw std::invalid_argument("lambda must be positive and T non-negative");
  const CriticalMaturity horizon = explosion_time_fte_cir(cir, lambda);
  if (!horizon.is_infinite() && T > horizon.value() * (1.0 + 1e-12))
    throw std::domain_error("beyond critical maturity");
  const double eta = eta_root(cir, lambda, T);
  const double nu = nu_y(cir, delta_T);
  return std::exp(0.5 * eta * lambda * T * T * (cir.kappa * cir.theta + nu * cir.xi) + eta * lambda * T * cir.y0);
}

} // namespace slvfx
