#include "oracles.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace oracles {

namespace {

using cplx = std::complex<double>;

double norm_cdf(double x)
{
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

struct Heston
{
  double v0, k, theta, xi, rho, T;

  // E[exp(i u X_T)] for X_T = log(S_T / F_T); no branch-cut jumps because
  // the exponential of -d T is the one that decays.
  cplx cf(cplx u) const
  {
    const cplx i(0.0, 1.0);
    const cplx b = k - rho * xi * i * u;
    const cplx d = std::sqrt(b * b + xi * xi * (i * u + u * u));
    const cplx g = (b - d) / (b + d);
    const cplx e = std::exp(-d * T);
    const cplx C = k * theta / (xi * xi) * ((b - d) * T - 2.0 * std::log((1.0 - g * e) / (1.0 - g)));
    const cplx D = (b - d) / (xi * xi) * (1.0 - e) / (1.0 - g * e);
    return std::exp(C + D * v0);
  }
};

} // namespace

double bs_call(double forward, double strike, double vol_sqrt_t, double df)
{
  if (vol_sqrt_t <= 0.0 || strike <= 0.0)
    return df * std::max(forward - strike, 0.0);
  const double d1 = std::log(forward / strike) / vol_sqrt_t + 0.5 * vol_sqrt_t;
  const double d2 = d1 - vol_sqrt_t;
  return df * (forward * norm_cdf(d1) - strike * norm_cdf(d2));
}

double bs_put(double forward, double strike, double vol_sqrt_t, double df)
{
  return bs_call(forward, strike, vol_sqrt_t, df) - df * (forward - strike);
}

double heston_call(double v0, double k, double theta, double xi, double rho_sv, double r_d, double r_f, double s0,
                   double strike, double T)
{
  const double fwd = s0 * std::exp((r_d - r_f) * T);
  const double df = std::exp(-r_d * T);
  if (xi == 0.0) {
    // Deterministic variance: integrated variance in closed form.
    const double w = k > 0.0 ? theta * T + (v0 - theta) * (1.0 - std::exp(-k * T)) / k : v0 * T;
    return bs_call(fwd, strike, std::sqrt(w), df);
  }
  const Heston h{ v0, k, theta, xi, rho_sv, T };
  const double x = std::log(fwd / strike);
  auto integrand = [&](double u) {
    const cplx z(u, -0.5);
    return std::real(std::exp(cplx(0.0, u * x)) * h.cf(z)) / (u * u + 0.25);
  };
  double err = 0.0;
  const double integral =
    boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, std::numeric_limits<double>::infinity(),
                                                                  20, 1e-13, &err);
  const double scale = std::sqrt(fwd * strike) * df / std::numbers::pi;
  if (!std::isfinite(integral) || scale * err > 1e-8)
    throw std::runtime_error("quadrature failed");
  return df * fwd - scale * integral;
}

double heston_put(double v0, double k, double theta, double xi, double rho_sv, double r_d, double r_f, double s0,
                  double strike, double T)
{
  const double call = heston_call(v0, k, theta, xi, rho_sv, r_d, r_f, s0, strike, T);
  return call - s0 * std::exp(-r_f * T) + strike * std::exp(-r_d * T);
}

double heston_call_gil_pelaez(double v0, double k, double theta, double xi, double rho_sv, double r_d, double r_f,
                              double s0, double strike, double T, int panels, double u_max)
{
  const Heston h{ v0, k, theta, xi, rho_sv, T };
  const double fwd = s0 * std::exp((r_d - r_f) * T);
  const double df = std::exp(-r_d * T);
  const double x = std::log(fwd / strike);
  const cplx i(0.0, 1.0);
  // P2 = Q(S_T > K), P1 the same event under the share measure.
  auto p2 = [&](double u) { return std::real(std::exp(i * u * x) * h.cf(cplx(u, 0.0)) / (i * u)); };
  auto p1 = [&](double u) { return std::real(std::exp(i * u * x) * h.cf(cplx(u, -1.0)) / (i * u)); };
  double i1 = 0.0, i2 = 0.0;
  const double w = u_max / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = p * w, b = a + w;
    i1 += boost::math::quadrature::gauss<double, 20>::integrate(p1, a, b);
    i2 += boost::math::quadrature::gauss<double, 20>::integrate(p2, a, b);
  }
  const double P1 = 0.5 + i1 / std::numbers::pi;
  const double P2 = 0.5 + i2 / std::numbers::pi;
  return df * (fwd * P1 - strike * P2);
}

std::pair<double, double> cir_exact_moments(const slvfx::CirParams& c, double t)
{
  const double e1 = std::exp(-c.kappa * t);
  const double mean = c.theta + (c.y0 - c.theta) * e1;
  if (c.kappa == 0.0)
    return { c.y0, c.y0 * c.xi * c.xi * t };
  const double xi2k = c.xi * c.xi / c.kappa;
  const double var = c.y0 * xi2k * (e1 - e1 * e1) + c.theta * 0.5 * xi2k * (1.0 - e1) * (1.0 - e1);
  return { mean, var };
}

} // namespace oracles
