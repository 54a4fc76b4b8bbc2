#include "oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace oracles;

TEST(BsCall, Limits)
{
  EXPECT_NEAR(bs_call(1.3, 1e-12, 0.2, 0.97), 0.97 * 1.3, 1e-12);
  EXPECT_DOUBLE_EQ(bs_call(1.3, 1.0, 0.0, 0.9), 0.9 * 0.3);
  EXPECT_DOUBLE_EQ(bs_call(0.8, 1.0, 0.0, 0.9), 0.0);
  EXPECT_NEAR(bs_call(1.0, 1.1, 0.25, 0.95) - bs_put(1.0, 1.1, 0.25, 0.95), 0.95 * (1.0 - 1.1), 1e-15);
}

TEST(BsCall, MatchesLognormalQuadrature)
{
  // E[(F e^{s Z - s^2/2} - K)^+] with Z standard normal
  const double F = 1.0, K = 1.0, s = 0.2;
  auto f = [&](double z) {
    return std::max(F * std::exp(s * z - 0.5 * s * s) - K, 0.0) * std::exp(-0.5 * z * z) /
           std::sqrt(2 * std::numbers::pi);
  };
  const double z0 = 0.5 * s; // kink
  const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, z0, 40.0, 15, 1e-15);
  EXPECT_NEAR(bs_call(F, K, s, 1.0), q, 1e-10);
}

TEST(HestonCall, DeterministicVarianceLimit)
{
  const double theta = 0.05, T = 1.5, rd = 0.03, rf = 0.01, s0 = 1.2;
  const double fwd = s0 * std::exp((rd - rf) * T), df = std::exp(-rd * T);
  for (double K : { 0.9, 1.2, 1.5 }) {
    const double bs = bs_call(fwd, K, std::sqrt(theta * T), df);
    double prev = 1.0;
    for (double xi : { 0.08, 0.04, 0.02, 0.01 }) {
      const double e = std::abs(heston_call(theta, 1.0, theta, xi, -0.5, rd, rf, s0, K, T) - bs);
      EXPECT_LT(e, prev) << xi;
      prev = e;
    }
    EXPECT_LT(prev, 1e-3);
    EXPECT_NEAR(heston_call(theta, 1.0, theta, 0.0, -0.5, rd, rf, s0, K, T), bs, 1e-14);
  }
}

TEST(HestonCall, DeepInTheMoney)
{
  const double rf = 0.02, T = 1.0, s0 = 1.1;
  EXPECT_NEAR(heston_call(0.04, 1.5, 0.05, 0.5, -0.7, 0.03, rf, s0, 1e-6, T), std::exp(-rf * T) * s0, 1e-6);
}

TEST(HestonCall, GilPelaezCrossCheck)
{
  struct Case
  {
    double v0, k, theta, xi, rho, rd, rf, s0, K, T;
  };
  for (const Case& c : { Case{ 0.04, 1.5, 0.04, 0.3, -0.7, 0.02, 0.01, 1.0, 1.0, 1.0 },
                         Case{ 0.09, 0.5, 0.05, 0.8, -0.3, 0.0, 0.0, 1.3, 1.1, 2.0 },
                         Case{ 0.02, 3.0, 0.06, 0.5, 0.4, 0.05, 0.01, 1.0, 0.8, 0.5 },
                         Case{ 0.04, 1.0, 0.04, 1.0, -0.9, 0.01, 0.03, 1.0, 1.3, 1.5 } }) {
    const double a = heston_call(c.v0, c.k, c.theta, c.xi, c.rho, c.rd, c.rf, c.s0, c.K, c.T);
    const double b = heston_call_gil_pelaez(c.v0, c.k, c.theta, c.xi, c.rho, c.rd, c.rf, c.s0, c.K, c.T, 800, 400.0);
    EXPECT_NEAR(a, b, 1e-6) << c.K << ' ' << c.T;
  }
}

TEST(HestonCall, PutCallParity)
{
  const double rd = 0.03, rf = 0.01, s0 = 1.2, T = 1.2;
  for (double K : { 0.8, 1.2, 1.7 }) {
    const double c = heston_call(0.05, 1.2, 0.04, 0.6, -0.5, rd, rf, s0, K, T);
    const double p = heston_put(0.05, 1.2, 0.04, 0.6, -0.5, rd, rf, s0, K, T);
    EXPECT_NEAR(c - p, s0 * std::exp(-rf * T) - K * std::exp(-rd * T), 1e-8);
  }
}

TEST(CirExactMoments, Limits)
{
  const slvfx::CirParams c{ 0.04, 2.0, 0.04, 0.3 };
  for (double t : { 0.1, 1.0, 7.0 })
    EXPECT_DOUBLE_EQ(cir_exact_moments(c, t).first, 0.04);
  const slvfx::CirParams d{ 0.09, 2.0, 0.04, 0.3 };
  const auto [m0, v0] = cir_exact_moments(d, 0.0);
  EXPECT_DOUBLE_EQ(m0, 0.09);
  EXPECT_DOUBLE_EQ(v0, 0.0);
  const auto [m, v] = cir_exact_moments(d, 200.0);
  EXPECT_NEAR(m, 0.04, 1e-15);
  EXPECT_NEAR(v, 0.04 * 0.09 / 4.0, 1e-15);
}
