#ifndef SLVFX_TESTS_ORACLES_HPP
#define SLVFX_TESTS_ORACLES_HPP

#include "slvfx/model.hpp"

#include <utility>

// Closed-form and semi-analytic references used only by the tests.
namespace oracles {

struct VanillaQuote
{
  double forward;
  double strike;
  double vol_sqrt_t; ///< sqrt(sigma^2 T)
  double df;
};

/// Black call on a forward; vol 0 gives df (F - K)^+.
double bs_call(double forward, double strike, double vol_sqrt_t, double df);
inline double bs_call(const VanillaQuote& q) { return bs_call(q.forward, q.strike, q.vol_sqrt_t, q.df); }
double bs_put(double forward, double strike, double vol_sqrt_t, double df);

/// Heston call with constant rates: single-integral (Lewis) form with the
/// rotation-free characteristic function, adaptive Gauss-Kronrod to 1e-8.
/// Throws std::runtime_error("quadrature failed") when the error estimate
/// misses the tolerance.
double heston_call(double v0, double k, double theta, double xi, double rho_sv, double r_d, double r_f, double s0,
                   double strike, double T);
double heston_put(double v0, double k, double theta, double xi, double rho_sv, double r_d, double r_f, double s0,
                  double strike, double T);

/// Independent cross-check: Gil-Pelaez P1/P2 inversion with composite
/// Gauss-Legendre on [0, u_max] using `panels` panels.
double heston_call_gil_pelaez(double v0, double k, double theta, double xi, double rho_sv, double r_d, double r_f,
                              double s0, double strike, double T, int panels = 400, double u_max = 400.0);

/// Mean and variance of the exact CIR process at t.
std::pair<double, double> cir_exact_moments(const slvfx::CirParams& cir, double t);

} // namespace oracles

#endif
