#ifndef SLVFX_SCHEME_HPP
#define SLVFX_SCHEME_HPP

#include "slvfx/model.hpp"

#include <cmath>

namespace slvfx {

template<typename T>
inline T positive_part(T y)
{
  return y > T(0) ? y : T(0);
}

/// One full-truncation Euler step of the auxiliary CIR level:
///   y + kappa (theta - y^+) dt + xi sqrt(y^+) dW.
/// The reported process is the positive part of the result.
template<typename T>
inline T fte_step(T y_tilde, T kappa, T theta, T xi, T dw, T dt)
{
  const T yp = positive_part(y_tilde);
  return y_tilde + kappa * (theta - yp) * dt + xi * std::sqrt(yp) * dw;
}

template<typename T>
inline T fte_step(T y_tilde, const CirParams& cir, T dw, T dt)
{
  return fte_step<T>(y_tilde, T(cir.kappa), T(cir.theta), T(cir.xi), dw, dt);
}

/// Foreign short-rate factor step under the domestic measure, with the
/// quanto drift -rho_sf xi_f sigma_n sqrt(v_bar g^+) evaluated at t_n.
template<typename T>
inline T fte_foreign_step(T gf_tilde, const CirParams& foreign, T v_bar, T sigma_n, T rho_sf, T dw_f, T dt)
{
  const T gp = positive_part(gf_tilde);
  const T kappa = T(foreign.kappa);
  const T xi = T(foreign.xi);
  const T drift = kappa * T(foreign.theta) - kappa * gp - rho_sf * xi * sigma_n * std::sqrt(v_bar * gp);
  return gf_tilde + drift * dt + xi * std::sqrt(gp) * dw_f;
}

/// Log-Euler step for x = log S:
///   x + int h + (gd - gf - sigma^2 v / 2) dt + sigma sqrt(v) dW^s
/// with sigma = sigma(t_n, S_n) and the factor levels frozen at t_n.
template<typename T>
inline T log_euler_step(T x_bar, T gd_bar, T gf_bar, T h_integral, T sigma_n, T v_bar, T dw_s, T dt)
{
  return x_bar + h_integral + (gd_bar - gf_bar - T(0.5) * sigma_n * sigma_n * v_bar) * dt +
         sigma_n * std::sqrt(v_bar) * dw_s;
}

/// Running state of one path between grid points.
template<typename T>
struct PathState
{
  T v_tilde{};
  T gd_tilde{};
  T gf_tilde{};
  T x_bar{};
  T int_rd{}; ///< int_0^{t_n} r^d
  T int_rf{}; ///< int_0^{t_n} r^f
  int step = 0;

  T v_bar() const { return positive_part(v_tilde); }
  T gd_bar() const { return positive_part(gd_tilde); }
  T gf_bar() const { return positive_part(gf_tilde); }
  T spot() const { return std::exp(x_bar); }
};

} // namespace slvfx

#endif
