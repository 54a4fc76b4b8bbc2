#ifndef SLVFX_ANALYTICS_HPP
#define SLVFX_ANALYTICS_HPP

#include "slvfx/model.hpp"

#include <optional>
#include <string>

namespace slvfx {

/// A critical maturity or explosion time. Infinite values are explicit
/// (no sentinel float); `branch` numbers the case of the formula that fired.
class CriticalMaturity
{
public:
  static CriticalMaturity finite(double years, int branch) { return CriticalMaturity(years, branch); }
  static CriticalMaturity infinite(int branch) { return CriticalMaturity(std::nullopt, branch); }

  bool is_infinite() const { return !years_; }
  /// Years, or +inf for infinite maturities.
  double value() const;
  int branch() const { return branch_; }

  /// "inf" or %.17g.
  std::string to_string() const;

  friend bool operator<=(const CriticalMaturity& a, const CriticalMaturity& b);

private:
  CriticalMaturity(std::optional<double> years, int branch)
    : years_(years)
    , branch_(branch)
  {
  }
  std::optional<double> years_;
  int branch_;
};

/// phi(alpha) = alpha + sqrt((alpha - 1) alpha), alpha >= 1.
double phi(double alpha);

/// lambda = phi^2 zeta^2 / (2 xi^2): the exponential-integrability level of
/// the variance at which explosion_time_exact_cir coincides with the
/// phi-based critical maturities.
double lambda_for(double phi_value, double zeta, double xi);

/// L1 strong-convergence horizon: 4k / zeta^2 if zeta < 2k, else 1 / (zeta - k).
CriticalMaturity t_star_L1(double k, double zeta);

/// Horizon of the leverage calibration formula, phi = 2 + sqrt(2).
CriticalMaturity t_star_calibration(double k, double zeta);

/// Explosion time of E[exp(lambda int_0^T y)] for the exact CIR process.
CriticalMaturity explosion_time_exact_cir(const CirParams& cir, double lambda);

/// Horizon up to which E[exp(lambda int_0^T y_bar)] stays bounded uniformly
/// in the step size for the FTE scheme.
CriticalMaturity explosion_time_fte_cir(const CirParams& cir, double lambda);

/// Moment horizon of order alpha for the exact discounted spot.
CriticalMaturity t_star_moments_exact(double alpha, double k, double zeta);

/// Moment horizon of order alpha for the discretized discounted spot.
CriticalMaturity t_star_moments_fte(double alpha, double k, double zeta);

/// Constant nu_y of the FTE exponential-moment bound, evaluated at the step
/// cap delta_T. Throws std::invalid_argument("delta_T too large") unless
/// delta_T < 1 / kappa.
double nu_y(const CirParams& cir, double delta_T);

/// Smallest eta >= 1 with eta^2 lambda xi^2 T^2 - 2 eta (1 + kT) + 2 <= 0.
/// Throws std::domain_error("beyond critical maturity") if none exists.
double eta_root(const CirParams& cir, double lambda, double T);

/// Upper bound exp{eta lambda T^2 (k theta + nu xi) / 2 + eta lambda T y0} on
/// E[exp(lambda int_0^T y_bar)], valid for every step size below delta_T.
/// Throws std::domain_error("beyond critical maturity") when T exceeds
/// explosion_time_fte_cir.
double fte_exp_moment_bound(const CirParams& cir, double lambda, double T, double delta_T);

} // namespace slvfx

#endif
