#ifndef SLVFX_MODEL_HPP
#define SLVFX_MODEL_HPP

#include "slvfx/fwd.hpp"

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace slvfx {

class LeverageSurface;

/// Square-root (CIR) diffusion dy = kappa (theta - y) dt + xi sqrt(y) dW, y(0) = y0.
/// Used for the variance and for both shifted short-rate factors.
struct CirParams
{
  double y0 = 0.0;
  double kappa = 0.0;
  double theta = 0.0;
  double xi = 0.0;

  /// 2 kappa theta / xi^2. Infinite when xi == 0.
  double feller_ratio() const;
  bool feller_satisfied() const { return feller_ratio() > 1.0; }
};

/// Piecewise-constant deterministic shift h(t). values[i] applies on
/// [knots[i], knots[i+1]); the last value extends to infinity.
class ShiftFunction
{
public:
  /// Identically zero.
  ShiftFunction();
  /// Throws std::invalid_argument unless knots start at 0, increase strictly,
  /// match values in length, and every |value| <= h_max. A negative h_max
  /// means "use max |value|".
  ShiftFunction(std::vector<double> knots, std::vector<double> values, double h_max = -1.0);

  static ShiftFunction constant(double level);

  double operator()(double t) const;
  /// Exact integral of h over [a, b], a <= b.
  double integral(double a, double b) const;

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }
  double h_max() const { return h_max_; }
  bool is_zero() const;

private:
  std::vector<double> knots_;
  std::vector<double> values_;
  double h_max_;
};

/// 4x4 correlation of the drivers (s, v, d, f). Construction checks symmetry,
/// the unit diagonal and the [-1, 1] range; positive semi-definiteness is
/// checked by validate() and by the Cholesky factorization.
class CorrelationMatrix
{
public:
  CorrelationMatrix();
  explicit CorrelationMatrix(const Matrix4d& entries);

  static CorrelationMatrix identity() { return CorrelationMatrix(); }
  static CorrelationMatrix from_pairs(double sv, double sd, double sf, double vd, double vf, double df);

  const Matrix4d& matrix() const { return entries_; }
  double operator()(int i, int j) const { return entries_(i, j); }

  double rho_sv() const { return entries_(kSpot, kVariance); }
  double rho_sf() const { return entries_(kSpot, kForeign); }

private:
  Matrix4d entries_;
};

struct ModelParams
{
  double s0 = 1.0;
  CirParams variance;
  CirParams domestic;
  CirParams foreign;
  ShiftFunction shift_d;
  ShiftFunction shift_f;
  CorrelationMatrix corr;
  std::shared_ptr<const LeverageSurface> leverage;
};

struct FellerStatus
{
  std::string factor;
  double ratio = 0.0;
  bool satisfied = false;
};

/// Outcome of validate(). Errors block pricing, warnings do not.
struct ValidationReport
{
  bool corr_psd = false;
  std::array<FellerStatus, 3> feller;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool ok() const { return errors.empty(); }
  /// Deterministic single-line JSON rendering.
  std::string to_json() const;
};

/// Checks positivity, correlation PSD-ness and the Feller conditions.
/// Throws std::invalid_argument("non-finite parameter") on NaN/inf inputs;
/// every other problem is reported, not thrown.
ValidationReport validate(const ModelParams& params);

/// zeta = xi * sigma_max. Requires an attached leverage surface.
double zeta(const ModelParams& params);
inline double zeta(double xi, double sigma_max) { return xi * sigma_max; }

} // namespace slvfx

#endif
