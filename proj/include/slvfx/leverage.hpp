#ifndef SLVFX_LEVERAGE_HPP
#define SLVFX_LEVERAGE_HPP

#include "slvfx/fwd.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace slvfx {

/// Leverage function sigma(t, x) on a (t, x) knot grid. Bilinear inside the
/// grid; outside it the arguments are clamped, t to [t_first, t_last] and x
/// to [x_min, x_max], so the surface is bounded by sigma_max and globally
/// Lipschitz.
class LeverageSurface
{
public:
  /// Surface restricted to one time, i.e. the time-interpolated row.
  class Slice
  {
  public:
    double operator()(double x) const;

  private:
    friend class LeverageSurface;
    Slice(const LeverageSurface& surface, VectorXd row)
      : surface_(&surface)
      , row_(std::move(row))
    {
    }
    const LeverageSurface* surface_;
    VectorXd row_;
  };

  /// values(i, j) is sigma(t_knots[i], x_knots[j]). Throws std::invalid_argument
  /// for empty or non-increasing knots, shape mismatches, negative or
  /// non-finite values.
  LeverageSurface(std::vector<double> t_knots, std::vector<double> x_knots, MatrixXd values);

  static LeverageSurface constant(double level);

  double eval(double t, double x) const { return slice(t)(x); }
  Slice slice(double t) const;

  double sigma_max() const { return sigma_max_; }
  /// Largest |d sigma / dx| over adjacent x knots (the Lipschitz constant in x).
  double lipschitz_B() const { return lipschitz_b_; }
  /// Largest |d sigma / dt| over adjacent t knots (Hoelder constant with exponent 1).
  double holder_A() const { return holder_a_; }

  double x_min() const { return x_knots_.front(); }
  double x_max() const { return x_knots_.back(); }
  double t_last() const { return t_knots_.back(); }
  bool is_constant() const { return constant_; }

  const std::vector<double>& t_knots() const { return t_knots_; }
  const std::vector<double>& x_knots() const { return x_knots_; }
  const MatrixXd& values() const { return values_; }

private:
  std::vector<double> t_knots_;
  std::vector<double> x_knots_;
  MatrixXd values_;
  double sigma_max_ = 0.0;
  double lipschitz_b_ = 0.0;
  double holder_a_ = 0.0;
  bool constant_ = false;
};

/// Plain-text table: a header row "t\x,<x knots...>", then one row per t
/// knot "<t>,<values...>". Numbers are written with 17 significant digits so
/// that a write/read round trip is bit-exact.
void write_surface(std::ostream& os, const LeverageSurface& surface);
LeverageSurface read_surface(std::istream& is);
LeverageSurface load_surface(const std::string& path);

/// Particle records at one maturity T.
struct ParticleCloud
{
  VectorXd spot;       ///< S_T
  VectorXd variance;   ///< v_T
  VectorXd discount_d; ///< D^d_T
  VectorXd rate_d;     ///< r^d_T
  VectorXd rate_f;     ///< r^f_T
  VectorXd weights;    ///< empty means uniform

  std::size_t size() const { return static_cast<std::size_t>(spot.size()); }
  double weight(std::size_t i) const { return weights.size() ? weights(Eigen::Index(i)) : 1.0; }
  /// Throws std::invalid_argument on inconsistent sizes or non-positive spots/discounts.
  void check() const;
};

/// CSV with header S,v,D,rd,rf and an optional trailing w column.
ParticleCloud read_cloud(std::istream& is);
void write_cloud(std::ostream& os, const ParticleCloud& cloud);

/// Equal-population bins in S_T used to estimate E[. | S_T = K].
struct BinningConfig
{
  std::size_t min_bin = 50;
  double fraction = 0.01;

  std::size_t bin_size(std::size_t n) const;
};

/// Particles sorted by spot and grouped into consecutive equal-count bins;
/// the last bin absorbs the remainder.
class SpotBinning
{
public:
  SpotBinning(const ParticleCloud& cloud, const BinningConfig& config = {});

  /// Sorted particle indices of the bin containing `strike`.
  /// Throws std::runtime_error("insufficient particles in bin").
  std::span<const std::size_t> bin(double strike) const;
  /// All particle indices, sorted by spot.
  std::span<const std::size_t> order() const { return order_; }

  /// Weighted mean of f(i) over the bin containing `strike`.
  template<typename F>
  double conditional_mean(double strike, F&& f) const
  {
    double num = 0.0, den = 0.0;
    for (std::size_t i : bin(strike)) {
      num += cloud_->weight(i) * f(i);
      den += cloud_->weight(i);
    }
    return num / den;
  }

private:
  const ParticleCloud* cloud_;
  std::vector<std::size_t> order_;
  std::size_t bin_size_;
  std::size_t min_bin_;
};

/// sigma(T, K) = sigma_LV / sqrt(E[v_T | S_T = K]); the deterministic-rates
/// leverage formula.
double estimate_leverage_det_rates(const ParticleCloud& cloud, double sigma_lv, double strike,
                                   const BinningConfig& config = {});

/// Market inputs for the stochastic-rates leverage formula at (T, K).
struct MarketTerms
{
  double forward_rate_d = 0.0; ///< f^d_T
  double forward_rate_f = 0.0; ///< f^f_T
  double call_density = 0.0;   ///< d^2 C_LV / dK^2 at (T, K)
};

/// Squared leverage sigma^2(T, K) from the particle cloud with stochastic
/// domestic and foreign rates:
///   E[D|S=K] / E[D v|S=K] * { sigma_LV^2 + 2 / (K^2 C_KK) *
///     ( E[D (r^f - f^f) (S - K)^+] - K E[D (r^d - f^d) 1{S >= K}]
///       + K E[D (r^f - f^f) 1{S >= K}] ) }
/// Conditional expectations come from the spot bin containing K, the rest are
/// plain weighted sample means. Throws std::invalid_argument("non-positive
/// density input") when C_KK <= 0.
double estimate_leverage_full(const ParticleCloud& cloud, double sigma_lv, double strike, double maturity,
                              const MarketTerms& market, const BinningConfig& config = {});

} // namespace slvfx

#endif
