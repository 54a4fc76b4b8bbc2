#ifndef SLVFX_PAYOFFS_HPP
#define SLVFX_PAYOFFS_HPP

#include "slvfx/simulator.hpp"

#include <string>
#include <variant>
#include <vector>

namespace slvfx {

struct EuropeanCall
{
  double strike;
};

struct EuropeanPut
{
  double strike;
};

/// Fixed-strike Asian on the arithmetic mean of S at the fixing dates, or of
/// the trapezoidal time average over the whole grid when `continuous`.
struct AsianFixed
{
  double strike;
  int psi = 1; ///< +1 call, -1 put
  std::vector<double> fixing_dates;
  bool continuous = false;
};

enum class BarrierKind
{
  UpOut,
  UpIn,
  DownOut,
  DownIn,
};

enum class OptionType
{
  Call,
  Put,
};

/// Single barrier monitored at the given dates (every grid point when empty).
/// Up barriers trigger on S >= B, down barriers on S <= B.
struct Barrier
{
  BarrierKind kind;
  OptionType option;
  double strike;
  double barrier;
  std::vector<double> monitoring_dates;
};

/// Call that survives while L < S < B at every monitoring date.
struct DoubleKnockOutCall
{
  double strike;
  double lower;
  double upper;
  std::vector<double> monitoring_dates;
};

/// Autocallable barrier dual currency note. Strike and barriers are absolute
/// spot levels, coupons are fractions of the nominal.
struct AbdcContract
{
  double nominal = 1.0;
  double strike = 0.0;
  double barrier_up_out = 0.0;
  double barrier_down_in = 0.0;
  double coupon = 0.0;
  double early_coupon = 0.0;
  std::vector<double> fixing_dates;
  std::vector<double> coupon_dates;
  double expiry = 0.0;

  /// Monthly fixings and quarterly coupons over `months` months, with the
  /// strike and barriers given as fractions of s0.
  static AbdcContract monthly(double nominal, double s0, double strike_frac, double up_out_frac,
                              double down_in_frac, double coupon, double early_coupon, int months,
                              int months_per_coupon = 3);

  /// Empty when consistent; otherwise human-readable warnings (e.g. B_DI < S0 < B_UO violated).
  std::vector<std::string> warnings(double s0) const;
};

using PayoffSpec = std::variant<EuropeanCall, EuropeanPut, AsianFixed, Barrier, DoubleKnockOutCall, AbdcContract>;

/// Latest date a payoff observes.
double last_date(const PayoffSpec& spec);
/// Throws std::invalid_argument("date not on grid") if some date is off `grid`
/// or beyond it, and for non-positive strikes/barriers.
void check_dates(const PayoffSpec& spec, const SimGrid& grid);

struct AbdcOutcome
{
  double value = 0.0; ///< discounted PnL in % of the nominal
  bool early_redeemed = false;
  bool knocked_in = false;
};

/// Discounted cash flows of the note along one path, in % of the nominal:
///   100 * ( sum_i D(t_i) C 1{t_i < tau_ER} 1{S(t_i) > B_DI}
///           + D(tau_ER) C_ER 1{tau_ER <= T}
///           - D(T) / K (K - S_T)^+ 1{tau_KI <= T < tau_ER} ).
/// The path needs its discount column.
AbdcOutcome abdc_evaluate(const AbdcContract& contract, const PathRecord& path);
inline double abdc_value(const AbdcContract& contract, const PathRecord& path)
{
  return abdc_evaluate(contract, path).value;
}

/// Discounted payoff D^d_T f(S) of one path. For AbdcContract this is abdc_value.
double payoff_value(const PayoffSpec& spec, const PathRecord& path);

std::string payoff_name(const PayoffSpec& spec);

} // namespace slvfx

#endif
