#include "slvfx/payoffs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace slvfx {

namespace {

template<class... Ts>
struct overloaded : Ts...
{
  using Ts::operator()...;
};
template<class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

int path_index(const PathRecord& path, double t)
{
  const double n = t / path.dt;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-9 * std::max(1.0, std::abs(n)) || rounded < 0.0 || rounded > path.n_steps)
    throw std::invalid_argument("date not on grid");
  return static_cast<int>(rounded);
}

double max_dates(const std::vector<double>& dates)
{
  return dates.empty() ? 0.0 : *std::max_element(dates.begin(), dates.end());
}

// Extremes of S over the monitoring dates; every grid point when none are given.
std::pair<double, double> spot_range(const PathRecord& path, const std::vector<double>& dates)
{
  if (dates.empty())
    return { path.spot.minCoeff(), path.spot.maxCoeff() };
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double t : dates) {
    const double s = path.spot(path_index(path, t));
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return { lo, hi };
}

double vanilla(OptionType option, double strike, double spot)
{
  return option == OptionType::Call ? std::max(spot - strike, 0.0) : std::max(strike - spot, 0.0);
}

void require_positive(double v, const char* what)
{
  if (!(v > 0.0))
    throw std::invalid_argument(std::string(what) + " must be positive");
}

void require_on_grid(const std::vector<double>& dates, const SimGrid& grid, bool increasing)
{
  for (std::size_t i = 0; i < dates.size(); ++i) {
    grid.require_index(dates[i]);
    if (increasing && i && !(dates[i] > dates[i - 1]))
      throw std::invalid_argument("dates must be strictly increasing");
  }
}

} // namespace

AbdcContract AbdcContract::monthly(double nominal, double s0, double strike_frac, double up_out_frac,
                                   double down_in_frac, double coupon, double early_coupon, int months,
                                   int months_per_coupon)
{
  if (months <= 0 || months_per_coupon <= 0)
    throw std::invalid_argument("abdc: months and coupon period must be positive");
  AbdcContract c;
  c.nominal = nominal;
  c.strike = strike_frac * s0;
  c.barrier_up_out = up_out_frac * s0;
  c.barrier_down_in = down_in_frac * s0;
  c.coupon = coupon;
  c.early_coupon = early_coupon;
  for (int m = 1; m <= months; ++m) {
    c.fixing_dates.push_back(m / 12.0);
    if (m % months_per_coupon == 0)
      c.coupon_dates.push_back(m / 12.0);
  }
  c.expiry = months / 12.0;
  return c;
}

std::vector<std::string> AbdcContract::warnings(double s0) const
{
  std::vector<std::string> out;
  if (!(barrier_down_in < s0 && s0 < barrier_up_out))
    out.emplace_back("abdc: barriers do not bracket the initial spot (B_DI < S0 < B_UO)");
  for (double t : coupon_dates)
    if (t > max_dates(fixing_dates))
      out.emplace_back("abdc: coupon date beyond the fixing horizon");
  return out;
}

double last_date(const PayoffSpec& spec)
{
  return std::visit(overloaded{
                      [](const EuropeanCall&) { return 0.0; },
                      [](const EuropeanPut&) { return 0.0; },
                      [](const AsianFixed& a) { return max_dates(a.fixing_dates); },
                      [](const Barrier& b) { return max_dates(b.monitoring_dates); },
                      [](const DoubleKnockOutCall& d) { return max_dates(d.monitoring_dates); },
                      [](const AbdcContract& c) {
                        return std::max({ c.expiry, max_dates(c.fixing_dates), max_dates(c.coupon_dates) });
                      },
                    },
                    spec);
}

void check_dates(const PayoffSpec& spec, const SimGrid& grid)
{
  std::visit(overloaded{
               [](const EuropeanCall& c) { require_positive(c.strike, "strike"); },
               [](const EuropeanPut& p) { require_positive(p.strike, "strike"); },
               [&](const AsianFixed& a) {
                 require_positive(a.strike, "strike");
                 if (a.psi != 1 && a.psi != -1)
                   throw std::invalid_argument("asian: psi must be +1 or -1");
                 if (!a.continuous && a.fixing_dates.empty())
                   throw std::invalid_argument("asian: no fixing dates");
                 require_on_grid(a.fixing_dates, grid, false);
               },
               [&](const Barrier& b) {
                 require_positive(b.strike, "strike");
                 require_positive(b.barrier, "barrier");
                 require_on_grid(b.monitoring_dates, grid, false);
               },
               [&](const DoubleKnockOutCall& d) {
                 require_positive(d.strike, "strike");
                 require_positive(d.lower, "lower barrier");
                 require_positive(d.upper, "upper barrier");
                 require_on_grid(d.monitoring_dates, grid, false);
               },
               [&](const AbdcContract& c) {
                 require_positive(c.strike, "strike");
                 if (c.fixing_dates.empty())
                   throw std::invalid_argument("abdc: no fixing dates");
                 require_on_grid(c.fixing_dates, grid, true);
                 require_on_grid(c.coupon_dates, grid, true);
                 if (grid.require_index(c.expiry) != grid.n_steps())
                   throw std::invalid_argument("abdc: expiry must be the grid maturity");
               },
             },
             spec);
}

AbdcOutcome abdc_evaluate(const AbdcContract& c, const PathRecord& path)
{
  if (path.discount_d.size() == 0)
    throw std::invalid_argument("abdc: path has no discount column");

  constexpr int never = std::numeric_limits<int>::max();
  int er = never; // grid index of tau_ER
  int ki = never; // grid index of tau_KI
  for (double t : c.fixing_dates) {
    const int n = path_index(path, t);
    const double s = path.spot(n);
    if (ki == never && s <= c.barrier_down_in)
      ki = n;
    if (s >= c.barrier_up_out) {
      er = n;
      break;
    }
  }

  double pnl = 0.0;
  for (double t : c.coupon_dates) {
    const int n = path_index(path, t);
    if (n < er && path.spot(n) > c.barrier_down_in)
      pnl += path.discount_d(n) * c.coupon;
  }
  if (er != never)
    pnl += path.discount_d(er) * c.early_coupon;

  const int expiry = path_index(path, c.expiry);
  const bool put_live = ki <= expiry && er == never;
  if (put_live)
    pnl -= path.terminal_discount_d / c.strike * std::max(c.strike - path.spot(expiry), 0.0);

  return { 100.0 * pnl, er != never, ki <= expiry };
}

double payoff_value(const PayoffSpec& spec, const PathRecord& path)
{
  const double df = path.terminal_discount_d;
  const double s_T = path.terminal_spot();
  return std::visit(
    overloaded{
      [&](const EuropeanCall& c) { return df * std::max(s_T - c.strike, 0.0); },
      [&](const EuropeanPut& p) { return df * std::max(p.strike - s_T, 0.0); },
      [&](const AsianFixed& a) {
        double avg = 0.0;
        if (a.continuous) {
          for (int n = 0; n < path.n_steps; ++n)
            avg += 0.5 * (path.spot(n) + path.spot(n + 1));
          avg /= path.n_steps;
        } else {
          for (double t : a.fixing_dates)
            avg += path.spot(path_index(path, t));
          avg /= static_cast<double>(a.fixing_dates.size());
        }
        return df * std::max(a.psi * (avg - a.strike), 0.0);
      },
      [&](const Barrier& b) {
        const auto [lo, hi] = spot_range(path, b.monitoring_dates);
        bool hit = false;
        switch (b.kind) {
          case BarrierKind::UpOut:
          case BarrierKind::UpIn:
            hit = hi >= b.barrier;
            break;
          case BarrierKind::DownOut:
          case BarrierKind::DownIn:
            hit = lo <= b.barrier;
            break;
        }
        const bool knock_in = b.kind == BarrierKind::UpIn || b.kind == BarrierKind::DownIn;
        const bool alive = knock_in ? hit : !hit;
        return alive ? df * vanilla(b.option, b.strike, s_T) : 0.0;
      },
      [&](const DoubleKnockOutCall& d) {
        const auto [lo, hi] = spot_range(path, d.monitoring_dates);
        const bool alive = lo > d.lower && hi < d.upper;
        return alive ? df * std::max(s_T - d.strike, 0.0) : 0.0;
      },
      [&](const AbdcContract& c) { return abdc_value(c, path); },
    },
    spec);
}

std::string payoff_name(const PayoffSpec& spec)
{
  return std::visit(overloaded{
                      [](const EuropeanCall&) -> std::string { return "european_call"; },
                      [](const EuropeanPut&) -> std::string { return "european_put"; },
                      [](const AsianFixed&) -> std::string { return "asian_fixed"; },
                      [](const Barrier&) -> std::string { return "barrier"; },
                      [](const DoubleKnockOutCall&) -> std::string { return "double_knock_out_call"; },
                      [](const AbdcContract&) -> std::string { return "abdc"; },
                    },
                    spec);
}

} // namespace slvfx
