#include "slvfx/simulator.hpp"

#include "slvfx/cholesky.hpp"
#include "slvfx/scheme.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace slvfx {

PathSimulator::PathSimulator(const ModelParams& params, const SimGrid& grid)
  : params_(params)
  , grid_(grid)
  , chol_(cholesky_lower(params.corr.matrix()))
{
  if (!params_.leverage)
    throw std::invalid_argument("simulator: no leverage surface attached");
  const int n = grid_.n_steps();
  sigma_slices_.reserve(std::size_t(n));
  h_int_.resize(n);
  hd_int_.resize(n);
  hf_int_.resize(n);
  for (int i = 0; i < n; ++i) {
    const double t0 = grid_.time(i);
    const double t1 = grid_.time(i + 1);
    sigma_slices_.push_back(params_.leverage->slice(t0));
    hd_int_(i) = params_.shift_d.integral(t0, t1);
    hf_int_(i) = params_.shift_f.integral(t0, t1);
    h_int_(i) = hd_int_(i) - hf_int_(i);
  }
}

void PathSimulator::simulate(const IncrementBlock& block, PathRecord& out, const RecordSpec& spec) const
{
  const int n_steps = grid_.n_steps();
  if (block.n_steps() != n_steps)
    throw std::invalid_argument("simulate: increment block does not match grid");

  const double dt = grid_.dt();
  const CirParams& var = params_.variance;
  const CirParams& dom = params_.domestic;
  const CirParams& fgn = params_.foreign;
  const double rho_sf = params_.corr.rho_sf();

  out.dt = dt;
  out.n_steps = n_steps;
  out.spot.resize(n_steps + 1);
  if (spec.factors) {
    out.variance.resize(n_steps + 1);
    out.domestic.resize(n_steps + 1);
    out.foreign.resize(n_steps + 1);
  } else {
    out.variance.resize(0);
    out.domestic.resize(0);
    out.foreign.resize(0);
  }
  if (spec.discounts) {
    out.discount_d.resize(n_steps + 1);
    out.discount_f.resize(n_steps + 1);
  } else {
    out.discount_d.resize(0);
    out.discount_f.resize(0);
  }

  PathState<double> s;
  s.v_tilde = var.y0;
  s.gd_tilde = dom.y0;
  s.gf_tilde = fgn.y0;
  s.x_bar = std::log(params_.s0);

  auto record = [&](int n, double spot) {
    out.spot(n) = spot;
    if (spec.factors) {
      out.variance(n) = s.v_bar();
      out.domestic(n) = s.gd_bar();
      out.foreign(n) = s.gf_bar();
    }
    if (spec.discounts) {
      out.discount_d(n) = std::exp(-s.int_rd);
      out.discount_f(n) = std::exp(-s.int_rf);
    }
  };

  double spot = params_.s0;
  for (int n = 0; n < n_steps; ++n) {
    record(n, spot);
    const auto dw = block.values.row(n);
    const double v_bar = s.v_bar();
    const double gd_bar = s.gd_bar();
    const double gf_bar = s.gf_bar();
    const double sigma_n = sigma_slices_[std::size_t(n)](spot);

    s.v_tilde = fte_step(s.v_tilde, var, dw(kVariance), dt);
    s.gd_tilde = fte_step(s.gd_tilde, dom, dw(kDomestic), dt);
    s.gf_tilde = fte_foreign_step(s.gf_tilde, fgn, v_bar, sigma_n, rho_sf, dw(kForeign), dt);
    s.x_bar = log_euler_step(s.x_bar, gd_bar, gf_bar, h_int_(n), sigma_n, v_bar, dw(kSpot), dt);
    s.int_rd += gd_bar * dt + hd_int_(n);
    s.int_rf += gf_bar * dt + hf_int_(n);
    s.step = n + 1;
    spot = std::exp(s.x_bar);
  }
  record(n_steps, spot);
  out.terminal_discount_d = std::exp(-s.int_rd);
  out.terminal_discount_f = std::exp(-s.int_rf);
}

PathRecord simulate_path(const ModelParams& params, const SimGrid& grid, const IncrementBlock& block,
                         const RecordSpec& spec)
{
  PathRecord out;
  PathSimulator(params, grid).simulate(block, out, spec);
  return out;
}

void write_path_csv(std::ostream& os, const PathRecord& path)
{
  os << "t,S,v,gd,gf\n";
  const bool factors = path.variance.size() != 0;
  char buf[160];
  for (int n = 0; n <= path.n_steps; ++n) {
    const double t = n * path.dt;
    if (factors)
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", t, path.spot(n), path.variance(n),
                    path.domestic(n), path.foreign(n));
    else
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,,,\n", t, path.spot(n));
    os << buf;
  }
}

} // namespace slvfx
