#ifndef SLVFX_SIMULATOR_HPP
#define SLVFX_SIMULATOR_HPP

#include "slvfx/drivers.hpp"
#include "slvfx/leverage.hpp"
#include "slvfx/model.hpp"

#include <iosfwd>
#include <vector>

namespace slvfx {

/// Which per-step columns to keep. Spot and the terminal discounts are always kept.
struct RecordSpec
{
  bool factors = true;   ///< v_bar, gd_bar, gf_bar
  bool discounts = true; ///< D^d_{t_n}, D^f_{t_n}
};

/// Grid values of one simulated path; columns have n_steps + 1 entries.
struct PathRecord
{
  double dt = 0.0;
  int n_steps = 0;
  VectorXd spot;
  VectorXd variance;
  VectorXd domestic;
  VectorXd foreign;
  VectorXd discount_d;
  VectorXd discount_f;
  double terminal_discount_d = 1.0;
  double terminal_discount_f = 1.0;

  double terminal_spot() const { return spot(n_steps); }
};

/// Full-truncation Euler for v, g^d, g^f and log-Euler for log S on a fixed
/// grid. Step n reads sigma(t_n, S_n), then advances v, g^d, g^f (with the
/// quanto term) and x, all from the state at t_n. Discount exponents add
/// g_bar(t_n) dt plus the exact integral of the shift over the step.
class PathSimulator
{
public:
  PathSimulator(const ModelParams& params, const SimGrid& grid);

  const ModelParams& params() const { return params_; }
  const SimGrid& grid() const { return grid_; }
  /// Lower Cholesky factor of the correlation matrix.
  const Matrix4d& chol() const { return chol_; }

  /// `block` must have grid().n_steps() rows.
  void simulate(const IncrementBlock& block, PathRecord& out, const RecordSpec& spec = {}) const;

private:
  ModelParams params_;
  SimGrid grid_;
  Matrix4d chol_;
  std::vector<LeverageSurface::Slice> sigma_slices_;
  VectorXd h_int_;   ///< int of h_d - h_f over each step
  VectorXd hd_int_;  ///< int of h_d over each step
  VectorXd hf_int_;  ///< int of h_f over each step
};

PathRecord simulate_path(const ModelParams& params, const SimGrid& grid, const IncrementBlock& block,
                         const RecordSpec& spec = {});

/// Debug dump: header t,S,v,gd,gf then one row per grid point.
void write_path_csv(std::ostream& os, const PathRecord& path);

} // namespace slvfx

#endif
