#ifndef SLVFX_DRIVERS_HPP
#define SLVFX_DRIVERS_HPP

#include "slvfx/fwd.hpp"

#include <array>
#include <cstdint>
#include <optional>

namespace slvfx {

class CorrelationMatrix;

/// Evenly spaced grid t_n = n dt, n = 0..N, with N dt = T.
class SimGrid
{
public:
  /// N = T * steps_per_year, which must be a whole number (to 1e-9).
  SimGrid(double maturity, int steps_per_year);

  double maturity() const { return maturity_; }
  int steps_per_year() const { return steps_per_year_; }
  int n_steps() const { return n_steps_; }
  double dt() const { return dt_; }
  double time(int n) const { return n == n_steps_ ? maturity_ : n * dt_; }

  /// Grid index of `t`, or nullopt when t is not a grid point in [0, T].
  std::optional<int> index_of(double t) const;
  /// As index_of but throws std::invalid_argument("date not on grid").
  int require_index(double t) const;

private:
  double maturity_;
  int steps_per_year_;
  int n_steps_;
  double dt_;
};

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
struct Philox4x32
{
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key);
};

/// Standard normal quantile, Wichura's AS241 (PPND16); about 1e-16 relative
/// accuracy on (0, 1).
double normal_quantile(double p);

/// Correlated Brownian increments for one path: row n holds
/// (dW^s, dW^v, dW^d, dW^f) over [t_n, t_{n+1}].
struct IncrementBlock
{
  StepMat<double> values;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  int n_steps() const { return static_cast<int>(values.rows()); }
};

/// Fills `block` with sqrt(dt) L z_n, z_n i.i.d. N(0, I_4). The output is a
/// pure function of (seed, stream, n_steps, dt, L): entry (n, i) uses Philox
/// counter (n, stream_lo, stream_hi, i / 2) under key (seed_lo, seed_hi).
void sample_block(std::uint64_t seed, std::uint64_t stream, const SimGrid& grid, const Matrix4d& chol_lower,
                  IncrementBlock& block);
IncrementBlock sample_block(std::uint64_t seed, std::uint64_t stream, const SimGrid& grid,
                            const CorrelationMatrix& corr);

/// Sums groups of `factor` consecutive rows: the increments of the same
/// Brownian path on a grid `factor` times coarser.
void coarsen(const IncrementBlock& fine, int factor, IncrementBlock& coarse);

} // namespace slvfx

#endif
