#include "slvfx/drivers.hpp"

#include "slvfx/cholesky.hpp"
#include "slvfx/model.hpp"

#include <cmath>
#include <stdexcept>

namespace slvfx {

// --- SimGrid ---------------------------------------------------------------

SimGrid::SimGrid(double maturity, int steps_per_year)
  : maturity_(maturity)
  , steps_per_year_(steps_per_year)
{
  if (!(maturity > 0.0) || !std::isfinite(maturity))
    throw std::invalid_argument("grid: maturity must be positive");
  if (steps_per_year <= 0)
    throw std::invalid_argument("grid: steps_per_year must be positive");
  const double n = maturity * steps_per_year;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-9 * std::max(1.0, n) || rounded < 1.0)
    throw std::invalid_argument("grid: maturity is not a whole number of steps");
  n_steps_ = static_cast<int>(rounded);
  dt_ = maturity / n_steps_;
}

std::optional<int> SimGrid::index_of(double t) const
{
  const double n = t / dt_;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-9 * std::max(1.0, std::abs(n)) || rounded < 0.0 || rounded > n_steps_)
    return std::nullopt;
  return static_cast<int>(rounded);
}

int SimGrid::require_index(double t) const
{
  if (auto n = index_of(t))
    return *n;
  throw std::invalid_argument("date not on grid");
}

// --- Philox4x32-10 ---------------------------------------------------------

Philox4x32::Counter Philox4x32::generate(Counter c, Key k)
{
  constexpr std::uint64_t m0 = 0xD2511F53u;
  constexpr std::uint64_t m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u;
  constexpr std::uint32_t w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round) {
      k[0] += w0;
      k[1] += w1;
    }
    const std::uint64_t p0 = m0 * c[0];
    const std::uint64_t p1 = m1 * c[2];
    c = { static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
          static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0) };
  }
  return c;
}

// --- AS241 -----------------------------------------------------------------

double normal_quantile(double p)
{
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0)
      return -HUGE_VAL;
    if (p == 1.0)
      return HUGE_VAL;
    return std::nan("");
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
      (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r + 6.7265770927008700853e+4) * r +
           4.5921953931549871457e+4) * r + 1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
        1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    const double den =
      (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r + 3.9307895800092710610e+4) * r +
           2.1213794301586595867e+4) * r + 5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
        4.2313330701600911252e+1) * r + 1.0);
    return q * num / den;
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
      (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r + 2.41780725177450611770e-1) * r +
           1.27045825245236838258e+0) * r + 3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
        4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
    const double den =
      (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r + 1.51986665636164571966e-2) * r +
           1.48103976427480074590e-1) * r + 6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
        2.05319162663775882187e+0) * r + 1.0);
    value = num / den;
  } else {
    r -= 5.0;
    const double num =
      (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 1.24266094738807843860e-3) * r +
           2.65321895265761230930e-2) * r + 2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
        5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
    const double den =
      (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r + 1.84631831751005468180e-5) * r +
           7.86869131145613259100e-4) * r + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
        5.99832206555887937690e-1) * r + 1.0);
    value = num / den;
  }
  return q < 0.0 ? -value : value;
}

// --- increments ------------------------------------------------------------

namespace {

// 53 random bits mapped to the open interval (0, 1).
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo)
{
  const std::uint64_t bits = ((std::uint64_t(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

} // namespace

void sample_block(std::uint64_t seed, std::uint64_t stream, const SimGrid& grid, const Matrix4d& chol_lower,
                  IncrementBlock& block)
{
  const int n_steps = grid.n_steps();
  const double sqrt_dt = std::sqrt(grid.dt());
  block.seed = seed;
  block.stream = stream;
  block.values.resize(n_steps, kFactors);

  const Philox4x32::Key key = { static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32) };
  const auto s_lo = static_cast<std::uint32_t>(stream);
  const auto s_hi = static_cast<std::uint32_t>(stream >> 32);
  const Matrix4d scaled = sqrt_dt * chol_lower.triangularView<Eigen::Lower>().toDenseMatrix();
  const Eigen::Matrix<double, 4, 4, Eigen::RowMajor> scaled_t = scaled;

  Vector4d z;
  for (int n = 0; n < n_steps; ++n) {
    const auto a = Philox4x32::generate({ static_cast<std::uint32_t>(n), s_lo, s_hi, 0u }, key);
    const auto b = Philox4x32::generate({ static_cast<std::uint32_t>(n), s_lo, s_hi, 1u }, key);
    z(0) = normal_quantile(to_open_unit(a[0], a[1]));
    z(1) = normal_quantile(to_open_unit(a[2], a[3]));
    z(2) = normal_quantile(to_open_unit(b[0], b[1]));
    z(3) = normal_quantile(to_open_unit(b[2], b[3]));
    block.values.row(n).noalias() = (scaled_t * z).transpose();
  }
}

IncrementBlock sample_block(std::uint64_t seed, std::uint64_t stream, const SimGrid& grid,
                            const CorrelationMatrix& corr)
{
  IncrementBlock block;
  sample_block(seed, stream, grid, cholesky_lower(corr.matrix()), block);
  return block;
}

void coarsen(const IncrementBlock& fine, int factor, IncrementBlock& coarse)
{
  if (factor <= 0 || fine.n_steps() % factor != 0)
    throw std::invalid_argument("coarsen: factor must divide the number of steps");
  const int n = fine.n_steps() / factor;
  coarse.seed = fine.seed;
  coarse.stream = fine.stream;
  coarse.values.resize(n, kFactors);
  for (int i = 0; i < n; ++i)
    coarse.values.row(i) = fine.values.middleRows(i * factor, factor).colwise().sum();
}

} // namespace slvfx
