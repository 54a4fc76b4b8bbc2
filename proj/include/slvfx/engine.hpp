#ifndef SLVFX_ENGINE_HPP
#define SLVFX_ENGINE_HPP

#include "slvfx/payoffs.hpp"
#include "slvfx/simulator.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace slvfx {

struct EngineOptions
{
  int batch_size = 4096; ///< paths per batch; part of the reproducibility key
  int threads = 1;
};

struct PricingResult
{
  std::string payoff;
  double estimate = 0.0;
  double std_error = 0.0;
  double ci95_lo = 0.0;
  double ci95_hi = 0.0;
  std::int64_t n_paths = 0;
  int steps_per_year = 0;
  std::uint64_t seed = 0;
  double wall_time = 0.0; ///< seconds
  // ABDC only.
  std::optional<double> prob_early_redemption;
  std::optional<double> prob_knock_in;
};

/// Mean and sample variance, merged batch by batch in a fixed order.
class Accumulator
{
public:
  void add(double x);
  void merge(const Accumulator& other);

  std::int64_t count() const { return n_; }
  double mean() const { return mean_; }
  /// Unbiased sample variance; 0 below two samples.
  double variance() const;
  double std_error() const;

private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Runs `body(batch_index, first_path, n)` for every batch on up to
/// `threads` workers, then calls `reduce(batch_index)` in increasing order.
/// Any exception thrown by a batch is rethrown after the workers stop.
void run_batches(std::int64_t n_paths, int batch_size, int threads,
                 const std::function<void(std::int64_t, std::int64_t, std::int64_t)>& body,
                 const std::function<void(std::int64_t)>& reduce);

/// Monte Carlo price of one payoff; path p uses substream p of `seed`.
PricingResult price(const ModelParams& params, const SimGrid& grid, const PayoffSpec& spec, std::int64_t n_paths,
                    std::uint64_t seed, const EngineOptions& opts = {});

/// Several payoffs on the same paths.
std::vector<PricingResult> price_all(const ModelParams& params, const SimGrid& grid,
                                     std::span<const PayoffSpec> specs, std::int64_t n_paths, std::uint64_t seed,
                                     const EngineOptions& opts = {});

struct ConvergenceRow
{
  int steps_per_year = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::optional<double> diff;      ///< |previous estimate - estimate|
  std::optional<double> diff_std_error;
  std::optional<double> order;     ///< log2(diff_{i-1} / diff_i), from the third row
};

struct ConvergenceTable
{
  std::vector<ConvergenceRow> rows;
  std::int64_t n_paths = 0;
  std::uint64_t seed = 0;
};

/// Prices `spec` at every entry of `steps_list` on coupled paths: each path's
/// increments are drawn on the finest grid and summed down to the coarser
/// ones. Throws std::invalid_argument("dates not alignable") unless the list
/// increases, every entry divides the last, and every grid holds the maturity
/// and the payoff dates.
ConvergenceTable convergence_study(const ModelParams& params, double maturity, const PayoffSpec& spec,
                                   std::span<const int> steps_list, std::int64_t n_paths, std::uint64_t seed,
                                   const EngineOptions& opts = {});

struct StrongRow
{
  int steps_per_year = 0;           ///< coarse level; the fine level has twice as many steps
  double mean_abs_diff = 0.0;       ///< E|S_T(dt) - S_T(dt/2)|
  double std_error = 0.0;
};

/// Coupled L1 distance between terminal spots at consecutive halvings of the
/// step. `steps_list` is the coarse levels; each must double the previous.
std::vector<StrongRow> strong_convergence_study(const ModelParams& params, double maturity,
                                                std::span<const int> steps_list, std::int64_t n_paths,
                                                std::uint64_t seed, const EngineOptions& opts = {});

enum class ProbeProcess
{
  Variance,
  Domestic,
  Foreign,
};

/// Either E[sup_t y_bar^p] for one CIR factor, or E[exp(lambda int_0^T v_bar)].
struct MomentSelector
{
  enum class Kind
  {
    SupPower,
    ExpIntegral,
  };
  Kind kind = Kind::SupPower;
  ProbeProcess process = ProbeProcess::Variance;
  double p = 1.0;
  double lambda = 0.0;
};

struct MomentRow
{
  int steps_per_year = 0;
  double dt = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::optional<double> bound; ///< fte_exp_moment_bound for ExpIntegral inside the horizon
};

/// Moment estimates along the refinement ladder `steps_list` (coupled paths,
/// same constraints as convergence_study).
std::vector<MomentRow> moment_probe(const ModelParams& params, double maturity, const MomentSelector& selector,
                                    std::span<const int> steps_list, std::int64_t n_paths, std::uint64_t seed,
                                    const EngineOptions& opts = {});

/// One JSON document (stable key order): an object for one result, else an
/// array. wall_time is null unless `timing`, so repeated runs compare equal.
void write_result_json(std::ostream& os, std::span<const PricingResult> results, bool timing = false);
/// steps_per_year,estimate,std_error,diff,diff_std_error,order
void write_convergence_csv(std::ostream& os, const ConvergenceTable& table);
/// steps_per_year,mean_abs_diff,std_error
void write_strong_csv(std::ostream& os, std::span<const StrongRow> rows);
/// steps_per_year,dt,estimate,std_error,bound
void write_moment_csv(std::ostream& os, std::span<const MomentRow> rows);

} // namespace slvfx

#endif
