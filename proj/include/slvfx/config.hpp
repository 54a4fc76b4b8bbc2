#ifndef SLVFX_CONFIG_HPP
#define SLVFX_CONFIG_HPP

#include "slvfx/engine.hpp"
#include "slvfx/model.hpp"
#include "slvfx/payoffs.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace slvfx {

/// Bad configuration or model input; the CLI maps it to exit code 2.
class ValidationError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Where the leverage surface comes from: a CSV file or a flat level.
struct LeverageSource
{
  std::optional<std::string> file; ///< as written in the config
  double constant = 1.0;
};

struct JobConfig
{
  ModelParams model; ///< leverage left empty until load_leverage()
  LeverageSource leverage;
  double maturity = 1.0;
  int steps_per_year = 12;
  std::vector<PayoffSpec> payoffs;
  std::int64_t n_paths = 10000;
  std::uint64_t seed = 0;
  int batch_size = 4096;
  std::vector<int> converge_steps;
  MomentSelector moment;
  std::vector<int> moment_steps;
  std::optional<std::string> out;
  std::optional<std::string> dump_paths;
  std::string base_dir; ///< directory relative file names resolve against; not serialized
};

/// Parses a JSON job. Keys may be nested objects or flat dotted paths
/// ("model.variance.kappa"). Throws ValidationError on malformed input.
JobConfig parse_config(const std::string& text, const std::string& base_dir = "");
JobConfig load_config(const std::string& path);

/// Canonical nested JSON with a fixed key order; parse_config(dump_config(j))
/// reproduces j.
std::string dump_config(const JobConfig& job);

/// Resolved leverage file path, or nullopt for a constant surface.
std::optional<std::string> leverage_path(const JobConfig& job);

/// Loads the surface into job.model.leverage. A missing file raises
/// ValidationError naming the path.
void load_leverage(JobConfig& job);

/// validate() plus the payoff date checks; ValidationError lists every problem.
/// Returns the warnings.
std::vector<std::string> check_job(const JobConfig& job);

/// SEED from the environment, if set. Throws ValidationError unless it is an
/// unsigned decimal integer.
std::optional<std::uint64_t> seed_from_env();

} // namespace slvfx

#endif
