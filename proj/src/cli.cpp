#include "slvfx/cli.hpp"

#include "slvfx/analytics.hpp"
#include "slvfx/config.hpp"
#include "slvfx/engine.hpp"
#include "slvfx/leverage.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>

namespace slvfx {

namespace {

constexpr const char* kFooter = R"(Outputs (CSV: header row, ',' separator, '.' decimal, LF):
  price         JSON: payoff, estimate, std_error, ci95 [lo, hi], n_paths,
                steps_per_year, seed, wall_time (null unless --timing),
                prob_early_redemption / prob_knock_in for ABDC notes
  converge      steps_per_year,estimate,std_error,diff,diff_std_error,order
  converge --strong
                steps_per_year,mean_abs_diff,std_error
  analytics     alpha,k,xi,sigma_max,zeta,lambda,t_star_L1,t_star_calibration,
                explosion_time_exact_cir,explosion_time_fte_cir,
                t_star_moments_exact,t_star_moments_fte,feller ("inf" for
                unbounded horizons, feller "na" without --theta)
  leverage      K,leverage,leverage_sq,estimator
  moment-probe  steps_per_year,dt,estimate,std_error,bound
  --dump-paths  DIR/batch_<b>.csv per batch: t,S,v,gd,gf of its first path
Exit codes: 0 success, 2 validation error, 3 runtime error.
Environment: SEED overrides the config seed (--seed overrides both).)";

std::string fmt(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Options
{
  std::string config;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out;
  bool dump_config = false;
  bool timing = false;
  std::string dump_paths;
  std::vector<int> steps;
  bool strong = false;

  // analytics
  double alpha = 2.0;
  double k = 0.0;
  double xi = 0.0;
  double sigma_max = 1.0;
  std::optional<double> theta;
  std::optional<double> lambda;

  // leverage
  std::string cloud_file;
  std::string sigma_lv_file;
  std::vector<double> strikes;
  std::optional<double> maturity;
  std::size_t min_bin = 50;
  double fraction = 0.01;

  // moment-probe
  std::string kind;
  std::string process;
  std::optional<double> p;
};

// Report sink: --out file when given, else the caller's stream.
class Sink
{
public:
  Sink(const std::string& path, std::ostream& fallback)
  {
    if (path.empty()) {
      os_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_)
        throw std::runtime_error("cannot open output file: " + path);
      os_ = file_.get();
    }
  }
  std::ostream& operator*() { return *os_; }

private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

JobConfig prepare_job(const Options& o, std::ostream& out, bool& done)
{
  if (o.config.empty())
    throw ValidationError("--config is required");
  JobConfig job = load_config(o.config);
  if (const auto s = seed_from_env())
    job.seed = *s;
  if (o.seed)
    job.seed = *o.seed;
  if (!o.out.empty())
    job.out = o.out;
  if (!o.dump_paths.empty())
    job.dump_paths = o.dump_paths;
  if (o.dump_config) {
    Sink sink(o.out, out);
    *sink << dump_config(job);
    done = true;
    return job;
  }
  load_leverage(job);
  done = false;
  return job;
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err)
{
  for (const auto& w : warnings)
    err << "warning: " << w << '\n';
}

EngineOptions engine_options(const JobConfig& job, const Options& o)
{
  if (o.threads < 1)
    throw ValidationError("--threads must be at least 1");
  return { job.batch_size, o.threads };
}

void dump_batch_paths(const JobConfig& job, const SimGrid& grid)
{
  const std::filesystem::path dir(*job.dump_paths);
  std::filesystem::create_directories(dir);
  const PathSimulator sim(job.model, grid);
  IncrementBlock block;
  PathRecord path;
  const std::int64_t n_batches = (job.n_paths + job.batch_size - 1) / job.batch_size;
  for (std::int64_t b = 0; b < n_batches; ++b) {
    sample_block(job.seed, std::uint64_t(b * job.batch_size), grid, sim.chol(), block);
    sim.simulate(block, path);
    std::ofstream f(dir / ("batch_" + std::to_string(b) + ".csv"), std::ios::binary);
    if (!f)
      throw std::runtime_error("cannot write path dump in " + dir.string());
    write_path_csv(f, path);
  }
}

int cmd_price(const Options& o, std::ostream& out, std::ostream& err)
{
  bool done = false;
  JobConfig job = prepare_job(o, out, done);
  if (done)
    return kExitOk;
  print_warnings(check_job(job), err);
  if (job.payoffs.empty())
    throw ValidationError("config has no payoff");
  const SimGrid grid(job.maturity, job.steps_per_year);
  const auto results = price_all(job.model, grid, job.payoffs, job.n_paths, job.seed, engine_options(job, o));
  Sink sink(job.out.value_or(""), out);
  write_result_json(*sink, results, o.timing);
  if (job.dump_paths)
    dump_batch_paths(job, grid);
  return kExitOk;
}

int cmd_converge(const Options& o, std::ostream& out, std::ostream& err)
{
  bool done = false;
  JobConfig job = prepare_job(o, out, done);
  if (done)
    return kExitOk;
  print_warnings(check_job(job), err);
  const std::vector<int> steps = o.steps.empty() ? job.converge_steps : o.steps;
  if (steps.empty())
    throw ValidationError("no steps given (--steps or converge.steps)");
  const EngineOptions eo = engine_options(job, o);
  Sink sink(job.out.value_or(""), out);
  if (o.strong) {
    const auto rows = strong_convergence_study(job.model, job.maturity, steps, job.n_paths, job.seed, eo);
    write_strong_csv(*sink, rows);
  } else {
    if (job.payoffs.empty())
      throw ValidationError("config has no payoff");
    const auto table = convergence_study(job.model, job.maturity, job.payoffs.front(), steps, job.n_paths,
                                         job.seed, eo);
    write_convergence_csv(*sink, table);
  }
  return kExitOk;
}

int cmd_moment_probe(const Options& o, std::ostream& out, std::ostream& err)
{
  bool done = false;
  JobConfig job = prepare_job(o, out, done);
  if (done)
    return kExitOk;
  print_warnings(check_job(job), err);
  MomentSelector sel = job.moment;
  if (o.kind == "sup_power")
    sel.kind = MomentSelector::Kind::SupPower;
  else if (o.kind == "exp_integral")
    sel.kind = MomentSelector::Kind::ExpIntegral;
  if (o.process == "variance")
    sel.process = ProbeProcess::Variance;
  else if (o.process == "domestic")
    sel.process = ProbeProcess::Domestic;
  else if (o.process == "foreign")
    sel.process = ProbeProcess::Foreign;
  if (o.p)
    sel.p = *o.p;
  if (o.lambda)
    sel.lambda = *o.lambda;
  const std::vector<int> steps = o.steps.empty() ? job.moment_steps : o.steps;
  if (steps.empty())
    throw ValidationError("no steps given (--steps or moment_probe.steps)");
  const auto rows = moment_probe(job.model, job.maturity, sel, steps, job.n_paths, job.seed, engine_options(job, o));
  Sink sink(job.out.value_or(""), out);
  write_moment_csv(*sink, rows);
  return kExitOk;
}

int cmd_analytics(const Options& o, std::ostream& out)
{
  if (!(o.k >= 0.0) || !(o.xi > 0.0) || !(o.sigma_max > 0.0))
    throw ValidationError("analytics: need k >= 0, xi > 0, sigma_max > 0");
  const double z = zeta(o.xi, o.sigma_max);
  const double lam = o.lambda ? *o.lambda : lambda_for(phi(o.alpha), z, o.xi);
  const CirParams cir{ 0.0, o.k, o.theta.value_or(0.0), o.xi };
  std::string feller = "na";
  if (o.theta)
    feller = cir.feller_satisfied() ? "true" : "false";

  Sink sink(o.out, out);
  *sink << "alpha,k,xi,sigma_max,zeta,lambda,t_star_L1,t_star_calibration,explosion_time_exact_cir,"
           "explosion_time_fte_cir,t_star_moments_exact,t_star_moments_fte,feller\n";
  *sink << fmt(o.alpha) << ',' << fmt(o.k) << ',' << fmt(o.xi) << ',' << fmt(o.sigma_max) << ',' << fmt(z) << ','
        << fmt(lam) << ',' << t_star_L1(o.k, z).to_string() << ',' << t_star_calibration(o.k, z).to_string() << ','
        << explosion_time_exact_cir(cir, lam).to_string() << ',' << explosion_time_fte_cir(cir, lam).to_string()
        << ',' << t_star_moments_exact(o.alpha, o.k, z).to_string() << ','
        << t_star_moments_fte(o.alpha, o.k, z).to_string() << ',' << feller << '\n';
  return kExitOk;
}

struct LocalVolRow
{
  double strike;
  double sigma_lv;
  std::optional<MarketTerms> market;
};

// K,sigma_lv[,d2c_dk2,f_d,f_f]
std::vector<LocalVolRow> read_local_vol(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open local-vol file: " + path);
  std::vector<LocalVolRow> rows;
  std::string line;
  std::getline(in, line); // header
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    std::vector<double> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
      try {
        cells.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ValidationError("local-vol file " + path + ": bad number '" + cell + "'");
      }
    }
    if (cells.size() == 2)
      rows.push_back({ cells[0], cells[1], std::nullopt });
    else if (cells.size() == 5)
      rows.push_back({ cells[0], cells[1], MarketTerms{ cells[3], cells[4], cells[2] } });
    else
      throw ValidationError("local-vol file " + path + ": expected 2 or 5 columns");
    if (rows.size() > 1 && !(rows.back().strike > rows[rows.size() - 2].strike))
      throw ValidationError("local-vol file " + path + ": strikes must increase");
  }
  if (rows.empty())
    throw ValidationError("local-vol file " + path + " has no rows");
  return rows;
}

// Linear interpolation in K, flat outside the table.
LocalVolRow interpolate(const std::vector<LocalVolRow>& rows, double strike)
{
  if (strike <= rows.front().strike)
    return { strike, rows.front().sigma_lv, rows.front().market };
  if (strike >= rows.back().strike)
    return { strike, rows.back().sigma_lv, rows.back().market };
  std::size_t i = 1;
  while (rows[i].strike < strike)
    ++i;
  const auto& a = rows[i - 1];
  const auto& b = rows[i];
  const double w = (strike - a.strike) / (b.strike - a.strike);
  auto lerp = [w](double x, double y) { return (1.0 - w) * x + w * y; };
  LocalVolRow r{ strike, lerp(a.sigma_lv, b.sigma_lv), std::nullopt };
  if (a.market && b.market)
    r.market = MarketTerms{ lerp(a.market->forward_rate_d, b.market->forward_rate_d),
                            lerp(a.market->forward_rate_f, b.market->forward_rate_f),
                            lerp(a.market->call_density, b.market->call_density) };
  return r;
}

int cmd_leverage(const Options& o, std::ostream& out)
{
  std::ifstream cf(o.cloud_file);
  if (!cf)
    throw ValidationError("cannot open particle file: " + o.cloud_file);
  ParticleCloud cloud;
  try {
    cloud = read_cloud(cf);
  } catch (const std::invalid_argument& e) {
    throw ValidationError("particle file " + o.cloud_file + ": " + e.what());
  }
  const auto table = read_local_vol(o.sigma_lv_file);
  const BinningConfig binning{ o.min_bin, o.fraction };

  Sink sink(o.out, out);
  *sink << "K,leverage,leverage_sq,estimator\n";
  for (double strike : o.strikes) {
    const LocalVolRow lv = interpolate(table, strike);
    double sq = 0.0;
    const char* method = "det_rates";
    if (lv.market) {
      if (!o.maturity)
        throw ValidationError("--maturity is required with market density columns");
      sq = estimate_leverage_full(cloud, lv.sigma_lv, strike, *o.maturity, *lv.market, binning);
      method = "full";
    } else {
      const double lev = estimate_leverage_det_rates(cloud, lv.sigma_lv, strike, binning);
      sq = lev * lev;
    }
    *sink << fmt(strike) << ',' << (sq >= 0.0 ? fmt(std::sqrt(sq)) : std::string()) << ',' << fmt(sq) << ','
          << method << '\n';
  }
  return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{ "Monte Carlo pricing for the Heston-2CIR++ stochastic local volatility FX model", "slvfx" };
  app.footer(kFooter);
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "Job configuration (JSON)");
    sub->add_option("--seed", o.seed, "RNG seed (overrides config and SEED)");
    sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "Output file (default: stdout)");
    sub->add_flag("--dump-config", o.dump_config, "Print the canonical config and exit");
  };

  auto* price_cmd = app.add_subcommand("price", "Price the configured payoffs");
  common(price_cmd);
  price_cmd->add_flag("--timing", o.timing, "Report wall time in the JSON");
  price_cmd->add_option("--dump-paths", o.dump_paths, "Directory for per-batch path dumps");

  auto* conv_cmd = app.add_subcommand("converge", "Coupled step-size convergence study");
  common(conv_cmd);
  conv_cmd->add_option("--steps", o.steps, "Steps per year, increasing")->delimiter(',');
  conv_cmd->add_flag("--strong", o.strong, "E|S_T(dt) - S_T(dt/2)| instead of prices");

  auto* an_cmd = app.add_subcommand("analytics", "Critical maturities and explosion times");
  an_cmd->add_option("--alpha", o.alpha, "Moment order (>= 1)");
  an_cmd->add_option("--k", o.k, "Variance mean reversion")->required();
  an_cmd->add_option("--xi", o.xi, "Vol of variance")->required();
  an_cmd->add_option("--sigma-max", o.sigma_max, "Leverage bound")->required();
  an_cmd->add_option("--theta", o.theta, "Variance mean level (Feller flag)");
  an_cmd->add_option("--lambda", o.lambda, "Exponential level for the explosion times");
  an_cmd->add_option("--out", o.out, "Output file (default: stdout)");

  auto* lev_cmd = app.add_subcommand("leverage", "Leverage estimates from a particle cloud");
  lev_cmd->add_option("--cloud", o.cloud_file, "Particle CSV (S,v,D,rd,rf[,w])")->required();
  lev_cmd->add_option("--sigma-lv", o.sigma_lv_file, "Local vol CSV (K,sigma_lv[,d2c_dk2,f_d,f_f])")->required();
  lev_cmd->add_option("--strikes", o.strikes, "Strikes")->delimiter(',')->required();
  lev_cmd->add_option("--maturity", o.maturity, "Maturity of the cloud (full estimator)");
  lev_cmd->add_option("--min-bin", o.min_bin, "Minimum particles per bin");
  lev_cmd->add_option("--bin-fraction", o.fraction, "Bin size as a fraction of the cloud");
  lev_cmd->add_option("--out", o.out, "Output file (default: stdout)");

  auto* mp_cmd = app.add_subcommand("moment-probe", "Moment estimates across step sizes");
  common(mp_cmd);
  mp_cmd->add_option("--steps", o.steps, "Steps per year, increasing")->delimiter(',');
  mp_cmd->add_option("--kind", o.kind, "sup_power | exp_integral")
    ->check(CLI::IsMember({ "sup_power", "exp_integral" }));
  mp_cmd->add_option("--process", o.process, "variance | domestic | foreign")
    ->check(CLI::IsMember({ "variance", "domestic", "foreign" }));
  mp_cmd->add_option("--p", o.p, "Power for sup_power");
  mp_cmd->add_option("--lambda", o.lambda, "Level for exp_integral");

  std::vector<const char*> argv;
  for (const auto& a : args)
    argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (price_cmd->parsed())
      return cmd_price(o, out, err);
    if (conv_cmd->parsed())
      return cmd_converge(o, out, err);
    if (mp_cmd->parsed())
      return cmd_moment_probe(o, out, err);
    if (an_cmd->parsed())
      return cmd_analytics(o, out);
    if (lev_cmd->parsed())
      return cmd_leverage(o, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

} // namespace slvfx
