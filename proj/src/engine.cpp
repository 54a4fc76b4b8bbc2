#include "slvfx/engine.hpp"

#include "slvfx/analytics.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace slvfx {

// --- Accumulator -----------------------------------------------------------

void Accumulator::add(double x)
{
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void Accumulator::merge(const Accumulator& o)
{
  if (o.n_ == 0)
    return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(o.n_);
  const double n = na + nb;
  const double delta = o.mean_ - mean_;
  mean_ += delta * nb / n;
  m2_ += o.m2_ + delta * delta * na * nb / n;
  n_ += o.n_;
}

double Accumulator::variance() const
{
  return n_ < 2 ? 0.0 : std::max(m2_, 0.0) / static_cast<double>(n_ - 1);
}

double Accumulator::std_error() const
{
  return n_ == 0 ? 0.0 : std::sqrt(variance() / static_cast<double>(n_));
}

// --- batching --------------------------------------------------------------

void run_batches(std::int64_t n_paths, int batch_size, int threads,
                 const std::function<void(std::int64_t, std::int64_t, std::int64_t)>& body,
                 const std::function<void(std::int64_t)>& reduce)
{
  if (batch_size <= 0)
    throw std::invalid_argument("batch_size must be positive");
  const std::int64_t n_batches = (n_paths + batch_size - 1) / batch_size;
  auto run_one = [&](std::int64_t b) {
    const std::int64_t first = b * batch_size;
    body(b, first, std::min<std::int64_t>(batch_size, n_paths - first));
  };

  const auto workers = static_cast<int>(std::clamp<std::int64_t>(threads, 1, std::max<std::int64_t>(n_batches, 1)));
  if (workers == 1) {
    for (std::int64_t b = 0; b < n_batches; ++b)
      run_one(b);
  } else {
    std::atomic<std::int64_t> next{ 0 };
    std::atomic<bool> failed{ false };
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(std::size_t(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::int64_t b; !failed && (b = next++) < n_batches;) {
          try {
            run_one(b);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error)
              error = std::current_exception();
            failed = true;
          }
        }
      });
    pool.clear();
    if (error)
      std::rethrow_exception(error);
  }
  for (std::int64_t b = 0; b < n_batches; ++b)
    reduce(b);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void require_paths(std::int64_t n_paths, const EngineOptions& opts)
{
  if (n_paths < 2)
    throw std::invalid_argument("n_paths too small");
  if (opts.batch_size <= 0)
    throw std::invalid_argument("batch_size must be positive");
}

PricingResult make_result(const std::string& name, const Accumulator& acc, std::int64_t n_paths, int spy,
                          std::uint64_t seed)
{
  PricingResult r;
  r.payoff = name;
  r.estimate = acc.mean();
  r.std_error = acc.std_error();
  r.ci95_lo = r.estimate - 1.96 * r.std_error;
  r.ci95_hi = r.estimate + 1.96 * r.std_error;
  r.n_paths = n_paths;
  r.steps_per_year = spy;
  r.seed = seed;
  return r;
}

// Coupled refinement ladder: path increments are drawn on the finest grid
// and summed down to each level.
struct Ladder
{
  std::vector<SimGrid> grids;
  std::vector<int> factors; ///< finest steps / level steps
  std::vector<PathSimulator> sims;

  Ladder(const ModelParams& params, double maturity, std::span<const int> steps_list)
  {
    if (steps_list.empty())
      throw std::invalid_argument("dates not alignable");
    const int finest = steps_list.back();
    for (std::size_t i = 0; i < steps_list.size(); ++i) {
      const int s = steps_list[i];
      if (s <= 0 || (i && s <= steps_list[i - 1]) || finest % s != 0)
        throw std::invalid_argument("dates not alignable");
      try {
        grids.emplace_back(maturity, s);
      } catch (const std::invalid_argument&) {
        throw std::invalid_argument("dates not alignable");
      }
      factors.push_back(finest / s);
    }
    for (const auto& g : grids)
      sims.emplace_back(params, g);
  }

  std::size_t size() const { return grids.size(); }

  // Per-worker scratch space.
  struct Work
  {
    IncrementBlock fine;
    IncrementBlock coarse;
    std::vector<PathRecord> paths;
  };

  void simulate(std::uint64_t seed, std::int64_t path, Work& w, const RecordSpec& spec) const
  {
    w.paths.resize(size());
    sample_block(seed, std::uint64_t(path), grids.back(), sims.back().chol(), w.fine);
    for (std::size_t l = 0; l < size(); ++l) {
      if (factors[l] == 1) {
        sims[l].simulate(w.fine, w.paths[l], spec);
      } else {
        coarsen(w.fine, factors[l], w.coarse);
        sims[l].simulate(w.coarse, w.paths[l], spec);
      }
    }
  }
};

bool needs_discounts(const PayoffSpec& spec)
{
  return std::holds_alternative<AbdcContract>(spec);
}

const VectorXd& factor_column(const PathRecord& path, ProbeProcess process)
{
  switch (process) {
    case ProbeProcess::Domestic:
      return path.domestic;
    case ProbeProcess::Foreign:
      return path.foreign;
    case ProbeProcess::Variance:
      break;
  }
  return path.variance;
}

const CirParams& factor_params(const ModelParams& params, ProbeProcess process)
{
  switch (process) {
    case ProbeProcess::Domestic:
      return params.domestic;
    case ProbeProcess::Foreign:
      return params.foreign;
    case ProbeProcess::Variance:
      break;
  }
  return params.variance;
}

std::string fmt(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v)
{
  return v ? fmt(*v) : std::string();
}

} // namespace

// --- pricing ---------------------------------------------------------------

std::vector<PricingResult> price_all(const ModelParams& params, const SimGrid& grid,
                                     std::span<const PayoffSpec> specs, std::int64_t n_paths, std::uint64_t seed,
                                     const EngineOptions& opts)
{
  require_paths(n_paths, opts);
  const auto t0 = Clock::now();
  for (const auto& s : specs)
    check_dates(s, grid);

  const PathSimulator sim(params, grid);
  RecordSpec record{ false, false };
  for (const auto& s : specs)
    record.discounts = record.discounts || needs_discounts(s);

  const std::size_t k = specs.size();
  const std::int64_t n_batches = (n_paths + opts.batch_size - 1) / opts.batch_size;
  // Per batch: one accumulator per payoff, then ER and KI indicators per payoff.
  std::vector<std::vector<Accumulator>> batch_acc(static_cast<std::size_t>(n_batches), std::vector<Accumulator>(3 * k));
  std::vector<Accumulator> total(3 * k);

  run_batches(
    n_paths, opts.batch_size, opts.threads,
    [&](std::int64_t b, std::int64_t first, std::int64_t n) {
      IncrementBlock block;
      PathRecord path;
      auto& acc = batch_acc[std::size_t(b)];
      for (std::int64_t p = first; p < first + n; ++p) {
        sample_block(seed, std::uint64_t(p), grid, sim.chol(), block);
        sim.simulate(block, path, record);
        for (std::size_t j = 0; j < k; ++j) {
          if (const auto* abdc = std::get_if<AbdcContract>(&specs[j])) {
            const AbdcOutcome out = abdc_evaluate(*abdc, path);
            acc[j].add(out.value);
            acc[k + j].add(out.early_redeemed ? 1.0 : 0.0);
            acc[2 * k + j].add(out.knocked_in ? 1.0 : 0.0);
          } else {
            acc[j].add(payoff_value(specs[j], path));
          }
        }
      }
    },
    [&](std::int64_t b) {
      for (std::size_t j = 0; j < 3 * k; ++j)
        total[j].merge(batch_acc[std::size_t(b)][j]);
    });

  const double elapsed = seconds_since(t0);
  std::vector<PricingResult> out;
  for (std::size_t j = 0; j < k; ++j) {
    PricingResult r = make_result(payoff_name(specs[j]), total[j], n_paths, grid.steps_per_year(), seed);
    r.wall_time = elapsed;
    if (std::holds_alternative<AbdcContract>(specs[j])) {
      r.prob_early_redemption = total[k + j].mean();
      r.prob_knock_in = total[2 * k + j].mean();
    }
    out.push_back(std::move(r));
  }
  return out;
}

PricingResult price(const ModelParams& params, const SimGrid& grid, const PayoffSpec& spec, std::int64_t n_paths,
                    std::uint64_t seed, const EngineOptions& opts)
{
  return price_all(params, grid, std::span<const PayoffSpec>(&spec, 1), n_paths, seed, opts).front();
}

// --- studies ---------------------------------------------------------------

ConvergenceTable convergence_study(const ModelParams& params, double maturity, const PayoffSpec& spec,
                                   std::span<const int> steps_list, std::int64_t n_paths, std::uint64_t seed,
                                   const EngineOptions& opts)
{
  require_paths(n_paths, opts);
  const Ladder ladder(params, maturity, steps_list);
  check_dates(spec, ladder.grids.back());
  for (const auto& g : ladder.grids) {
    try {
      check_dates(spec, g);
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("dates not alignable");
    }
  }

  const std::size_t L = ladder.size();
  const RecordSpec record{ false, needs_discounts(spec) };
  const std::int64_t n_batches = (n_paths + opts.batch_size - 1) / opts.batch_size;
  // Per batch: level values [0, L), coupled differences [L, 2L).
  std::vector<std::vector<Accumulator>> batch_acc(static_cast<std::size_t>(n_batches), std::vector<Accumulator>(2 * L));
  std::vector<Accumulator> total(2 * L);

  run_batches(
    n_paths, opts.batch_size, opts.threads,
    [&](std::int64_t b, std::int64_t first, std::int64_t n) {
      Ladder::Work work;
      std::vector<double> values(L);
      auto& acc = batch_acc[std::size_t(b)];
      for (std::int64_t p = first; p < first + n; ++p) {
        ladder.simulate(seed, p, work, record);
        for (std::size_t l = 0; l < L; ++l) {
          values[l] = payoff_value(spec, work.paths[l]);
          acc[l].add(values[l]);
          if (l)
            acc[L + l].add(values[l - 1] - values[l]);
        }
      }
    },
    [&](std::int64_t b) {
      for (std::size_t j = 0; j < 2 * L; ++j)
        total[j].merge(batch_acc[std::size_t(b)][j]);
    });

  ConvergenceTable table;
  table.n_paths = n_paths;
  table.seed = seed;
  for (std::size_t l = 0; l < L; ++l) {
    ConvergenceRow row;
    row.steps_per_year = steps_list[l];
    row.estimate = total[l].mean();
    row.std_error = total[l].std_error();
    if (l) {
      row.diff = std::abs(table.rows[l - 1].estimate - row.estimate);
      row.diff_std_error = total[L + l].std_error();
    }
    if (l >= 2) {
      const double prev = *table.rows[l - 1].diff;
      if (prev > 0.0 && *row.diff > 0.0)
        row.order = std::log2(prev / *row.diff);
    }
    table.rows.push_back(row);
  }
  return table;
}

std::vector<StrongRow> strong_convergence_study(const ModelParams& params, double maturity,
                                                std::span<const int> steps_list, std::int64_t n_paths,
                                                std::uint64_t seed, const EngineOptions& opts)
{
  require_paths(n_paths, opts);
  if (steps_list.empty())
    throw std::invalid_argument("dates not alignable");
  std::vector<int> levels(steps_list.begin(), steps_list.end());
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (levels[i] != 2 * levels[i - 1])
      throw std::invalid_argument("dates not alignable");
  levels.push_back(2 * levels.back());
  const Ladder ladder(params, maturity, levels);

  const std::size_t R = steps_list.size();
  const RecordSpec record{ false, false };
  const std::int64_t n_batches = (n_paths + opts.batch_size - 1) / opts.batch_size;
  std::vector<std::vector<Accumulator>> batch_acc(static_cast<std::size_t>(n_batches), std::vector<Accumulator>(R));
  std::vector<Accumulator> total(R);

  run_batches(
    n_paths, opts.batch_size, opts.threads,
    [&](std::int64_t b, std::int64_t first, std::int64_t n) {
      Ladder::Work work;
      auto& acc = batch_acc[std::size_t(b)];
      for (std::int64_t p = first; p < first + n; ++p) {
        ladder.simulate(seed, p, work, record);
        for (std::size_t r = 0; r < R; ++r)
          acc[r].add(std::abs(work.paths[r].terminal_spot() - work.paths[r + 1].terminal_spot()));
      }
    },
    [&](std::int64_t b) {
      for (std::size_t r = 0; r < R; ++r)
        total[r].merge(batch_acc[std::size_t(b)][r]);
    });

  std::vector<StrongRow> rows;
  for (std::size_t r = 0; r < R; ++r)
    rows.push_back({ steps_list[r], total[r].mean(), total[r].std_error() });
  return rows;
}

std::vector<MomentRow> moment_probe(const ModelParams& params, double maturity, const MomentSelector& selector,
                                    std::span<const int> steps_list, std::int64_t n_paths, std::uint64_t seed,
                                    const EngineOptions& opts)
{
  require_paths(n_paths, opts);
  if (selector.kind == MomentSelector::Kind::SupPower && !(selector.p >= 1.0))
    throw std::invalid_argument("moment probe: p must be >= 1");
  if (selector.kind == MomentSelector::Kind::ExpIntegral && !(selector.lambda > 0.0))
    throw std::invalid_argument("moment probe: lambda must be positive");
  const Ladder ladder(params, maturity, steps_list);

  const std::size_t L = ladder.size();
  const RecordSpec record{ true, false };
  const std::int64_t n_batches = (n_paths + opts.batch_size - 1) / opts.batch_size;
  std::vector<std::vector<Accumulator>> batch_acc(static_cast<std::size_t>(n_batches), std::vector<Accumulator>(L));
  std::vector<Accumulator> total(L);

  run_batches(
    n_paths, opts.batch_size, opts.threads,
    [&](std::int64_t b, std::int64_t first, std::int64_t n) {
      Ladder::Work work;
      auto& acc = batch_acc[std::size_t(b)];
      for (std::int64_t p = first; p < first + n; ++p) {
        ladder.simulate(seed, p, work, record);
        for (std::size_t l = 0; l < L; ++l) {
          const PathRecord& path = work.paths[l];
          const VectorXd& y = factor_column(path, selector.process);
          if (selector.kind == MomentSelector::Kind::SupPower) {
            acc[l].add(std::pow(y.maxCoeff(), selector.p));
          } else {
            // Left-point rule: y_bar is constant on each step.
            const double integral = y.head(path.n_steps).sum() * path.dt;
            acc[l].add(std::exp(selector.lambda * integral));
          }
        }
      }
    },
    [&](std::int64_t b) {
      for (std::size_t l = 0; l < L; ++l)
        total[l].merge(batch_acc[std::size_t(b)][l]);
    });

  std::vector<MomentRow> rows;
  for (std::size_t l = 0; l < L; ++l) {
    MomentRow row;
    row.steps_per_year = steps_list[l];
    row.dt = ladder.grids[l].dt();
    row.estimate = total[l].mean();
    row.std_error = total[l].std_error();
    if (selector.kind == MomentSelector::Kind::ExpIntegral) {
      try {
        row.bound = fte_exp_moment_bound(factor_params(params, selector.process), selector.lambda, maturity, row.dt);
      } catch (const std::exception&) {
        row.bound.reset();
      }
    }
    rows.push_back(row);
  }
  return rows;
}

// --- reports ---------------------------------------------------------------

void write_result_json(std::ostream& os, std::span<const PricingResult> results, bool timing)
{
  auto to_json = [timing](const PricingResult& r) {
    nlohmann::ordered_json j;
    j["payoff"] = r.payoff;
    j["estimate"] = r.estimate;
    j["std_error"] = r.std_error;
    j["ci95"] = { r.ci95_lo, r.ci95_hi };
    j["n_paths"] = r.n_paths;
    j["steps_per_year"] = r.steps_per_year;
    j["seed"] = r.seed;
    j["wall_time"] = timing ? nlohmann::ordered_json(r.wall_time) : nlohmann::ordered_json(nullptr);
    if (r.prob_early_redemption)
      j["prob_early_redemption"] = *r.prob_early_redemption;
    if (r.prob_knock_in)
      j["prob_knock_in"] = *r.prob_knock_in;
    return j;
  };
  nlohmann::ordered_json doc;
  if (results.size() == 1) {
    doc = to_json(results.front());
  } else {
    doc = nlohmann::ordered_json::array();
    for (const auto& r : results)
      doc.push_back(to_json(r));
  }
  os << doc.dump(2) << '\n';
}

void write_convergence_csv(std::ostream& os, const ConvergenceTable& table)
{
  os << "steps_per_year,estimate,std_error,diff,diff_std_error,order\n";
  for (const auto& r : table.rows)
    os << r.steps_per_year << ',' << fmt(r.estimate) << ',' << fmt(r.std_error) << ',' << fmt(r.diff) << ','
       << fmt(r.diff_std_error) << ',' << fmt(r.order) << '\n';
}

void write_strong_csv(std::ostream& os, std::span<const StrongRow> rows)
{
  os << "steps_per_year,mean_abs_diff,std_error\n";
  for (const auto& r : rows)
    os << r.steps_per_year << ',' << fmt(r.mean_abs_diff) << ',' << fmt(r.std_error) << '\n';
}

void write_moment_csv(std::ostream& os, std::span<const MomentRow> rows)
{
  os << "steps_per_year,dt,estimate,std_error,bound\n";
  for (const auto& r : rows)
    os << r.steps_per_year << ',' << fmt(r.dt) << ',' << fmt(r.estimate) << ',' << fmt(r.std_error) << ','
       << fmt(r.bound) << '\n';
}

} // namespace slvfx
