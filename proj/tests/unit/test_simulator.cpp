#include "oracles.hpp"

#include "slvfx/engine.hpp"
#include "slvfx/scheme.hpp"
#include "slvfx/simulator.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace slvfx;

namespace {

ModelParams degenerate(double rd, double rf, double v, double sigma)
{
  ModelParams p;
  p.s0 = 1.3;
  p.variance = { v, 1.0, v, 0.0 };
  p.domestic = { rd, 1.0, rd, 0.0 };
  p.foreign = { rf, 1.0, rf, 0.0 };
  p.leverage = std::make_shared<LeverageSurface>(LeverageSurface::constant(sigma));
  return p;
}

ModelParams full_model()
{
  ModelParams p;
  p.s0 = 1.2;
  p.variance = { 0.04, 1.2, 0.05, 0.6 }; // Feller violated
  p.domestic = { 0.01, 0.3, 0.02, 0.15 };
  p.foreign = { 0.005, 0.2, 0.01, 0.12 };
  p.shift_d = ShiftFunction({ 0.0, 0.5 }, { 0.001, -0.002 });
  p.shift_f = ShiftFunction::constant(0.0005);
  p.corr = CorrelationMatrix::from_pairs(-0.6, 0.2, -0.3, 0.1, 0.1, 0.4);
  MatrixXd v(2, 3);
  v << 1.1, 0.9, 1.2, 1.0, 0.8, 1.3;
  p.leverage = std::make_shared<LeverageSurface>(std::vector<double>{ 0.0, 1.0 }, std::vector<double>{ 0.8, 1.2, 1.6 }, v);
  return p;
}

} // namespace

TEST(FteStep, Examples)
{
  EXPECT_EQ(fte_step(0.04, 1.0, 0.04, 0.5, 0.0, 0.01), 0.04);
  EXPECT_NEAR(fte_step(-0.1, 1.0, 0.04, 0.5, 0.3, 0.01), -0.0996, 1e-15);
  const CirParams c{ 0.04, 2.0, 0.05, 0.3 };
  EXPECT_DOUBLE_EQ(fte_step(0.09, c, 0.1, 0.01), 0.09 + 2.0 * (0.05 - 0.09) * 0.01 + 0.3 * 0.3 * 0.1);
}

TEST(FteForeignStep, Examples)
{
  const CirParams f{ 0.01, 0.5, 0.02, 0.1 };
  EXPECT_EQ(fte_foreign_step(0.015, f, 0.04, 1.2, 0.0, 0.03, 0.01), fte_step(0.015, f, 0.03, 0.01));
  EXPECT_EQ(fte_foreign_step(0.015, f, 0.0, 1.2, -0.7, 0.03, 0.01), fte_step(0.015, f, 0.03, 0.01));
  const double rho = -0.4, sigma = 1.3, v = 0.05, dt = 0.02;
  EXPECT_NEAR(fte_foreign_step(f.theta, f, v, sigma, rho, 0.0, dt),
              f.theta - rho * f.xi * sigma * std::sqrt(v * f.theta) * dt, 1e-16);
}

TEST(LogEulerStep, Examples)
{
  // sigma^2 v = 2 (gd - gf): drift cancels
  EXPECT_EQ(log_euler_step(0.3, 0.05, 0.01, 0.0, 2.0, 0.02, 0.0, 0.1), 0.3);
  EXPECT_EQ(log_euler_step(0.3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.7, 0.1), 0.3);
  EXPECT_DOUBLE_EQ(log_euler_step(0.0, 0.03, 0.01, 0.002, 1.0, 0.04, 0.1, 0.5),
                   0.002 + (0.02 - 0.02) * 0.5 + 0.2 * 0.1);
}

TEST(SimulatePath, LogEulerExactForConstantCoefficients)
{
  const double rd = 0.03, rf = 0.01, v = 0.04, sigma = 1.25;
  const auto p = degenerate(rd, rf, v, sigma);
  const SimGrid g(2.0, 4);
  const PathSimulator sim(p, g);
  for (std::uint64_t stream = 0; stream < 1000; ++stream) {
    const auto block = sample_block(17, stream, g, p.corr);
    PathRecord rec;
    sim.simulate(block, rec);
    const double w = block.values.col(kSpot).sum();
    const double exact = p.s0 * std::exp((rd - rf - 0.5 * sigma * sigma * v) * 2.0 + sigma * std::sqrt(v) * w);
    EXPECT_NEAR(rec.terminal_spot() / exact, 1.0, 1e-12);
    EXPECT_NEAR(rec.terminal_discount_d, std::exp(-rd * 2.0), 1e-14);
    EXPECT_NEAR(rec.terminal_discount_f, std::exp(-rf * 2.0), 1e-14);
  }
}

TEST(SimulatePath, DeterministicBlackScholesPath)
{
  const auto p = degenerate(0.02, 0.01, 0.0, 1.0);
  const SimGrid g(1.0, 12);
  IncrementBlock zero;
  zero.values = StepMat<double>::Zero(12, 4);
  const PathRecord rec = simulate_path(p, g, zero);
  for (int n = 0; n <= 12; ++n) {
    EXPECT_NEAR(rec.spot(n), p.s0 * std::exp(0.01 * n / 12.0), 1e-14);
    EXPECT_NEAR(rec.discount_d(n), std::exp(-0.02 * n / 12.0), 1e-15);
  }
}

TEST(SimulatePath, ShiftEntersDriftAndDiscount)
{
  auto p = degenerate(0.0, 0.0, 0.0, 1.0);
  p.shift_d = ShiftFunction({ 0.0, 0.3 }, { 0.01, 0.03 });
  p.shift_f = ShiftFunction::constant(0.005);
  const SimGrid g(1.0, 4);
  IncrementBlock zero;
  zero.values = StepMat<double>::Zero(4, 4);
  const PathRecord rec = simulate_path(p, g, zero);
  const double int_hd = 0.3 * 0.01 + 0.7 * 0.03;
  EXPECT_NEAR(rec.terminal_discount_d, std::exp(-int_hd), 1e-15);
  EXPECT_NEAR(rec.terminal_spot(), p.s0 * std::exp(int_hd - 0.005), 1e-14);
}

TEST(SimulatePath, UpdateOrderUsesPreStepState)
{
  // One step by hand on a full model.
  const auto p = full_model();
  const SimGrid g(1.0, 4);
  const auto block = sample_block(5, 3, g, p.corr);
  const PathRecord rec = simulate_path(p, g, block);
  const double dt = 0.25;
  const auto dw = block.values.row(0);
  const double sigma0 = p.leverage->eval(0.0, p.s0);
  const double v1 = std::max(0.0, p.variance.y0 + p.variance.kappa * (p.variance.theta - p.variance.y0) * dt +
                                      p.variance.xi * std::sqrt(p.variance.y0) * dw(kVariance));
  const double gf1 = std::max(0.0, p.foreign.y0 + (p.foreign.kappa * p.foreign.theta - p.foreign.kappa * p.foreign.y0 -
                                                   p.corr.rho_sf() * p.foreign.xi * sigma0 *
                                                     std::sqrt(p.variance.y0 * p.foreign.y0)) * dt +
                                      p.foreign.xi * std::sqrt(p.foreign.y0) * dw(kForeign));
  const double x1 = std::log(p.s0) + p.shift_d.integral(0, dt) - p.shift_f.integral(0, dt) +
                    (p.domestic.y0 - p.foreign.y0 - 0.5 * sigma0 * sigma0 * p.variance.y0) * dt +
                    sigma0 * std::sqrt(p.variance.y0) * dw(kSpot);
  EXPECT_NEAR(rec.variance(1), v1, 1e-15);
  EXPECT_NEAR(rec.foreign(1), gf1, 1e-15);
  EXPECT_NEAR(std::log(rec.spot(1)), x1, 1e-14);
  EXPECT_NEAR(-std::log(rec.discount_d(1)), p.domestic.y0 * dt + p.shift_d.integral(0, dt), 1e-15);
}

TEST(SimulatePath, PositivityOnFellerViolatingModel)
{
  const auto p = full_model();
  const SimGrid g(2.0, 50);
  const PathSimulator sim(p, g);
  PathRecord rec;
  IncrementBlock block;
  int truncated = 0;
  for (std::uint64_t s = 0; s < 2000; ++s) {
    sample_block(8, s, g, sim.chol(), block);
    sim.simulate(block, rec);
    ASSERT_GE(rec.variance.minCoeff(), 0.0);
    ASSERT_GE(rec.domestic.minCoeff(), 0.0);
    ASSERT_GE(rec.foreign.minCoeff(), 0.0);
    ASSERT_GT(rec.spot.minCoeff(), 0.0);
    truncated += (rec.variance.array() == 0.0).count();
  }
  EXPECT_GT(truncated, 0); // the truncation branch was exercised
}

TEST(SimulatePath, FteMeanNearExactCirMean)
{
  const CirParams c{ 0.09, 2.0, 0.04, 0.3 };
  const double T = 1.0;
  const SimGrid g(T, 64);
  ModelParams p = degenerate(0.0, 0.0, 0.04, 1.0);
  p.variance = c;
  const PathSimulator sim(p, g);
  PathRecord rec;
  IncrementBlock block;
  double sum = 0.0, sum2 = 0.0;
  const int n = 100000;
  for (int s = 0; s < n; ++s) {
    sample_block(21, std::uint64_t(s), g, sim.chol(), block);
    sim.simulate(block, rec, { true, false });
    const double y = rec.variance(g.n_steps());
    sum += y;
    sum2 += y * y;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  const auto [exact_mean, exact_var] = oracles::cir_exact_moments(c, T);
  // O(dt) bias bound: |y0 - theta| k^2 T dt / 2 (plus slack for truncation)
  const double bias_bound = std::abs(c.y0 - c.theta) * c.kappa * c.kappa * T * g.dt();
  EXPECT_LT(std::abs(mean - exact_mean), bias_bound + 3 * se);
}

TEST(SimulatePath, RecordSpecDropsColumns)
{
  const auto p = full_model();
  const SimGrid g(1.0, 8);
  const auto block = sample_block(1, 1, g, p.corr);
  const auto full = simulate_path(p, g, block);
  const auto lean = simulate_path(p, g, block, { false, false });
  EXPECT_EQ(lean.variance.size(), 0);
  EXPECT_EQ(lean.discount_d.size(), 0);
  EXPECT_EQ(lean.terminal_spot(), full.terminal_spot());
  EXPECT_EQ(lean.terminal_discount_d, full.terminal_discount_d);
  EXPECT_EQ(full.discount_d(8), full.terminal_discount_d);
}

TEST(SimulatePath, MismatchedBlockRejected)
{
  const auto p = full_model();
  const auto block = sample_block(1, 1, SimGrid(1.0, 8), p.corr);
  EXPECT_THROW(simulate_path(p, SimGrid(1.0, 4), block), std::invalid_argument);
}
