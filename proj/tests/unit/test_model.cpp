#include "slvfx/cholesky.hpp"
#include "slvfx/leverage.hpp"
#include "slvfx/model.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace slvfx;

namespace {

ModelParams valid_params()
{
  ModelParams p;
  p.s0 = 1.1;
  p.variance = { 0.04, 1.5, 0.04, 0.3 };
  p.domestic = { 0.02, 0.5, 0.02, 0.05 };
  p.foreign = { 0.01, 0.011, 1.166, 0.037 };
  p.leverage = std::make_shared<LeverageSurface>(LeverageSurface::constant(1.2));
  return p;
}

double min_eigenvalue(const Matrix4d& m)
{
  return Eigen::SelfAdjointEigenSolver<Matrix4d>(m).eigenvalues().minCoeff();
}

} // namespace

TEST(CirParams, FellerRatio)
{
  const CirParams f{ 0.01, 0.011, 1.166, 0.037 };
  EXPECT_NEAR(f.feller_ratio(), 2 * 0.011 * 1.166 / (0.037 * 0.037), 1e-12);
  EXPECT_NEAR(f.feller_ratio(), 18.7, 0.05);
  EXPECT_TRUE(f.feller_satisfied());
  EXPECT_NEAR(2 * f.kappa * f.theta, 0.0257, 5e-5);
  EXPECT_NEAR(f.xi * f.xi, 0.0014, 5e-5);
}

TEST(CirParams, FellerFlagFlipsWithXi)
{
  CirParams c{ 0.04, 2.0, 0.04, 0.3 }; // 2k theta = 0.16 > 0.09
  EXPECT_TRUE(c.feller_satisfied());
  c.xi = std::sqrt(2 * c.kappa * c.theta) * 1.01;
  EXPECT_FALSE(c.feller_satisfied());
}

TEST(ShiftFunction, PiecewiseConstantIntegral)
{
  const ShiftFunction h({ 0.0, 1.0, 2.5 }, { 0.01, -0.02, 0.03 });
  EXPECT_DOUBLE_EQ(h(0.5), 0.01);
  EXPECT_DOUBLE_EQ(h(1.0), -0.02);
  EXPECT_DOUBLE_EQ(h(10.0), 0.03);
  EXPECT_NEAR(h.integral(0.5, 3.0), 0.5 * 0.01 + 1.5 * -0.02 + 0.5 * 0.03, 1e-15);
  EXPECT_DOUBLE_EQ(h.h_max(), 0.03);
  EXPECT_TRUE(ShiftFunction().is_zero());
}

TEST(ShiftFunction, RejectsBadKnots)
{
  EXPECT_THROW(ShiftFunction({ 0.1, 1.0 }, { 0.0, 0.0 }), std::invalid_argument);
  EXPECT_THROW(ShiftFunction({ 0.0, 0.0 }, { 0.0, 0.0 }), std::invalid_argument);
  EXPECT_THROW(ShiftFunction({ 0.0 }, { 0.5 }, 0.1), std::invalid_argument);
}

TEST(CorrelationMatrix, StructuralChecks)
{
  Matrix4d m = Matrix4d::Identity();
  m(0, 1) = 0.3;
  EXPECT_THROW(CorrelationMatrix{ m }, std::invalid_argument); // asymmetric
  m(1, 0) = 0.3;
  EXPECT_NO_THROW(CorrelationMatrix{ m });
  m(2, 2) = 0.9;
  EXPECT_THROW(CorrelationMatrix{ m }, std::invalid_argument);
  EXPECT_THROW(CorrelationMatrix::from_pairs(1.5, 0, 0, 0, 0, 0), std::invalid_argument);
}

TEST(Validate, IdentityCorrelationIsPsd)
{
  const auto report = validate(valid_params());
  EXPECT_TRUE(report.corr_psd);
  EXPECT_TRUE(report.ok());
}

TEST(Validate, PsdAgreesWithEigenSolver)
{
  // The 0.99 triple is PSD (eigenvalues 2.98, 1, 0.01, 0.01) although it looks extreme.
  auto p = valid_params();
  p.corr = CorrelationMatrix::from_pairs(0.99, 0.99, 0, 0.99, 0, 0);
  EXPECT_GE(min_eigenvalue(p.corr.matrix()), -1e-12);
  EXPECT_TRUE(validate(p).corr_psd);

  p.corr = CorrelationMatrix::from_pairs(0.99, 0.99, 0, -0.99, 0, 0);
  EXPECT_LT(min_eigenvalue(p.corr.matrix()), -1e-6);
  const auto report = validate(p);
  EXPECT_FALSE(report.corr_psd);
  EXPECT_FALSE(report.ok());
  ASSERT_FALSE(report.errors.empty());
  EXPECT_NE(report.to_json().find("matrix not PSD"), std::string::npos);
}

TEST(Validate, RandomMatricesMatchEigenOracle)
{
  std::srand(7);
  for (int trial = 0; trial < 200; ++trial) {
    double r[6];
    for (double& x : r)
      x = 2.0 * std::rand() / RAND_MAX - 1.0;
    const auto c = CorrelationMatrix::from_pairs(r[0], r[1], r[2], r[3], r[4], r[5]);
    const double lmin = min_eigenvalue(c.matrix());
    if (std::abs(lmin) < 1e-9)
      continue;
    auto p = valid_params();
    p.corr = c;
    EXPECT_EQ(validate(p).corr_psd, lmin > 0.0) << "trial " << trial;
  }
}

TEST(Validate, ForeignFellerViolationIsWarning)
{
  auto p = valid_params();
  p.foreign = { 0.01, 0.1, 0.01, 0.2 };
  const auto report = validate(p);
  EXPECT_TRUE(report.ok());
  EXPECT_FALSE(report.feller[2].satisfied);
  EXPECT_FALSE(report.warnings.empty());
}

TEST(Validate, PositivityAndNonFinite)
{
  auto p = valid_params();
  p.variance.kappa = -1.0;
  EXPECT_FALSE(validate(p).ok());
  p.variance.kappa = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(validate(p), std::invalid_argument);
  p = valid_params();
  p.s0 = std::numeric_limits<double>::infinity();
  EXPECT_THROW(validate(p), std::invalid_argument);
}

TEST(Validate, PureAndDeterministic)
{
  auto p = valid_params();
  p.corr = CorrelationMatrix::from_pairs(-0.4, 0.1, 0.2, 0.0, 0.1, 0.3);
  EXPECT_EQ(validate(p).to_json(), validate(p).to_json());
}

TEST(Zeta, TableValues)
{
  EXPECT_NEAR(zeta(0.299, 1.399), 0.418, 1e-3);
  EXPECT_NEAR(zeta(0.342, 1.600), 0.547, 1e-3);
  EXPECT_EQ(zeta(0.3, 0.0), 0.0);
  auto p = valid_params();
  EXPECT_DOUBLE_EQ(zeta(p), 0.3 * 1.2);
  p.leverage.reset();
  EXPECT_THROW(zeta(p), std::invalid_argument);
}

TEST(Cholesky, ClosedForms)
{
  EXPECT_TRUE(cholesky_lower(Matrix4d::Identity()).isApprox(Matrix4d::Identity()));
  const auto c = CorrelationMatrix::from_pairs(0.5, 0, 0, 0, 0, 0);
  const Matrix4d L = cholesky_lower(c.matrix());
  EXPECT_DOUBLE_EQ(L(1, 0), 0.5);
  EXPECT_NEAR(L(1, 1), std::sqrt(0.75), 1e-15);
}

TEST(Cholesky, ReconstructsRandomPsd)
{
  std::srand(11);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix4d a = Matrix4d::Random();
    Matrix4d s = a * a.transpose();
    const Vector4d d = s.diagonal().cwiseSqrt().cwiseInverse();
    s = d.asDiagonal() * s * d.asDiagonal();
    const Matrix4d L = cholesky_lower(s);
    EXPECT_LT((L * L.transpose() - s).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_TRUE(L.isLowerTriangular());
  }
}

TEST(Cholesky, SingularAndNonPsd)
{
  // Perfectly correlated pair: singular but PSD.
  const auto c = CorrelationMatrix::from_pairs(1.0, 0, 0, 0, 0, 0);
  const Matrix4d L = cholesky_lower(c.matrix());
  EXPECT_LT((L * L.transpose() - c.matrix()).cwiseAbs().maxCoeff(), 1e-12);
  const auto bad = CorrelationMatrix::from_pairs(0.99, 0.99, 0, -0.99, 0, 0);
  try {
    cholesky_lower(bad.matrix());
    FAIL() << "expected a throw";
  } catch (const std::exception& e) {
    EXPECT_STREQ(e.what(), "matrix not PSD");
  }
}
