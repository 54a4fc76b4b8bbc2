#ifndef SLVFX_FWD_HPP
#define SLVFX_FWD_HPP

#include <Eigen/Core>

#include <cstdint>

namespace slvfx {

static constexpr auto DYN = Eigen::Dynamic;

/// Number of Brownian drivers, ordered (s, v, d, f).
static constexpr int kFactors = 4;

enum Factor : int
{
  kSpot = 0,
  kVariance = 1,
  kDomestic = 2,
  kForeign = 3,
};

template<typename T>
using Mat4 = Eigen::Matrix<T, kFactors, kFactors>;
template<typename T>
using Vec4 = Eigen::Matrix<T, kFactors, 1>;
template<typename T>
using Vec = Eigen::Matrix<T, DYN, 1>;
template<typename T>
using Mat = Eigen::Matrix<T, DYN, DYN>;
// Row-major so that one time step's four increments are contiguous.
template<typename T>
using StepMat = Eigen::Matrix<T, DYN, kFactors, Eigen::RowMajor>;

using Matrix4d = Mat4<double>;
using Vector4d = Vec4<double>;
using VectorXd = Vec<double>;
using MatrixXd = Mat<double>;

} // namespace slvfx

#endif
