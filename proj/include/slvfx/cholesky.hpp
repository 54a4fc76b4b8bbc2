#ifndef SLVFX_CHOLESKY_HPP
#define SLVFX_CHOLESKY_HPP

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>

namespace slvfx {

/// Pivots below -kPivotTolerance mean the matrix is not PSD; pivots in
/// [-kPivotTolerance, 0] are clamped to zero.
inline constexpr double kPivotTolerance = 1e-12;

/// Lower-triangular L with L L^T = a for a symmetric PSD matrix. Handles
/// singular (rank-deficient) inputs by zeroing the column below a zero pivot.
/// Throws std::domain_error("matrix not PSD").
template<typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>
cholesky_lower(const Eigen::MatrixBase<Derived>& a)
{
  using Scalar = typename Derived::Scalar;
  using Result = Eigen::Matrix<Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;

  if (a.rows() != a.cols())
    throw std::invalid_argument("cholesky: matrix must be square");

  const Eigen::Index n = a.rows();
  Result l = Result::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Scalar pivot = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k)
      pivot -= l(j, k) * l(j, k);
    if (pivot < Scalar(-kPivotTolerance))
      throw std::domain_error("matrix not PSD");
    if (pivot < Scalar(0))
      pivot = Scalar(0);
    const Scalar diag = std::sqrt(pivot);
    l(j, j) = diag;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      Scalar s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k)
        s -= l(i, k) * l(j, k);
      if (diag > Scalar(0)) {
        l(i, j) = s / diag;
      } else {
        // A zero pivot forces the rest of its column to vanish.
        if (std::abs(s) > Scalar(1e-6))
          throw std::domain_error("matrix not PSD");
        l(i, j) = Scalar(0);
      }
    }
  }
  return l;
}

} // namespace slvfx

#endif
