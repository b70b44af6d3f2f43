#pragma once

#include <Eigen/QR>

#include "asbim/numcore/dense.hpp"

namespace asbim::numcore {

struct LeastSquaresFit {
  Vec coef;
  double residual_sum_squares = 0.0;
  bool full_rank = false;
};

/// Ordinary least squares via column-pivoted QR. A rank-deficient design returns
/// full_rank=false and zero coefficients.
inline LeastSquaresFit least_squares(const Mat& X, const Vec& y) {
  if (X.rows() != y.size()) throw ConfigError("least_squares: row count differs from target length");
  LeastSquaresFit fit;
  fit.coef = Vec::Zero(X.cols());
  if (X.rows() < X.cols() || X.cols() == 0) return fit;
  Eigen::ColPivHouseholderQR<Mat> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) return fit;
  fit.coef = qr.solve(y);
  fit.residual_sum_squares = (y - X * fit.coef).squaredNorm();
  fit.full_rank = true;
  return fit;
}

}  // namespace asbim::numcore

namespace asbim::numcore {

/// Minimum-norm least-squares solution; tolerates rank-deficient designs.
inline Vec minimum_norm_least_squares(const Mat& X, const Vec& y) {
  if (X.rows() != y.size()) throw ConfigError("least_squares: row count differs from target length");
  if (X.rows() == 0) return Vec::Zero(X.cols());
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(X);
  cod.setThreshold(1e-10);
  return cod.solve(y);
}

}  // namespace asbim::numcore
