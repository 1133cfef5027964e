#pragma once

#include <Eigen/Dense>

#include <algorithm>

#include "ntpcap/precision.hpp"

namespace ntpcap {

template <class Real>
using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <class Real>
using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using MatrixXd = Mat<double>;
using VectorXd = Vec<double>;

template <class Real>
struct PivotedSolve {
  Mat<Real> solution;
  /// min |R_kk| / max |R_kk| over the leading min(rows, cols) pivots.
  Real diag_ratio{0};
};

/// Least-squares / basic solution of A X = B via column-pivoted Householder QR.
template <class Real>
PivotedSolve<Real> pivoted_qr_solve(const Mat<Real>& a, const Mat<Real>& b) {
  Eigen::ColPivHouseholderQR<Mat<Real>> qr(a);
  // Rank is decided by the caller from diag_ratio; keep every pivot.
  qr.setThreshold(Real(0));
  PivotedSolve<Real> out;
  const Eigen::Index k = std::min(a.rows(), a.cols());
  using std::abs;
  Real hi(0);
  Real lo(0);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Real v = abs(qr.matrixQR()(i, i));
    if (i == 0 || v > hi) {
      hi = v;
    }
    if (i == 0 || v < lo) {
      lo = v;
    }
  }
  out.diag_ratio = hi > Real(0) ? Real(lo / hi) : Real(0);
  out.solution = qr.solve(b);
  return out;
}

/// Singular values in decreasing order.
template <class Real>
Vec<Real> singular_values(const Mat<Real>& a) {
  if (a.size() == 0) {
    return Vec<Real>();
  }
  Eigen::JacobiSVD<Mat<Real>> svd(a);
  return svd.singularValues();
}

}  // namespace ntpcap
