#include "regression_projection.hpp"

#include <algorithm>

namespace skewar::detail {

RegressionProjection::RegressionProjection(const Vector& x0, const Matrix& L, const Matrix& C)
    : m_(std::min(C.rows(), C.cols())), x0_(x0), y0_(C * x0) {
  const Matrix Bt = (C * L.triangularView<Eigen::Lower>()).transpose();
  Eigen::HouseholderQR<Matrix> qr(Bt);
  G_ = qr.matrixQR().topRows(m_).triangularView<Eigen::Upper>().toDenseMatrix().transpose();
  const Matrix Q = qr.householderQ();
  LQ_ = L.triangularView<Eigen::Lower>() * Q;
}

Vector RegressionProjection::lift_mean(const Vector& w_mean) const {
  return x0_ + LQ_.leftCols(m_) * w_mean;
}

Matrix RegressionProjection::lift_cross(const Matrix& w_cross) const { return LQ_.leftCols(m_) * w_cross; }

Matrix RegressionProjection::lift_sqrt(const Matrix& F) const {
  Matrix S(LQ_.rows(), LQ_.cols());
  S.leftCols(m_).noalias() = LQ_.leftCols(m_) * F;
  S.rightCols(LQ_.cols() - m_) = LQ_.rightCols(LQ_.cols() - m_);
  return S;
}

}  // namespace skewar::detail
