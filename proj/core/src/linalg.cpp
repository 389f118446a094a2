#include "skewar/linalg.hpp"

#include "skewar/errors.hpp"

#include <algorithm>
#include <cmath>

namespace skewar {

void require_symmetric(const Matrix& m, const std::string& what) {
  if (m.rows() != m.cols()) {
    throw ValidationError(what + " must be square");
  }
  if (!m.allFinite()) {
    throw ValidationError(what + " has non-finite entries");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ValidationError(what + " must be symmetric");
  }
}

void require_spd(const Matrix& m, const std::string& what) {
  require_symmetric(m, what);
  if (!is_spd(m)) {
    throw ValidationError(what + " must be positive definite");
  }
}

bool is_spd(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0 || !m.allFinite()) {
    return false;
  }
  Eigen::LLT<Matrix> llt(symmetrized(m));
  return llt.info() == Eigen::Success;
}

bool spd_inverse(const Matrix& m, Matrix& inverse) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    return false;
  }
  inverse = llt.solve(Matrix::Identity(m.rows(), m.cols()));
  symmetrize(inverse);
  return inverse.allFinite();
}

Matrix cholesky_lower(const Matrix& m, const std::string& what) {
  require_symmetric(m, what);
  Eigen::LLT<Matrix> llt(symmetrized(m));
  if (llt.info() != Eigen::Success) {
    throw ValidationError(what + " must be positive definite");
  }
  return llt.matrixL();
}

Matrix lower_factor_of_gram(const Matrix& M) {
  const Eigen::Index n = M.rows();
  if (M.cols() < n) {
    throw NumericalError("lower_factor_of_gram: fewer columns than rows");
  }
  Eigen::HouseholderQR<Matrix> qr(M.transpose());
  Matrix L = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>().toDenseMatrix().transpose();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (L(j, j) < 0.0) L.col(j) = -L.col(j);
  }
  if (!is_lower_factor(L)) {
    throw NumericalError("lower_factor_of_gram: singular factor");
  }
  return L;
}

Matrix psd_sqrt(const Matrix& q) {
  require_symmetric(q, "psd_sqrt argument");
  Eigen::LLT<Matrix> llt(symmetrized(q));
  if (llt.info() == Eigen::Success) {
    return llt.matrixL();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(q));
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale) {
    throw ValidationError("psd_sqrt argument must be positive semidefinite");
  }
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

bool is_lower_factor(const Matrix& L) {
  if (L.rows() != L.cols() || L.rows() == 0 || !L.allFinite()) return false;
  for (Eigen::Index j = 0; j < L.cols(); ++j) {
    if (!(L(j, j) > 0.0)) return false;
    if (j > 0 && (L.col(j).head(j).array() != 0.0).any()) return false;
  }
  return true;
}

}  // namespace skewar
