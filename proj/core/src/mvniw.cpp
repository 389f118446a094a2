#include "skewar/mvniw.hpp"

#include "skewar/errors.hpp"

#include <cmath>
#include <string>

namespace skewar {

void MvniwParams::validate() const {
  const Eigen::Index n = Psi.rows();
  if (n == 0) throw ValidationError("MvniwParams: empty Psi");
  if (DeltaHat.rows() != n || DeltaHat.cols() != n) throw ValidationError("MvniwParams: DeltaHat has wrong shape");
  if (V.rows() != n || V.cols() != n) throw ValidationError("MvniwParams: V has wrong shape");
  if (!DeltaHat.allFinite()) throw ValidationError("MvniwParams: DeltaHat has non-finite entries");
  require_spd(V, "MvniwParams::V");
  require_spd(Psi, "MvniwParams::Psi");
  if (!(nu > 2.0 * static_cast<double>(n))) {
    throw ValidationError("MvniwParams: nu must exceed 2 n_z (nu = " + std::to_string(nu) + ")");
  }
}

Matrix expected_R(const MvniwParams& p) {
  const double dof = p.nu - static_cast<double>(p.dim()) - 1.0;
  if (!(dof > 0.0)) {
    throw ValidationError("expected_R: degrees of freedom nu - n_z - 1 must be positive");
  }
  return symmetrized(p.Psi / dof);
}

MvniwCrossMoments mvniw_cross_moments(const MvniwParams& p) {
  p.validate();
  const double n = static_cast<double>(p.dim());
  // E[R^{-1}] = (nu - n - 1) Psi^{-1}
  Eigen::LLT<Matrix> llt(p.Psi);
  const Matrix r_inv_delta = (p.nu - n - 1.0) * llt.solve(p.DeltaHat);
  Matrix quad = n * p.V + p.DeltaHat.transpose() * r_inv_delta;
  symmetrize(quad);
  return {r_inv_delta, quad};
}

MvniwDraw mvniw_sample(Rng& rng, const MvniwParams& p) {
  p.validate();
  const Eigen::Index n = p.dim();
  const double dof = p.nu - static_cast<double>(n) - 1.0;

  Matrix psi_inv;
  if (!spd_inverse(p.Psi, psi_inv)) throw ValidationError("mvniw_sample: Psi is not invertible");
  Eigen::LLT<Matrix> scale_llt(psi_inv);
  const Matrix L = scale_llt.matrixL();

  // Bartlett: R^{-1} = L A A^T L^T with A lower triangular.
  std::normal_distribution<double> normal;
  Matrix A = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::chi_squared_distribution<double> chi2(dof - static_cast<double>(i));
    A(i, i) = std::sqrt(chi2(rng));
    for (Eigen::Index j = 0; j < i; ++j) A(i, j) = normal(rng);
  }
  const Matrix B = L * A;
  const Matrix B_inv = B.triangularView<Eigen::Lower>().solve(Matrix::Identity(n, n));
  Matrix R = B_inv.transpose() * B_inv;
  symmetrize(R);

  Matrix Z(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) Z(i, j) = normal(rng);
  const Matrix chol_R = Eigen::LLT<Matrix>(R).matrixL();
  const Matrix chol_V = Eigen::LLT<Matrix>(p.V).matrixL();
  Matrix Delta = p.DeltaHat + chol_R * Z * chol_V.transpose();
  return {std::move(R), std::move(Delta)};
}

MvniwParams forget(const MvniwParams& p, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ValidationError("forget: gamma must lie in (0, 1]");
  }
  const double n = static_cast<double>(p.dim());
  MvniwParams out;
  out.DeltaHat = p.DeltaHat;
  out.V = symmetrized(p.V / gamma);
  out.Psi = symmetrized(gamma * p.Psi);
  out.nu = gamma * p.nu + (1.0 - gamma) * 2.0 * n;
  return out;
}

}  // namespace skewar
