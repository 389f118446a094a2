#include "skewar/skew_normal.hpp"

#include "skewar/errors.hpp"
#include "skewar/normal_cdf.hpp"

#include <cmath>
#include <numbers>

namespace skewar {

void SkewNormalParams::validate() const {
  const Eigen::Index n = mu.size();
  if (n == 0) throw ValidationError("SkewNormalParams: empty location");
  if (R.rows() != n || R.cols() != n) throw ValidationError("SkewNormalParams: R has wrong shape");
  if (Delta.rows() != n || Delta.cols() != n) throw ValidationError("SkewNormalParams: Delta has wrong shape");
  if (!mu.allFinite() || !Delta.allFinite()) throw ValidationError("SkewNormalParams: non-finite entries");
  require_spd(R, "SkewNormalParams::R");
}

double sn_log_pdf(const Vector& z, const SkewNormalParams& params) {
  params.validate();
  const Eigen::Index n = params.dim();
  if (z.size() != n) throw ValidationError("sn_pdf: z has wrong dimension");

  const Matrix omega = symmetrized(params.R + params.Delta * params.Delta.transpose());
  Eigen::LLT<Matrix> llt(omega);
  if (llt.info() != Eigen::Success) throw ValidationError("sn_pdf: Omega is not positive definite");

  const Vector d = z - params.mu + kSqrt2OverPi * params.Delta * Vector::Ones(n);
  const Vector omega_inv_d = llt.solve(d);

  const Matrix L = llt.matrixL();
  const double log_det = 2.0 * L.diagonal().array().log().sum();
  const double log_normal =
      -0.5 * (static_cast<double>(n) * std::log(2.0 * std::numbers::pi) + log_det + d.dot(omega_inv_d));

  const Vector arg = params.Delta.transpose() * omega_inv_d;
  const Matrix trunc_cov =
      symmetrized(Matrix::Identity(n, n) - params.Delta.transpose() * llt.solve(params.Delta));
  if (!is_spd(trunc_cov)) {
    throw ValidationError("sn_pdf: I - Delta^T Omega^{-1} Delta lost positive definiteness");
  }

  double log_cdf = 0.0;
  if (n == 1) {
    log_cdf = log_std_normal_cdf(arg[0] / std::sqrt(trunc_cov(0, 0)));
  } else {
    log_cdf = std::log(mvn_cdf(arg, trunc_cov));
  }
  return static_cast<double>(n) * std::numbers::ln2 + log_normal + log_cdf;
}

double sn_pdf(const Vector& z, const SkewNormalParams& params) { return std::exp(sn_log_pdf(z, params)); }

GaussianMoments sn_moments(const SkewNormalParams& params) {
  params.validate();
  // Var[|N(0,1)|] = 1 - 2/pi for each latent coordinate.
  Matrix cov = params.R + (1.0 - 2.0 / std::numbers::pi) * params.Delta * params.Delta.transpose();
  symmetrize(cov);
  return {params.mu, cov};
}

Vector sn_draw(Rng& rng, const SkewNormalParams& params, const Matrix& chol_R) {
  std::normal_distribution<double> normal;
  const Eigen::Index n = params.dim();
  Vector u(n);
  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i) u[i] = std::abs(normal(rng)) - kSqrt2OverPi;
  for (Eigen::Index i = 0; i < n; ++i) w[i] = normal(rng);
  return params.mu + params.Delta * u + chol_R * w;
}

std::vector<Vector> sn_sample(Rng& rng, const SkewNormalParams& params, std::size_t count) {
  params.validate();
  if (count == 0) throw ValidationError("sn_sample: count must be positive");
  Eigen::LLT<Matrix> llt(params.R);
  if (llt.info() != Eigen::Success) throw ValidationError("sn_sample: Cholesky of R failed");
  const Matrix chol_R = llt.matrixL();
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sn_draw(rng, params, chol_R));
  return out;
}

}  // namespace skewar
