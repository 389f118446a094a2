#pragma once

#include "skewar/identifier.hpp"
#include "skewar/linalg.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace skewar {

// Variational Bayes adaptive Kalman filter with normal innovations and an
// inverse-Wishart posterior on the noise covariance. It is the Delta = 0
// specialization of the skew identifier.
struct GaussianFilterState {
  Vector x;
  Matrix P_sqrt;  // P = P_sqrt P_sqrt^T, lower triangular, positive diagonal
  Matrix Psi;
  double nu = 0.0;

  static GaussianFilterState from_covariance(Vector x, const Matrix& P, Matrix Psi, double nu);

  Matrix P() const { return P_sqrt * P_sqrt.transpose(); }
  Eigen::Index n_ar() const { return x.size(); }
  Eigen::Index n_z() const { return Psi.rows(); }

  // Valid P_sqrt, SPD Psi, nu > n_z + 1.
  void validate() const;
};

inline Matrix expected_R(const GaussianFilterState& s) {
  return s.Psi / (s.nu - static_cast<double>(s.n_z()) - 1.0);
}

GaussianFilterState gvb_update(const GaussianFilterState& pred, const Vector& z, const Matrix& C,
                               int iterations);

// Psi <- gamma Psi, nu <- gamma nu + (1 - gamma)(n_z + 1), P <- P + Q.
GaussianFilterState gvb_predict(const GaussianFilterState& post, const Matrix& Q, double gamma);

// gvb_predict() with Q = Q_sqrt Q_sqrt^T.
GaussianFilterState gvb_predict_sqrt(const GaussianFilterState& post, const Matrix& Q_sqrt, double gamma);

using GaussianFilterObserver = std::function<void(std::size_t, const GaussianFilterState&)>;

// Same driver as run_identifier; uses cfg.gamma, cfg.vb_iterations and cfg.q_policy.
void run_gaussian_identifier(std::span<const Vector> measurements, const GaussianFilterState& init,
                             const IdentifierConfig& cfg, const GaussianFilterObserver& observer);

std::vector<GaussianFilterState> run_gaussian_identifier(std::span<const Vector> measurements,
                                                         const GaussianFilterState& init,
                                                         const IdentifierConfig& cfg);

// x = 0, P = stable spline prior, nu = 2 n_z + nu_margin, Psi = (nu - n_z - 1) I.
GaussianFilterState reference_gaussian_prior(Eigen::Index n_ar, Eigen::Index n_z, double nu_margin = 1e-10);

}  // namespace skewar
