#pragma once

#include "skewar/linalg.hpp"

namespace skewar {

// First-order stable spline kernel K_ij = 0.5^max(i, j) (0-based indices).
Matrix stable_spline_kernel(Eigen::Index n);

// Initial AR coefficient covariance: (29/3) * stable_spline_kernel(n).
Matrix stable_spline_prior(Eigen::Index n);

// Process noise that keeps the stable-spline shape of the prior:
//   Q_ij = (1/gamma - 1) * max(diag(P)) * 0.5^max(i, j)
// gamma = 1 gives the zero matrix.
Matrix adaptive_Q(const Matrix& P, double gamma);

}  // namespace skewar
