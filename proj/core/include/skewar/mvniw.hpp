#pragma once

#include "skewar/linalg.hpp"
#include "skewar/random.hpp"

namespace skewar {

// Matrix-variate-normal inverse-Wishart distribution over (R, Delta):
//   Delta | R ~ MN(DeltaHat, R (among-row), V (among-column))
//   R         ~ IW(Psi, nu)
// The IW convention is fixed by E[R^{-1}] = (nu - n - 1) Psi^{-1}, i.e.
// R^{-1} is Wishart with scale Psi^{-1} and nu - n - 1 degrees of freedom.
struct MvniwParams {
  Matrix DeltaHat;
  Matrix V;
  Matrix Psi;
  double nu = 0.0;

  Eigen::Index dim() const { return Psi.rows(); }

  // SPD V and Psi, consistent sizes, nu > 2 n.
  void validate() const;
};

// E[R^{-1}]^{-1} = Psi / (nu - n - 1).
Matrix expected_R(const MvniwParams& p);

struct MvniwCrossMoments {
  Matrix ERinvDelta;         // E[R^{-1} Delta]
  Matrix EDeltaTRinvDelta;   // E[Delta^T R^{-1} Delta]
};

MvniwCrossMoments mvniw_cross_moments(const MvniwParams& p);

struct MvniwDraw {
  Matrix R;
  Matrix Delta;
};

// Bartlett-decomposition Wishart draw for R^{-1}, then a matrix-normal draw
// for Delta.
MvniwDraw mvniw_sample(Rng& rng, const MvniwParams& p);

// Forgetting-factor prediction:
//   (DeltaHat, V / gamma, gamma Psi, gamma nu + (1 - gamma) 2 n)
MvniwParams forget(const MvniwParams& p, double gamma);

}  // namespace skewar
