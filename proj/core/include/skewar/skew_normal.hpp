#pragma once

#include "skewar/linalg.hpp"
#include "skewar/random.hpp"

#include <cstddef>
#include <vector>

namespace skewar {

// Canonical fundamental skew normal SN(mu, R, Delta), shifted so that
// E[z] = mu and V[z] = R + (1 - 2/pi) Delta Delta^T.
struct SkewNormalParams {
  Vector mu;
  Matrix R;
  Matrix Delta;

  Eigen::Index dim() const { return mu.size(); }

  // Throws ValidationError on dimension mismatch or non-SPD R.
  void validate() const;
};

double sn_log_pdf(const Vector& z, const SkewNormalParams& params);
double sn_pdf(const Vector& z, const SkewNormalParams& params);

GaussianMoments sn_moments(const SkewNormalParams& params);

// Hierarchical sampler:
//   u ~ N+(0, I)  drawn componentwise as |N(0,1)|
//   z = mu + Delta (u - sqrt(2/pi) 1) + chol(R) w,  w ~ N(0, I)
// The |N(0,1)| trick is only valid because the truncated normal has identity
// covariance; do not reuse it for correlated truncation.
std::vector<Vector> sn_sample(Rng& rng, const SkewNormalParams& params, std::size_t count);

// Draws one sample given a precomputed lower Cholesky factor of R.
Vector sn_draw(Rng& rng, const SkewNormalParams& params, const Matrix& chol_R);

}  // namespace skewar
