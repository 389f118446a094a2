#pragma once

#include "skewar/linalg.hpp"

#include <span>

namespace skewar {

struct ScalarMoments {
  double mean;
  double var;
};

// Moments of N(m, s2) truncated to [0, inf).
// For alpha = -m / sqrt(s2) > 8 the inverse Mills ratio comes from a
// continued fraction evaluated so that neither output cancels; for
// alpha < -8 the constraint is treated as inactive.
ScalarMoments truncated_scalar_moments(double m, double s2);

// Sequential truncation of N(g.mean, g.cov) to {x_i >= 0 : i in constrained},
// one constraint at a time, in the order given (0-based indices). Each step
// moment-matches the scalar marginal and propagates it through the linear
// Gaussian conditioning rules. Exact for diagonal covariance, otherwise an
// approximation whose result depends on the order.
//
// Throws DegeneracyError("marginal variance", step) when a marginal variance
// is not positive.
GaussianMoments sequential_truncate(const GaussianMoments& g, std::span<const Eigen::Index> constrained);

// In-place variant used by the filter's inner loop.
void sequential_truncate_inplace(Vector& mean, Matrix& cov, std::span<const Eigen::Index> constrained);

}  // namespace skewar
