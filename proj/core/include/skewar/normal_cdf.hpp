#pragma once

#include "skewar/linalg.hpp"

namespace skewar {

inline constexpr double kSqrt2OverPi = 0.79788456080286535588;  // sqrt(2/pi)

double std_normal_pdf(double x);
double std_normal_cdf(double x);
// log Phi(x), accurate far into the lower tail.
double log_std_normal_cdf(double x);

// P(X1 <= h, X2 <= k) for standard bivariate normal with correlation rho.
// Port of Genz's BVND (double precision, ~1e-15 absolute).
double bivariate_normal_cdf(double h, double k, double rho);

// P(X <= upper) for X ~ N(0, cov), cov SPD of any dimension.
//   n = 1: erfc closed form.
//   n = 2: bivariate_normal_cdf on the standardized bounds.
//   n >= 3: Genz separation-of-variables transform, each nested level
//           integrated with adaptive Gauss-Kronrod (21 points).
double mvn_cdf(const Vector& upper, const Matrix& cov);

}  // namespace skewar
