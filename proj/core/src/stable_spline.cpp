#include "skewar/stable_spline.hpp"

#include "skewar/errors.hpp"

#include <algorithm>
#include <cmath>

namespace skewar {

Matrix stable_spline_kernel(Eigen::Index n) {
  if (n < 1) throw ValidationError("stable_spline_kernel: size must be positive");
  Matrix K(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) K(i, j) = std::ldexp(1.0, -static_cast<int>(std::max(i, j)));
  return K;
}

Matrix stable_spline_prior(Eigen::Index n) { return (29.0 / 3.0) * stable_spline_kernel(n); }

Matrix adaptive_Q(const Matrix& P, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("adaptive_Q: gamma must lie in (0, 1]");
  if (P.rows() != P.cols() || P.rows() == 0) throw ValidationError("adaptive_Q: P must be square");
  const double scale = (1.0 / gamma - 1.0) * P.diagonal().maxCoeff();
  return scale * stable_spline_kernel(P.rows());
}

}  // namespace skewar
