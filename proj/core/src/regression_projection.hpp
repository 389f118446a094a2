#pragma once

#include "skewar/linalg.hpp"

namespace skewar::detail {

// Prior x = x0 + L w with w ~ N(0, I), observed only through y = C x.
// A QR factorization of (C L)^T splits w into m = min(n_ar, n_z) coordinates
// w_r that move y, y = C x0 + G w_r, and the rest, which no measurement of y
// can change. Updates are then solved for w_r and lifted back to x.
class RegressionProjection {
 public:
  RegressionProjection(const Vector& x0, const Matrix& L, const Matrix& C);

  Eigen::Index reduced_dim() const { return m_; }
  const Vector& prior_output() const { return y0_; }
  const Matrix& output_map() const { return G_; }

  // x mean for a reduced mean of w_r.
  Vector lift_mean(const Vector& w_mean) const;
  // Cov[x, .] for a reduced Cov[w_r, .].
  Matrix lift_cross(const Matrix& w_cross) const;
  // Square root of Cov[x] when Cov[w_r] = F F^T.
  Matrix lift_sqrt(const Matrix& F) const;

 private:
  Eigen::Index m_;
  Vector x0_;
  Vector y0_;
  Matrix G_;
  Matrix LQ_;
};

}  // namespace skewar::detail
