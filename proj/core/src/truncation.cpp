#include "skewar/truncation.hpp"

#include "skewar/errors.hpp"
#include "skewar/normal_cdf.hpp"

#include <cmath>

namespace skewar {
namespace {

constexpr double kTailSwitch = 8.0;
constexpr int kContinuedFractionDepth = 80;

// Upper-tail truncation for alpha > kTailSwitch. With the Mills-ratio
// continued fraction F_n = alpha + (n + 1) / F_{n+1},
//   lambda - alpha       = 1 / F_1
//   1 - lambda (lambda - alpha) = (alpha + 4 / F_2 - 3 / F_3) / (F_1^2 F_2)
// so both moments are formed without cancellation.
ScalarMoments far_tail_moments(double alpha, double s, double s2) {
  double f = alpha;
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;
  for (int n = kContinuedFractionDepth; n >= 1; --n) {
    f = alpha + static_cast<double>(n + 1) / f;
    if (n == 3) f3 = f;
    if (n == 2) f2 = f;
    if (n == 1) f1 = f;
  }
  const double delta = 1.0 / f1;
  const double var_ratio = (alpha + 4.0 / f2 - 3.0 / f3) / (f1 * f1 * f2);
  return {s * delta, s2 * var_ratio};
}

}  // namespace

ScalarMoments truncated_scalar_moments(double m, double s2) {
  if (!(s2 > 0.0) || !std::isfinite(s2) || !std::isfinite(m)) {
    throw ValidationError("truncated_scalar_moments: variance must be positive and finite");
  }
  const double s = std::sqrt(s2);
  const double alpha = -m / s;
  if (alpha < -kTailSwitch) {
    return {m, s2};
  }
  if (alpha > kTailSwitch) {
    return far_tail_moments(alpha, s, s2);
  }
  const double lambda = std_normal_pdf(alpha) / std_normal_cdf(-alpha);
  return {m + s * lambda, s2 * (1.0 - lambda * (lambda - alpha))};
}

void sequential_truncate_inplace(Vector& mean, Matrix& cov, std::span<const Eigen::Index> constrained) {
  const Eigen::Index d = mean.size();
  Vector c(d);
  for (std::size_t step = 0; step < constrained.size(); ++step) {
    const Eigen::Index i = constrained[step];
    if (i < 0 || i >= d) {
      throw ValidationError("sequential_truncate: constraint index out of range");
    }
    const double m = mean[i];
    const double s2 = cov(i, i);
    if (!(s2 > 0.0) || !std::isfinite(s2)) {
      throw DegeneracyError("marginal variance", step);
    }
    const ScalarMoments t = truncated_scalar_moments(m, s2);
    c = cov.col(i);
    mean.noalias() += c * ((t.mean - m) / s2);
    cov.noalias() += c * c.transpose() * ((t.var - s2) / (s2 * s2));
    // Pin the truncated coordinate exactly and keep symmetry.
    mean[i] = t.mean;
    cov(i, i) = t.var;
  }
}

GaussianMoments sequential_truncate(const GaussianMoments& g, std::span<const Eigen::Index> constrained) {
  const Eigen::Index d = g.mean.size();
  if (g.cov.rows() != d || g.cov.cols() != d) {
    throw ValidationError("sequential_truncate: covariance has wrong shape");
  }
  GaussianMoments out = g;
  sequential_truncate_inplace(out.mean, out.cov, constrained);
  return out;
}

}  // namespace skewar
