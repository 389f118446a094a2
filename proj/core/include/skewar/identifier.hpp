#pragma once

#include "skewar/linalg.hpp"
#include "skewar/mvniw.hpp"

#include <cstddef>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace skewar {

// Recursive posterior of the skew-innovation AR identifier.
// The coefficient covariance is held as its lower Cholesky factor.
struct FilterState {
  Vector x;           // AR coefficient mean
  Matrix P_sqrt;      // P = P_sqrt P_sqrt^T, lower triangular, positive diagonal
  MvniwParams noise;  // q(R, Delta)

  static FilterState from_covariance(Vector x, const Matrix& P, MvniwParams noise);

  Matrix P() const { return P_sqrt * P_sqrt.transpose(); }
  Eigen::Index n_ar() const { return x.size(); }
  Eigen::Index n_z() const { return noise.dim(); }

  void validate() const;
};

// Last inner-loop iterate of the VB measurement update.
struct VbIterate {
  Vector xi;         // joint mean of (x, u)
  Matrix Xi;         // joint covariance of (x, u)
  Vector u_mean;     // E[u]
  Matrix U;          // Cov[u]
  Matrix Upsilon;    // Cov[x, u]
  int iterations = 0;
  // ||xi_i - xi_{i-1}|| / ||xi_i|| for every inner iteration after the first.
  std::vector<double> xi_changes;
};

struct QPolicy {
  enum class Kind { Fixed, AdaptiveStableSpline };
  Kind kind = Kind::AdaptiveStableSpline;
  Matrix fixed;  // used when kind == Fixed

  static QPolicy adaptive() { return {}; }
  static QPolicy constant(Matrix q) { return {Kind::Fixed, std::move(q)}; }

  // Q_k given the current posterior coefficient covariance.
  Matrix evaluate(const Matrix& P_post, double gamma) const;

  // Q_k = (scale * shape)(scale * shape)^T with shape = sqrt_shape(n_ar) and
  // scale = sqrt_scale(max diag(P_post), gamma).
  Matrix sqrt_shape(Eigen::Index n_ar) const;
  double sqrt_scale(double max_diag_P, double gamma) const;
};

struct IdentifierConfig {
  Eigen::Index n_ar = 25;
  Eigen::Index n_z = 2;
  double gamma = 0.975;
  int vb_iterations = 10;
  // When set, the inner loop also stops once ||dxi|| / ||xi|| < tolerance.
  std::optional<double> vb_tolerance;
  QPolicy q_policy;

  void validate() const;
};

// C_k = [z_{k-1} z_{k-2} ... z_{k-n_ar}]. `history` is ordered most recent
// first and may be shorter than n_ar during warm-up; missing columns are 0.
Matrix build_regressor(std::span<const Vector> history, Eigen::Index n_ar, Eigen::Index n_z);

struct MeasurementUpdate {
  FilterState post;
  VbIterate last_iterate;
};

// Variational measurement update for one measurement z with regressor C.
// The inner loop is solved in information form on (C x, u), the only part of
// the state a measurement touches, and the coefficient posterior is lifted
// back in square-root form once at the end.
// Throws DegeneracyError naming "S", "Xi", "V", "Psi" or "P" with the inner
// iteration.
MeasurementUpdate vb_measurement_update(const FilterState& pred, const Vector& z, const Matrix& C,
                                        const IdentifierConfig& cfg);

// x unchanged, P + Q, noise forgotten with gamma.
FilterState predict(const FilterState& post, const Matrix& Q, double gamma);

// predict() with Q = Q_sqrt Q_sqrt^T; Q_sqrt may have any number of columns.
FilterState predict_sqrt(const FilterState& post, const Matrix& Q_sqrt, double gamma);

// Called with the 1-based step index and the posterior (k|k).
using FilterObserver = std::function<void(std::size_t, const FilterState&)>;

// Runs update-then-predict over all measurements. Errors are rethrown as
// StepError carrying the step index.
void run_identifier(std::span<const Vector> measurements, const FilterState& init,
                    const IdentifierConfig& cfg, const FilterObserver& observer);

std::vector<FilterState> run_identifier(std::span<const Vector> measurements, const FilterState& init,
                                        const IdentifierConfig& cfg);

// Shape of the initial skew prior:
//   DeltaHat = delta_scale I, V = v_scale I, E[R^{-1}]^{-1} = r_share I.
struct SkewPriorShape {
  double delta_scale = std::sqrt(std::numbers::pi / 4.0);
  double v_scale = 1.0;
  double r_share = 0.5;

  void validate() const;
};

// x = 0, P = stable spline prior, nu = 2 n_z + nu_margin,
// Psi = r_share (nu - n_z - 1) I.
FilterState skew_prior(Eigen::Index n_ar, Eigen::Index n_z, double nu_margin, const SkewPriorShape& shape);

// Prior used for the skew identifier in the reference experiment:
//   x = 0, P = stable spline prior, DeltaHat = sqrt(pi/4) I, V = I,
//   nu = 2 n_z + nu_margin, Psi = ((nu - n_z - 1) / 2) I.
// The unit variance is split equally: E[R^{-1}]^{-1} = E[Delta]^2 (2/pi) = I/2.
FilterState reference_skew_prior(Eigen::Index n_ar, Eigen::Index n_z, double nu_margin = 1e-10);

}  // namespace skewar
