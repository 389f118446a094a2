#include "skewar/identifier.hpp"

#include "skewar/errors.hpp"
#include "skewar/normal_cdf.hpp"
#include "skewar/stable_spline.hpp"
#include "skewar/truncation.hpp"

#include "regression_projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <deque>
#include <numbers>
#include <numeric>

namespace skewar {

FilterState FilterState::from_covariance(Vector x, const Matrix& P, MvniwParams noise) {
  FilterState s;
  s.x = std::move(x);
  s.P_sqrt = cholesky_lower(P, "FilterState::P");
  s.noise = std::move(noise);
  return s;
}

void FilterState::validate() const {
  const Eigen::Index n = x.size();
  if (n == 0) throw ValidationError("FilterState: empty coefficient vector");
  if (P_sqrt.rows() != n || P_sqrt.cols() != n) throw ValidationError("FilterState: P_sqrt has wrong shape");
  if (!x.allFinite()) throw ValidationError("FilterState: non-finite coefficients");
  if (!is_lower_factor(P_sqrt)) {
    throw ValidationError("FilterState: P_sqrt must be lower triangular with a positive diagonal");
  }
  noise.validate();
}

Matrix QPolicy::evaluate(const Matrix& P_post, double gamma) const {
  if (kind == Kind::Fixed) {
    return fixed;
  }
  return adaptive_Q(P_post, gamma);
}

Matrix QPolicy::sqrt_shape(Eigen::Index n_ar) const {
  if (kind == Kind::Fixed) {
    return psd_sqrt(fixed);
  }
  return cholesky_lower(stable_spline_kernel(n_ar), "stable spline kernel");
}

double QPolicy::sqrt_scale(double max_diag_P, double gamma) const {
  if (kind == Kind::Fixed) {
    return 1.0;
  }
  return std::sqrt((1.0 / gamma - 1.0) * max_diag_P);
}

void IdentifierConfig::validate() const {
  if (n_ar < 1) throw ValidationError("IdentifierConfig: n_ar must be positive");
  if (n_z < 1) throw ValidationError("IdentifierConfig: n_z must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("IdentifierConfig: gamma must lie in (0, 1]");
  if (vb_iterations < 1) throw ValidationError("IdentifierConfig: vb_iterations must be at least 1");
  if (vb_tolerance && !(*vb_tolerance > 0.0)) throw ValidationError("IdentifierConfig: vb_tolerance must be positive");
  if (q_policy.kind == QPolicy::Kind::Fixed) {
    if (q_policy.fixed.rows() != n_ar || q_policy.fixed.cols() != n_ar) {
      throw ValidationError("IdentifierConfig: fixed Q has wrong shape");
    }
    require_symmetric(q_policy.fixed, "IdentifierConfig::Q");
  }
}

Matrix build_regressor(std::span<const Vector> history, Eigen::Index n_ar, Eigen::Index n_z) {
  Matrix C = Matrix::Zero(n_z, n_ar);
  const Eigen::Index available = std::min<Eigen::Index>(n_ar, static_cast<Eigen::Index>(history.size()));
  for (Eigen::Index j = 0; j < available; ++j) {
    if (history[j].size() != n_z) throw ValidationError("build_regressor: measurement has wrong dimension");
    C.col(j) = history[j];
  }
  return C;
}

MeasurementUpdate vb_measurement_update(const FilterState& pred, const Vector& z, const Matrix& C,
                                        const IdentifierConfig& cfg) {
  const Eigen::Index n_ar = pred.n_ar();
  const Eigen::Index n_z = pred.n_z();
  if (z.size() != n_z) throw ValidationError("vb_measurement_update: z has wrong dimension");
  if (C.rows() != n_z || C.cols() != n_ar) throw ValidationError("vb_measurement_update: C has wrong shape");
  if (pred.P_sqrt.rows() != n_ar || pred.P_sqrt.cols() != n_ar) {
    throw ValidationError("vb_measurement_update: P_sqrt has wrong shape");
  }
  if (!(pred.noise.nu > 2.0 * static_cast<double>(n_z))) {
    throw ValidationError("vb_measurement_update: prior nu must exceed 2 n_z");
  }
  if (cfg.vb_iterations < 1) throw ValidationError("vb_measurement_update: vb_iterations must be at least 1");

  const double nz = static_cast<double>(n_z);
  const Matrix I = Matrix::Identity(n_z, n_z);
  const Vector ones = Vector::Ones(n_z);
  const MvniwParams& prior = pred.noise;
  const double nu = prior.nu + 1.0;
  const double r_dof = nu - nz - 1.0;

  // Reduced joint (w, u): C x = y0 + G w, w ~ N(0, I) a priori.
  const detail::RegressionProjection proj(pred.x, pred.P_sqrt, C);
  const Eigen::Index m = proj.reduced_dim();
  const Eigen::Index p = m + n_z;
  const Matrix& G = proj.output_map();
  const Vector z_shift = z - proj.prior_output();

  Matrix V0_inv;
  if (!spd_inverse(prior.V, V0_inv)) throw DegeneracyError("V", 0, "prior V is not invertible");
  const Matrix D0_V0inv = prior.DeltaHat * V0_inv;

  Matrix Delta = prior.DeltaHat;
  Matrix V = prior.V;
  Matrix Psi = prior.Psi;

  MeasurementUpdate result;
  VbIterate& it = result.last_iterate;
  it.xi_changes.reserve(static_cast<std::size_t>(cfg.vb_iterations));

  Matrix H(n_z, p);
  H.leftCols(m) = G;
  Matrix Lambda = Matrix::Zero(p, p);
  Vector eta = Vector::Zero(p);
  GaussianMoments red;
  Vector xi(n_ar + n_z);
  Vector xi_previous;
  Matrix V_inv;
  std::vector<Eigen::Index> u_coords(static_cast<std::size_t>(n_z));
  std::iota(u_coords.begin(), u_coords.end(), m);

  for (int iter = 0; iter < cfg.vb_iterations; ++iter) {
    const std::size_t idx = static_cast<std::size_t>(iter);
    Eigen::LLT<Matrix> r_llt(Psi / r_dof);
    if (r_llt.info() != Eigen::Success) throw DegeneracyError("Psi", idx, "expected R is not positive definite");

    // Prior of u, N(W n sqrt(2/pi) V 1, W) with W = (I + n V)^-1, in
    // information form. The measurement is z = y0 + G w + Delta (u - sqrt(2/pi) 1) + v.
    H.rightCols(n_z) = Delta;
    const Matrix RinvH = r_llt.solve(H);
    const Vector observed = z_shift + kSqrt2OverPi * (Delta * ones);
    Lambda.setZero();
    Lambda.topLeftCorner(m, m).setIdentity();
    Lambda.bottomRightCorner(n_z, n_z) = I + nz * V;
    Lambda.noalias() += H.transpose() * RinvH;
    symmetrize(Lambda);
    eta.head(m).setZero();
    eta.tail(n_z) = nz * kSqrt2OverPi * (V * ones);
    eta.noalias() += RinvH.transpose() * observed;

    Eigen::LLT<Matrix> lam_llt(Lambda);
    if (lam_llt.info() != Eigen::Success) throw DegeneracyError("S", idx, "posterior precision not SPD");
    red.mean = lam_llt.solve(eta);
    red.cov = lam_llt.solve(Matrix::Identity(p, p));
    symmetrize(red.cov);

    try {
      sequential_truncate_inplace(red.mean, red.cov, u_coords);
    } catch (const DegeneracyError& e) {
      throw DegeneracyError("Xi", idx, e.what());
    }

    const auto w_mean = red.mean.head(m);
    const auto u_mean = red.mean.tail(n_z);
    const auto U = red.cov.bottomRightCorner(n_z, n_z);
    const Vector u_tilde = u_mean - kSqrt2OverPi * ones;

    // q(R, Delta) update. C x = y0 + G w and C Upsilon = G Cov[w, u].
    V_inv = U + u_tilde * u_tilde.transpose() + V0_inv;
    symmetrize(V_inv);
    if (!spd_inverse(V_inv, V)) throw DegeneracyError("V", idx, "posterior V is not invertible");

    const Vector e = z_shift - G * w_mean;
    Delta = (e * u_tilde.transpose() - G * red.cov.topRightCorner(m, n_z) + D0_V0inv) * V;

    // Psi = D0 V0^-1 D0^T - D V^-1 D^T + e e^T + C P C^T + Psi0, evaluated
    // after completing the square in Delta so that every term is PSD:
    //   Psi0 + r r^T + C~ Xi C~^T + (D - D0) V0^-1 (D - D0)^T,
    //   r = z - C x - D u~,  C~ = [C D].
    const Vector r = e - Delta * u_tilde;
    H.rightCols(n_z) = Delta;
    const Matrix dD = Delta - prior.DeltaHat;
    Psi = prior.Psi + r * r.transpose() + H * red.cov * H.transpose() + dD * V0_inv * dD.transpose();
    symmetrize(Psi);
    if (!is_spd(Psi)) throw DegeneracyError("Psi", idx, "posterior Psi is not positive definite");

    xi.head(n_ar) = proj.lift_mean(w_mean);
    xi.tail(n_z) = u_mean;
    it.iterations = iter + 1;
    if (iter > 0) {
      const double norm = std::max(xi.norm(), std::numeric_limits<double>::min());
      const double change = (xi - xi_previous).norm() / norm;
      it.xi_changes.push_back(change);
      if (cfg.vb_tolerance && change < *cfg.vb_tolerance) break;
    }
    xi_previous = xi;
  }

  FilterState& post = result.post;
  post.x = xi.head(n_ar);
  Eigen::LLT<Matrix> w_llt(red.cov.topLeftCorner(m, m));
  if (w_llt.info() != Eigen::Success) {
    throw DegeneracyError("P", static_cast<std::size_t>(it.iterations - 1), "posterior coefficient covariance not SPD");
  }
  try {
    post.P_sqrt = lower_factor_of_gram(proj.lift_sqrt(w_llt.matrixL()));
  } catch (const NumericalError& e) {
    throw DegeneracyError("P", static_cast<std::size_t>(it.iterations - 1), e.what());
  }
  post.noise.DeltaHat = Delta;
  post.noise.V = V;
  post.noise.Psi = Psi;
  post.noise.nu = nu;

  it.xi = xi;
  it.u_mean = xi.tail(n_z);
  it.U = red.cov.bottomRightCorner(n_z, n_z);
  it.Upsilon = proj.lift_cross(red.cov.topRightCorner(m, n_z));
  it.Xi.resize(n_ar + n_z, n_ar + n_z);
  it.Xi.topLeftCorner(n_ar, n_ar) = post.P();
  it.Xi.topRightCorner(n_ar, n_z) = it.Upsilon;
  it.Xi.bottomLeftCorner(n_z, n_ar) = it.Upsilon.transpose();
  it.Xi.bottomRightCorner(n_z, n_z) = it.U;
  return result;
}

FilterState predict_sqrt(const FilterState& post, const Matrix& Q_sqrt, double gamma) {
  if (Q_sqrt.rows() != post.n_ar()) throw ValidationError("predict: Q_sqrt has wrong shape");
  Matrix stacked(post.n_ar(), post.n_ar() + Q_sqrt.cols());
  stacked << post.P_sqrt, Q_sqrt;
  FilterState out;
  out.x = post.x;
  out.P_sqrt = lower_factor_of_gram(stacked);
  out.noise = forget(post.noise, gamma);
  return out;
}

FilterState predict(const FilterState& post, const Matrix& Q, double gamma) {
  if (Q.rows() != post.n_ar() || Q.cols() != post.n_ar()) {
    throw ValidationError("predict: Q has wrong shape");
  }
  return predict_sqrt(post, psd_sqrt(Q), gamma);
}

void run_identifier(std::span<const Vector> measurements, const FilterState& init, const IdentifierConfig& cfg,
                    const FilterObserver& observer) {
  cfg.validate();
  init.validate();
  if (init.n_ar() != cfg.n_ar || init.n_z() != cfg.n_z) {
    throw ValidationError("run_identifier: initial state does not match the configured dimensions");
  }

  std::deque<Vector> history;
  std::vector<Vector> window;
  FilterState state = init;
  const Matrix q_shape = cfg.q_policy.sqrt_shape(cfg.n_ar);
  for (std::size_t k = 0; k < measurements.size(); ++k) {
    const Vector& z = measurements[k];
    try {
      window.assign(history.begin(), history.end());
      const Matrix C = build_regressor(window, cfg.n_ar, cfg.n_z);
      MeasurementUpdate update = vb_measurement_update(state, z, C, cfg);
      if (observer) observer(k + 1, update.post);
      const double max_diag = update.post.P_sqrt.rowwise().squaredNorm().maxCoeff();
      state = predict_sqrt(update.post, cfg.q_policy.sqrt_scale(max_diag, cfg.gamma) * q_shape, cfg.gamma);
    } catch (const StepError&) {
      throw;
    } catch (const std::exception& e) {
      throw StepError(k + 1, e.what());
    }
    history.push_front(z);
    if (static_cast<Eigen::Index>(history.size()) > cfg.n_ar) history.pop_back();
  }
}

std::vector<FilterState> run_identifier(std::span<const Vector> measurements, const FilterState& init,
                                        const IdentifierConfig& cfg) {
  std::vector<FilterState> out;
  out.reserve(measurements.size());
  run_identifier(measurements, init, cfg, [&out](std::size_t, const FilterState& s) { out.push_back(s); });
  return out;
}

void SkewPriorShape::validate() const {
  if (!std::isfinite(delta_scale)) throw ValidationError("skew prior: delta_scale must be finite");
  if (!(v_scale > 0.0)) throw ValidationError("skew prior: v_scale must be positive");
  if (!(r_share > 0.0)) throw ValidationError("skew prior: r_share must be positive");
}

FilterState skew_prior(Eigen::Index n_ar, Eigen::Index n_z, double nu_margin, const SkewPriorShape& shape) {
  shape.validate();
  if (!(nu_margin > 0.0)) throw ValidationError("skew prior: nu_margin must be positive");
  const double nz = static_cast<double>(n_z);
  const Matrix I = Matrix::Identity(n_z, n_z);
  FilterState s;
  s.x = Vector::Zero(n_ar);
  s.P_sqrt = cholesky_lower(stable_spline_prior(n_ar), "stable spline prior");
  s.noise.nu = 2.0 * nz + nu_margin;
  s.noise.DeltaHat = shape.delta_scale * I;
  s.noise.V = shape.v_scale * I;
  s.noise.Psi = shape.r_share * (s.noise.nu - nz - 1.0) * I;
  return s;
}

FilterState reference_skew_prior(Eigen::Index n_ar, Eigen::Index n_z, double nu_margin) {
  return skew_prior(n_ar, n_z, nu_margin, SkewPriorShape{});
}

}  // namespace skewar
