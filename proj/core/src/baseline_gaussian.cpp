#include "skewar/baseline_gaussian.hpp"

#include "skewar/errors.hpp"
#include "skewar/stable_spline.hpp"

#include "regression_projection.hpp"

#include <deque>
#include <string>

namespace skewar {

GaussianFilterState GaussianFilterState::from_covariance(Vector x, const Matrix& P, Matrix Psi, double nu) {
  GaussianFilterState s;
  s.x = std::move(x);
  s.P_sqrt = cholesky_lower(P, "GaussianFilterState::P");
  s.Psi = std::move(Psi);
  s.nu = nu;
  return s;
}

void GaussianFilterState::validate() const {
  const Eigen::Index n = x.size();
  if (n == 0) throw ValidationError("GaussianFilterState: empty coefficient vector");
  if (P_sqrt.rows() != n || P_sqrt.cols() != n) throw ValidationError("GaussianFilterState: P_sqrt has wrong shape");
  if (!x.allFinite()) throw ValidationError("GaussianFilterState: non-finite coefficients");
  if (!is_lower_factor(P_sqrt)) {
    throw ValidationError("GaussianFilterState: P_sqrt must be lower triangular with a positive diagonal");
  }
  require_spd(Psi, "GaussianFilterState::Psi");
  if (!(nu > static_cast<double>(Psi.rows()) + 1.0)) {
    throw ValidationError("GaussianFilterState: nu must exceed n_z + 1 (nu = " + std::to_string(nu) + ")");
  }
}

GaussianFilterState gvb_update(const GaussianFilterState& pred, const Vector& z, const Matrix& C, int iterations) {
  const Eigen::Index n_ar = pred.n_ar();
  const Eigen::Index n_z = pred.n_z();
  if (z.size() != n_z) throw ValidationError("gvb_update: z has wrong dimension");
  if (C.rows() != n_z || C.cols() != n_ar) throw ValidationError("gvb_update: C has wrong shape");
  if (pred.P_sqrt.rows() != n_ar || pred.P_sqrt.cols() != n_ar) {
    throw ValidationError("gvb_update: P_sqrt has wrong shape");
  }
  if (iterations < 1) throw ValidationError("gvb_update: iterations must be at least 1");

  const double nu = pred.nu + 1.0;
  const double r_dof = nu - static_cast<double>(n_z) - 1.0;
  if (!(r_dof > 0.0)) throw ValidationError("gvb_update: nu must exceed n_z + 1");

  // C x = y0 + G w with w ~ N(0, I) a priori; the update is solved for w in
  // information form.
  const detail::RegressionProjection proj(pred.x, pred.P_sqrt, C);
  const Eigen::Index m = proj.reduced_dim();
  const Matrix& G = proj.output_map();
  const Vector z_shift = z - proj.prior_output();

  GaussianFilterState post = pred;
  post.nu = nu;
  Vector w(m);
  Matrix Sw(m, m);
  for (int iter = 0; iter < iterations; ++iter) {
    const std::size_t idx = static_cast<std::size_t>(iter);
    Eigen::LLT<Matrix> r_llt(post.Psi / r_dof);
    if (r_llt.info() != Eigen::Success) throw DegeneracyError("Psi", idx, "expected R is not positive definite");
    const Matrix RinvG = r_llt.solve(G);
    Matrix Lambda = Matrix::Identity(m, m) + G.transpose() * RinvG;
    symmetrize(Lambda);
    Eigen::LLT<Matrix> lam_llt(Lambda);
    if (lam_llt.info() != Eigen::Success) throw DegeneracyError("S", idx, "posterior precision not SPD");
    w = lam_llt.solve(RinvG.transpose() * z_shift);
    Sw = lam_llt.solve(Matrix::Identity(m, m));
    symmetrize(Sw);

    const Vector e = z_shift - G * w;
    post.Psi = pred.Psi + e * e.transpose() + G * Sw * G.transpose();
    symmetrize(post.Psi);
    if (!is_spd(post.Psi)) throw DegeneracyError("Psi", idx, "posterior Psi is not positive definite");
  }

  post.x = proj.lift_mean(w);
  Eigen::LLT<Matrix> w_llt(Sw);
  if (w_llt.info() != Eigen::Success) {
    throw DegeneracyError("P", static_cast<std::size_t>(iterations - 1), "posterior coefficient covariance not SPD");
  }
  try {
    post.P_sqrt = lower_factor_of_gram(proj.lift_sqrt(w_llt.matrixL()));
  } catch (const NumericalError& e) {
    throw DegeneracyError("P", static_cast<std::size_t>(iterations - 1), e.what());
  }
  return post;
}

GaussianFilterState gvb_predict_sqrt(const GaussianFilterState& post, const Matrix& Q_sqrt, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("gvb_predict: gamma must lie in (0, 1]");
  if (Q_sqrt.rows() != post.n_ar()) throw ValidationError("gvb_predict: Q_sqrt has wrong shape");
  Matrix stacked(post.n_ar(), post.n_ar() + Q_sqrt.cols());
  stacked << post.P_sqrt, Q_sqrt;
  GaussianFilterState out;
  out.x = post.x;
  out.P_sqrt = lower_factor_of_gram(stacked);
  out.Psi = gamma * post.Psi;
  out.nu = gamma * post.nu + (1.0 - gamma) * (static_cast<double>(post.n_z()) + 1.0);
  return out;
}

GaussianFilterState gvb_predict(const GaussianFilterState& post, const Matrix& Q, double gamma) {
  if (Q.rows() != post.n_ar() || Q.cols() != post.n_ar()) throw ValidationError("gvb_predict: Q has wrong shape");
  return gvb_predict_sqrt(post, psd_sqrt(Q), gamma);
}

void run_gaussian_identifier(std::span<const Vector> measurements, const GaussianFilterState& init,
                             const IdentifierConfig& cfg, const GaussianFilterObserver& observer) {
  cfg.validate();
  init.validate();
  if (init.n_ar() != cfg.n_ar || init.n_z() != cfg.n_z) {
    throw ValidationError("run_gaussian_identifier: initial state does not match the configured dimensions");
  }
  std::deque<Vector> history;
  std::vector<Vector> window;
  GaussianFilterState state = init;
  const Matrix q_shape = cfg.q_policy.sqrt_shape(cfg.n_ar);
  for (std::size_t k = 0; k < measurements.size(); ++k) {
    const Vector& z = measurements[k];
    try {
      window.assign(history.begin(), history.end());
      const Matrix C = build_regressor(window, cfg.n_ar, cfg.n_z);
      GaussianFilterState post = gvb_update(state, z, C, cfg.vb_iterations);
      if (observer) observer(k + 1, post);
      const double max_diag = post.P_sqrt.rowwise().squaredNorm().maxCoeff();
      state = gvb_predict_sqrt(post, cfg.q_policy.sqrt_scale(max_diag, cfg.gamma) * q_shape, cfg.gamma);
    } catch (const StepError&) {
      throw;
    } catch (const std::exception& e) {
      throw StepError(k + 1, e.what());
    }
    history.push_front(z);
    if (static_cast<Eigen::Index>(history.size()) > cfg.n_ar) history.pop_back();
  }
}

std::vector<GaussianFilterState> run_gaussian_identifier(std::span<const Vector> measurements,
                                                         const GaussianFilterState& init,
                                                         const IdentifierConfig& cfg) {
  std::vector<GaussianFilterState> out;
  out.reserve(measurements.size());
  run_gaussian_identifier(measurements, init, cfg,
                          [&out](std::size_t, const GaussianFilterState& s) { out.push_back(s); });
  return out;
}

GaussianFilterState reference_gaussian_prior(Eigen::Index n_ar, Eigen::Index n_z, double nu_margin) {
  const double nz = static_cast<double>(n_z);
  GaussianFilterState s;
  s.x = Vector::Zero(n_ar);
  s.P_sqrt = cholesky_lower(stable_spline_prior(n_ar), "stable spline prior");
  s.nu = 2.0 * nz + nu_margin;
  s.Psi = (s.nu - nz - 1.0) * Matrix::Identity(n_z, n_z);
  return s;
}

}  // namespace skewar
