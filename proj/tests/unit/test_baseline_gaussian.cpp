#include "skewar/baseline_gaussian.hpp"
#include "skewar/errors.hpp"
#include "skewar/sim_harness.hpp"
#include "skewar/stable_spline.hpp"

#include "oracles.hpp"

#include <boost/math/distributions/binomial.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace skewar {
namespace {

GaussianFilterState scalar_state(double x, double P, double Psi, double nu) {
  return GaussianFilterState::from_covariance(Vector::Constant(1, x), Matrix::Constant(1, 1, P),
                                              Matrix::Constant(1, 1, Psi), nu);
}

TEST(GaussianVb, HandComputedStep) {
  const GaussianFilterState post =
      gvb_update(scalar_state(0.0, 1.0, 1.0, 5.0), Vector::Ones(1), Matrix::Identity(1, 1), 1);
  EXPECT_EQ(post.nu, 6.0);
  EXPECT_NEAR(post.x[0], 0.8, 1e-15);
  EXPECT_NEAR(post.P()(0, 0), 0.2, 1e-15);
  EXPECT_NEAR(post.Psi(0, 0), 1.24, 1e-14);
}

TEST(GaussianVb, ConcentratedPriorIsKalman) {
  testing::Gen gen(71);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n_z = 1 + trial % 3;
    const Eigen::Index n_ar = 1 + trial % 5;
    const Matrix R_true = gen.spd(n_z, 0.2);
    const double nu = 1e12;
    const GaussianFilterState pred = GaussianFilterState::from_covariance(
        gen.normal_vector(n_ar), gen.spd(n_ar), (nu - static_cast<double>(n_z) - 1.0) * R_true, nu);
    const Matrix C = gen.normal_matrix(n_z, n_ar);
    const Vector z = gen.normal_vector(n_z);
    const testing::KalmanStep ref = testing::kalman_update(pred.x, pred.P(), C, R_true, z);
    const GaussianFilterState post = gvb_update(pred, z, C, 10);
    EXPECT_LT((post.x - ref.x).cwiseAbs().maxCoeff(), 1e-8) << trial;
    EXPECT_LT((post.P() - ref.P).cwiseAbs().maxCoeff(), 1e-8) << trial;
  }
}

// Straight-line iteration in covariance form.
TEST(GaussianVb, AgreesWithCovarianceFormIteration) {
  testing::Gen gen(72);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n_z = 1 + trial % 3;
    const Eigen::Index n_ar = 1 + trial % 6;
    const double nu0 = static_cast<double>(n_z) + 1.0 + gen.uniform(0.5, 10.0);
    const Matrix Psi0 = gen.spd(n_z, 0.3);
    const GaussianFilterState pred =
        GaussianFilterState::from_covariance(gen.normal_vector(n_ar), gen.spd(n_ar, 0.1), Psi0, nu0);
    const Matrix C = gen.normal_matrix(n_z, n_ar);
    const Vector z = gen.normal_vector(n_z);
    const int iterations = 1 + trial % 7;

    const double nu = nu0 + 1.0;
    Matrix Psi = Psi0;
    Vector x;
    Matrix P;
    for (int it = 0; it < iterations; ++it) {
      const Matrix R = Psi / (nu - static_cast<double>(n_z) - 1.0);
      const testing::KalmanStep k = testing::kalman_update(pred.x, pred.P(), C, R, z);
      x = k.x;
      P = k.P;
      const Vector e = z - C * x;
      Psi = Psi0 + e * e.transpose() + C * P * C.transpose();
    }
    const GaussianFilterState post = gvb_update(pred, z, C, iterations);
    EXPECT_EQ(post.nu, nu);
    EXPECT_LT((post.x - x).norm(), 1e-10 * std::max(1.0, x.norm())) << trial;
    EXPECT_LT((post.P() - P).norm(), 1e-10 * std::max(1.0, P.norm())) << trial;
    EXPECT_LT((post.Psi - Psi).norm(), 1e-10 * std::max(1.0, Psi.norm())) << trial;
  }
}

TEST(GaussianVb, PredictExamples) {
  const GaussianFilterState s = GaussianFilterState::from_covariance(
      Vector::Ones(2), Matrix::Identity(2, 2), Matrix::Identity(2, 2), 5.0);
  const GaussianFilterState same = gvb_predict(s, Matrix::Zero(2, 2), 1.0);
  EXPECT_EQ(same.Psi, s.Psi);
  EXPECT_EQ(same.nu, s.nu);
  const GaussianFilterState f = gvb_predict(s, 0.1 * Matrix::Identity(2, 2), 0.975);
  EXPECT_NEAR(f.nu, 4.95, 1e-14);
  EXPECT_LT((f.Psi - 0.975 * Matrix::Identity(2, 2)).norm(), 1e-15);
  EXPECT_LT((f.P() - 1.1 * Matrix::Identity(2, 2)).norm(), 1e-14);
  EXPECT_THROW(gvb_predict(s, Matrix::Zero(2, 2), 0.0), ValidationError);
}

TEST(GaussianVb, StateValidation) {
  EXPECT_THROW(scalar_state(0.0, 1.0, 1.0, 2.0).validate(), ValidationError);
  EXPECT_THROW(scalar_state(0.0, 1.0, -1.0, 5.0).validate(), ValidationError);
  EXPECT_NO_THROW(scalar_state(0.0, 1.0, 1.0, 2.0 + 1e-9).validate());
}

TEST(GaussianVb, InvariantsAlongTrajectory) {
  Rng rng(73);
  const Vector coeffs = generate_stable_coefficients(rng, 25);
  const std::vector<Vector> data = simulate_trajectory(rng, coeffs, reference_truth(), 3000);
  IdentifierConfig cfg;
  const double hi = 3.0 + 1.0 / (1.0 - cfg.gamma);
  run_gaussian_identifier(data, reference_gaussian_prior(25, 2), cfg, [&](std::size_t, const GaussianFilterState& s) {
    ASSERT_TRUE(is_spd(s.Psi));
    ASSERT_TRUE(is_lower_factor(s.P_sqrt));
    ASSERT_GT(s.nu, 3.0);
    ASSERT_LE(s.nu, hi * (1.0 + 64.0 * std::numeric_limits<double>::epsilon()));
  });
}

TEST(GaussianVb, ReferencePrior) {
  const GaussianFilterState p = reference_gaussian_prior(25, 2);
  EXPECT_LT((expected_R(p) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((p.P() - stable_spline_prior(25)).cwiseAbs().maxCoeff(), 1e-12);
}

// With symmetric innovations the skew identifier should not be
// distinguishable from the baseline: two-sided sign test on eps at k = 2000.
// Both identifiers on the same symmetric-noise trajectories; computed once
// and shared by the sign tests below.
struct SymmetricRun {
  int skew_better = 0;
  int n = 0;
};

const SymmetricRun& symmetric_run() {
  static const SymmetricRun run = [] {
    ExperimentConfig cfg;
    cfg.steps = 2000;
    cfg.replications = 200;
    cfg.master_seed = 2024;
    cfg.truth.mu = Vector::Zero(2);
    cfg.truth.R = sn_moments(reference_truth()).cov;
    cfg.truth.Delta = Matrix::Zero(2, 2);
    const BenchmarkSummary s = run_benchmark(cfg);
    EXPECT_TRUE(s.failures.empty());
    SymmetricRun r;
    for (const BenchmarkRecord& rec : s.records) r.skew_better += rec.eps_skew.back() < rec.eps_gauss.back() ? 1 : 0;
    r.n = static_cast<int>(s.records.size());
    std::cout << "skew better in " << r.skew_better << " of " << r.n << " (median rho " << s.median_rho_final
              << ")\n";
    return r;
  }();
  return run;
}

TEST(GaussianVb, SymmetricTruthSignTest) {
  const SymmetricRun& r = symmetric_run();
  const int tail = std::min(r.skew_better, r.n - r.skew_better);
  const boost::math::binomial_distribution<double> b(r.n, 0.5);
  const double p = std::min(1.0, 2.0 * boost::math::cdf(b, tail));
  RecordProperty("skew_better", r.skew_better);
  std::cout << "two-sided sign test p = " << p << '\n';
  EXPECT_GT(p, 0.01);
}

// One-sided: the skew identifier is not worse than the baseline.
TEST(GaussianVb, SymmetricTruthSkewNotWorse) {
  const SymmetricRun& r = symmetric_run();
  const boost::math::binomial_distribution<double> b(r.n, 0.5);
  const double p = boost::math::cdf(b, r.skew_better);
  EXPECT_GT(p, 0.01);
}

}  // namespace
}  // namespace skewar
