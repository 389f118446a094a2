#include "skewar/errors.hpp"
#include "skewar/truncation.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace skewar {
namespace {

TEST(Truncation, HalfNormal) {
  const ScalarMoments m = truncated_scalar_moments(0.0, 1.0);
  EXPECT_NEAR(m.mean, std::sqrt(2.0 / std::numbers::pi), 1e-15);
  EXPECT_NEAR(m.var, 1.0 - 2.0 / std::numbers::pi, 1e-15);
  const testing::QuadMoments q = testing::truncated_moments_by_quadrature(0.0, 1.0);
  EXPECT_NEAR(m.mean, q.mean, 1e-10);
  EXPECT_NEAR(m.var, q.var, 1e-10);
}

TEST(Truncation, InactiveFarTail) {
  const ScalarMoments m = truncated_scalar_moments(10.0, 1.0);
  EXPECT_NEAR(m.mean, 10.0, 1e-6);
  EXPECT_NEAR(m.var, 1.0, 1e-6);
}

TEST(Truncation, NegativeMeanAgainstQuadrature) {
  const ScalarMoments m = truncated_scalar_moments(-3.0, 1.0);
  const testing::QuadMoments q = testing::truncated_moments_by_quadrature(-3.0, 1.0);
  EXPECT_NEAR(m.mean, q.mean, 1e-8);
  EXPECT_NEAR(m.var, q.var, 1e-8);
  EXPECT_NEAR(m.mean, 0.28310, 5e-6);
  EXPECT_NEAR(m.var, 0.070559, 5e-6);
}

TEST(Truncation, DeepTailAgainstQuadrature) {
  for (double m : {-6.0, -7.99, -8.01, -12.0, -25.0}) {
    for (double s2 : {0.25, 1.0, 4.0}) {
      const ScalarMoments t = truncated_scalar_moments(m * std::sqrt(s2), s2);
      const testing::QuadMoments q = testing::truncated_moments_by_quadrature(m * std::sqrt(s2), s2);
      EXPECT_NEAR(t.mean / q.mean, 1.0, 1e-8) << m << ' ' << s2;
      EXPECT_NEAR(t.var / q.var, 1.0, 1e-7) << m << ' ' << s2;
    }
  }
}

TEST(Truncation, ExtremeInputsStayFinite) {
  for (double m : {-1e3, -1e8, 1e3, 1e8}) {
    const ScalarMoments t = truncated_scalar_moments(m, 1.0);
    EXPECT_TRUE(std::isfinite(t.mean) && std::isfinite(t.var)) << m;
    EXPECT_GT(t.mean, 0.0);
    EXPECT_GT(t.var, 0.0);
    EXPECT_LE(t.var, 1.0);
  }
}

TEST(Truncation, ScalarRejectsNonPositiveVariance) {
  EXPECT_THROW(truncated_scalar_moments(0.0, 0.0), ValidationError);
  EXPECT_THROW(truncated_scalar_moments(0.0, -1.0), ValidationError);
}

TEST(Truncation, ScalarBoundsProperty) {
  testing::Gen gen(51);
  for (int trial = 0; trial < 2000; ++trial) {
    const double s2 = std::exp(gen.uniform(-8.0, 8.0));
    const double m = gen.uniform(-30.0, 30.0) * std::sqrt(s2);
    const ScalarMoments t = truncated_scalar_moments(m, s2);
    EXPECT_GT(t.mean, 0.0);
    EXPECT_GE(t.mean, m);
    EXPECT_GT(t.var, 0.0);
    EXPECT_LE(t.var, s2);
  }
}

TEST(Truncation, EmptyConstraintSetIsIdentity) {
  testing::Gen gen(52);
  const GaussianMoments g{gen.normal_vector(3), gen.spd(3)};
  const GaussianMoments out = sequential_truncate(g, {});
  EXPECT_EQ(out.mean, g.mean);
  EXPECT_EQ(out.cov, g.cov);
}

TEST(Truncation, OneDimensional) {
  const GaussianMoments g{Vector::Zero(1), Matrix::Identity(1, 1)};
  const std::array<Eigen::Index, 1> idx{0};
  const GaussianMoments out = sequential_truncate(g, idx);
  EXPECT_NEAR(out.mean[0], std::sqrt(2.0 / std::numbers::pi), 1e-15);
  EXPECT_NEAR(out.cov(0, 0), 1.0 - 2.0 / std::numbers::pi, 1e-15);
}

TEST(Truncation, DiagonalCovarianceIsExact) {
  testing::Gen gen(53);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 1 + trial % 5;
    Vector var(n);
    for (Eigen::Index i = 0; i < n; ++i) var[i] = gen.uniform(0.1, 5.0);
    const GaussianMoments g{3.0 * gen.normal_vector(n), var.asDiagonal().toDenseMatrix()};
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n; i += 2) idx.push_back(i);
    const GaussianMoments out = sequential_truncate(g, idx);
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool constrained = i % 2 == 0;
      const ScalarMoments s = constrained ? truncated_scalar_moments(g.mean[i], var[i])
                                          : ScalarMoments{g.mean[i], var[i]};
      EXPECT_NEAR(out.mean[i], s.mean, 1e-12);
      EXPECT_NEAR(out.cov(i, i), s.var, 1e-12);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j != i) {
          EXPECT_NEAR(out.cov(i, j), 0.0, 1e-12);
        }
      }
    }
  }
}

TEST(Truncation, UncorrelatedCoordinatesUntouched) {
  testing::Gen gen(54);
  for (int trial = 0; trial < 30; ++trial) {
    // Block-diagonal: coordinates 0..1 are constrained, 2..3 uncorrelated with them.
    Matrix cov = Matrix::Zero(4, 4);
    cov.topLeftCorner(2, 2) = gen.spd(2);
    cov.bottomRightCorner(2, 2) = gen.spd(2);
    const GaussianMoments g{gen.normal_vector(4), cov};
    const std::array<Eigen::Index, 2> idx{0, 1};
    const GaussianMoments out = sequential_truncate(g, idx);
    EXPECT_LT((out.mean.tail(2) - g.mean.tail(2)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((out.cov.bottomRightCorner(2, 2) - cov.bottomRightCorner(2, 2)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT(out.cov.topRightCorner(2, 2).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Truncation, ExchangeableInputsAreOrderInvariant) {
  testing::Gen gen(55);
  for (int trial = 0; trial < 20; ++trial) {
    const double rho = gen.uniform(-0.45, 0.9);
    const double var = gen.uniform(0.2, 3.0);
    Matrix cov = Matrix::Constant(3, 3, rho * var);
    cov.diagonal().setConstant(var);
    const GaussianMoments g{Vector::Constant(3, gen.uniform(-2.0, 2.0)), cov};
    const std::array<Eigen::Index, 3> fwd{0, 1, 2};
    const std::array<Eigen::Index, 3> rev{2, 1, 0};
    const GaussianMoments a = sequential_truncate(g, fwd);
    const GaussianMoments b = sequential_truncate(g, rev);
    // Reversing the order of exchangeable coordinates permutes the output.
    const Eigen::PermutationMatrix<3> flip(Eigen::Vector3i(2, 1, 0));
    EXPECT_LT((a.mean - flip * b.mean).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((a.cov - flip * b.cov * flip.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Truncation, VarianceReductionAndPsd) {
  testing::Gen gen(56);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 2 + trial % 4;
    const GaussianMoments g{2.0 * gen.normal_vector(n), gen.spd(n, 0.05)};
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = n / 2; i < n; ++i) idx.push_back(i);
    const GaussianMoments out = sequential_truncate(g, idx);
    for (Eigen::Index i : idx) EXPECT_LE(out.cov(i, i), g.cov(i, i) * (1.0 + 1e-12));
    EXPECT_LT((out.cov - out.cov.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> es(out.cov);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
    for (Eigen::Index i = 0; i < n; ++i) EXPECT_GT(out.cov(i, i), 0.0);
  }
}

// Two constraints on a strongly correlated pair. The sequential result is
// checked against a scripted two-step evaluation; its distance to the exact
// quadrant moments is the approximation error of the method, which for this
// case is about 0.03 in the mean and 0.07 in the covariance.
TEST(Truncation, CorrelatedBivariateAgainstRejection) {
  const double rho = 0.8;
  Matrix cov(2, 2);
  cov << 1.0, rho, rho, 1.0;
  const std::array<Eigen::Index, 2> idx{0, 1};
  const GaussianMoments out = sequential_truncate({Vector::Zero(2), cov}, idx);

  // Scripted: truncate x1, condition x2 on it, truncate x2, condition x1.
  const testing::QuadMoments t1 = testing::truncated_moments_by_quadrature(0.0, 1.0);
  const double m2 = rho * t1.mean;
  const double v2 = 1.0 + rho * rho * (t1.var - 1.0);
  const double c12 = rho * t1.var;
  const testing::QuadMoments t2 = testing::truncated_moments_by_quadrature(m2, v2);
  const double m1 = t1.mean + c12 / v2 * (t2.mean - m2);
  const double v1 = t1.var + c12 * c12 / (v2 * v2) * (t2.var - v2);
  const double c = c12 / v2 * t2.var;
  EXPECT_NEAR(out.mean[0], m1, 1e-10);
  EXPECT_NEAR(out.mean[1], t2.mean, 1e-10);
  EXPECT_NEAR(out.cov(0, 0), v1, 1e-10);
  EXPECT_NEAR(out.cov(1, 1), t2.var, 1e-10);
  EXPECT_NEAR(out.cov(0, 1), c, 1e-10);

  Rng rng(57);
  std::normal_distribution<double> n01(0.0, 1.0);
  const double s = std::sqrt(1.0 - rho * rho);
  double n = 0.0;
  Vector s1 = Vector::Zero(2);
  Matrix s2 = Matrix::Zero(2, 2);
  for (int i = 0; i < 10000000; ++i) {
    const double a = n01(rng);
    const double b = rho * a + s * n01(rng);
    if (a < 0.0 || b < 0.0) continue;
    const Vector v{{a, b}};
    n += 1.0;
    s1 += v;
    s2 += v * v.transpose();
  }
  const Vector mean = s1 / n;
  const Matrix second = s2 / n - mean * mean.transpose();
  // Exact quadrant probability and mean validate the rejection estimate.
  const double quadrant = 0.25 + std::asin(rho) / (2.0 * std::numbers::pi);
  const double exact_mean = (1.0 + rho) / (2.0 * std::sqrt(2.0 * std::numbers::pi) * quadrant);
  EXPECT_NEAR(n / 1e7, quadrant, 1e-3);
  EXPECT_NEAR(mean[0], exact_mean, 1e-3);
  EXPECT_NEAR(mean[1], exact_mean, 1e-3);

  const double mean_err = (out.mean - mean).cwiseAbs().maxCoeff();
  const double cov_err = (out.cov - second).cwiseAbs().maxCoeff();
  RecordProperty("mean_error", std::to_string(mean_err));
  RecordProperty("cov_error", std::to_string(cov_err));
  std::cout << "sequential vs rejection: mean " << mean_err << ", cov " << cov_err << '\n';
  EXPECT_NEAR(mean_err, 0.029, 0.003);
  EXPECT_NEAR(cov_err, 0.073, 0.005);
}

TEST(Truncation, DegenerateMarginalReportsStep) {
  Matrix cov = Matrix::Identity(3, 3);
  cov(2, 2) = 0.0;
  const std::array<Eigen::Index, 2> idx{0, 2};
  try {
    sequential_truncate({Vector::Zero(3), cov}, idx);
    FAIL() << "expected DegeneracyError";
  } catch (const DegeneracyError& e) {
    EXPECT_EQ(e.quantity(), "marginal variance");
    EXPECT_EQ(e.index(), 1u);
  }
}

TEST(Truncation, InplaceMatchesFunctional) {
  testing::Gen gen(58);
  const GaussianMoments g{gen.normal_vector(4), gen.spd(4)};
  const std::array<Eigen::Index, 2> idx{1, 3};
  const GaussianMoments out = sequential_truncate(g, idx);
  Vector m = g.mean;
  Matrix c = g.cov;
  sequential_truncate_inplace(m, c, idx);
  EXPECT_LT((m - out.mean).norm(), 1e-15);
  EXPECT_LT((c - out.cov).norm(), 1e-15);
}

}  // namespace
}  // namespace skewar
