#include "skewar/errors.hpp"
#include "skewar/mvniw.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <unsupported/Eigen/KroneckerProduct>

namespace skewar {
namespace {

MvniwParams params(Matrix DeltaHat, Matrix V, Matrix Psi, double nu) {
  MvniwParams p;
  p.DeltaHat = std::move(DeltaHat);
  p.V = std::move(V);
  p.Psi = std::move(Psi);
  p.nu = nu;
  return p;
}

const Matrix I2 = Matrix::Identity(2, 2);

// R = W^{-1} with W ~ Wishart(Psi^{-1}, nu - n - 1); Delta = DeltaHat + L_R Z L_V^T.
MvniwDraw oracle_draw(Rng& rng, const MvniwParams& p) {
  const Eigen::Index n = p.dim();
  const int df = static_cast<int>(p.nu) - static_cast<int>(n) - 1;
  const Matrix W = testing::wishart_by_outer_products(rng, p.Psi.inverse(), df);
  MvniwDraw d;
  d.R = W.inverse();
  std::normal_distribution<double> n01(0.0, 1.0);
  Matrix Z(n, n);
  for (Eigen::Index i = 0; i < Z.size(); ++i) Z.data()[i] = n01(rng);
  const Matrix LR = d.R.llt().matrixL();
  const Matrix LV = p.V.llt().matrixL();
  d.Delta = p.DeltaHat + LR * Z * LV.transpose();
  return d;
}

TEST(Mvniw, ExpectedRExamples) {
  const double nu = 4.0 + 1e-10;
  EXPECT_LT((expected_R(params(I2, I2, 0.5 * (nu - 3.0) * I2, nu)) - 0.5 * I2).norm(), 1e-12);
  const Matrix I1 = Matrix::Identity(1, 1);
  EXPECT_EQ(expected_R(params(I1, I1, I1, 3.0)), I1);
}

TEST(Mvniw, DegreesOfFreedomRejected) {
  EXPECT_THROW(expected_R(params(I2, I2, I2, 3.0)), ValidationError);
  // nu = 4 still has E[R^{-1}] but violates nu > 2 n, so the params are invalid.
  EXPECT_THROW(params(I2, I2, I2, 4.0).validate(), ValidationError);
  EXPECT_THROW(mvniw_cross_moments(params(I2, I2, I2, 2.5)), ValidationError);
}

TEST(Mvniw, ExpectedRAgreesWithWishartOracle) {
  Rng rng(41);
  const MvniwParams p = params(Matrix::Zero(2, 2), I2, 2.0 * I2, 8.0);
  std::vector<Matrix> precisions;
  for (int i = 0; i < 100000; ++i) precisions.push_back(testing::wishart_by_outer_products(rng, p.Psi.inverse(), 5));
  const testing::EntrywiseStats s = testing::entrywise_stats(precisions);
  const Matrix target = expected_R(p).inverse();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) EXPECT_LT(std::abs(s.mean(i, j) - target(i, j)), 3.0 * s.stderr_(i, j) + 1e-15);
  }
  EXPECT_LT((s.mean.inverse() - p.Psi / 5.0).norm(), 0.02);
}

TEST(Mvniw, CrossMomentExamples) {
  const MvniwParams zero = params(Matrix::Zero(2, 2), 0.3 * I2, 2.0 * I2, 6.0);
  const MvniwCrossMoments a = mvniw_cross_moments(zero);
  EXPECT_EQ(a.ERinvDelta.norm(), 0.0);
  EXPECT_LT((a.EDeltaTRinvDelta - 2.0 * 0.3 * I2).norm(), 1e-14);

  const double nu = 7.0;
  const MvniwCrossMoments b = mvniw_cross_moments(params(I2, I2, (nu - 3.0) * I2, nu));
  EXPECT_LT((b.ERinvDelta - I2).norm(), 1e-14);
  EXPECT_LT((b.EDeltaTRinvDelta - 3.0 * I2).norm(), 1e-14);
}

void expect_cross_moments_match_oracle(Rng& rng, const MvniwParams& p, int draws) {
  std::vector<Matrix> first;
  std::vector<Matrix> second;
  for (int i = 0; i < draws; ++i) {
    const MvniwDraw d = oracle_draw(rng, p);
    const Matrix RinvDelta = d.R.inverse() * d.Delta;
    first.push_back(RinvDelta);
    second.push_back(d.Delta.transpose() * RinvDelta);
  }
  const testing::EntrywiseStats a = testing::entrywise_stats(first);
  const testing::EntrywiseStats b = testing::entrywise_stats(second);
  const MvniwCrossMoments m = mvniw_cross_moments(p);
  for (Eigen::Index i = 0; i < p.dim(); ++i) {
    for (Eigen::Index j = 0; j < p.dim(); ++j) {
      EXPECT_LT(std::abs(a.mean(i, j) - m.ERinvDelta(i, j)), 3.0 * a.stderr_(i, j) + 1e-12) << i << j;
      EXPECT_LT(std::abs(b.mean(i, j) - m.EDeltaTRinvDelta(i, j)), 3.0 * b.stderr_(i, j) + 1e-12) << i << j;
    }
  }
}

TEST(Mvniw, CrossMomentsAgreeWithHierarchicalOracle) {
  Rng rng(42);
  Matrix DeltaHat(2, 2);
  DeltaHat << 1.0, 0.0, 0.5, 1.0;
  expect_cross_moments_match_oracle(rng, params(DeltaHat, 0.2 * I2, 3.0 * I2, 9.0), 100000);
}

TEST(Mvniw, ForgetExamples) {
  const MvniwParams p = params(Matrix::Zero(2, 2), I2, I2, 5.0);
  const MvniwParams same = forget(p, 1.0);
  EXPECT_EQ(same.DeltaHat, p.DeltaHat);
  EXPECT_EQ(same.V, p.V);
  EXPECT_EQ(same.Psi, p.Psi);
  EXPECT_EQ(same.nu, p.nu);

  const MvniwParams f = forget(p, 0.975);
  EXPECT_EQ(f.DeltaHat, p.DeltaHat);
  EXPECT_LT((f.V - I2 / 0.975).norm(), 1e-15);
  EXPECT_LT((f.Psi - 0.975 * I2).norm(), 1e-15);
  EXPECT_NEAR(f.nu, 4.975, 1e-14);

  EXPECT_THROW(forget(p, 0.0), ValidationError);
  EXPECT_THROW(forget(p, 1.5), ValidationError);
}

TEST(Mvniw, RepeatedForgettingApproachesFloorFromAbove) {
  MvniwParams p = params(Matrix::Zero(2, 2), I2, I2, 40.0);
  double prev = p.nu;
  for (int i = 0; i < 3000; ++i) {
    p = forget(p, 0.975);
    p.V = I2;  // keep V bounded; only nu is of interest here
    p.Psi = I2;
    ASSERT_GT(p.nu, 4.0) << i;
    ASSERT_LE(p.nu, prev);
    prev = p.nu;
  }
  EXPECT_NEAR(p.nu, 4.0, 1e-12);
}

TEST(Mvniw, ExpectedRIsSpdForRandomInputs) {
  testing::Gen gen(43);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + trial % 4;
    const MvniwParams p = params(gen.normal_matrix(n, n), gen.spd(n), gen.spd(n, 1e-3),
                                 2.0 * static_cast<double>(n) + gen.uniform(1e-9, 50.0));
    EXPECT_TRUE(is_spd(expected_R(p)));
  }
}

TEST(Mvniw, SamplerMatchesMoments) {
  Rng rng(44);
  Matrix DeltaHat(2, 2);
  DeltaHat << 1.0, -0.5, 0.3, 2.0;
  const MvniwParams p = params(DeltaHat, 0.5 * I2, 4.0 * I2, 9.0);
  std::vector<Matrix> precisions;
  std::vector<Matrix> deltas;
  for (int i = 0; i < 100000; ++i) {
    const MvniwDraw d = mvniw_sample(rng, p);
    precisions.push_back(d.R.inverse());
    deltas.push_back(d.Delta);
  }
  const testing::EntrywiseStats a = testing::entrywise_stats(precisions);
  const testing::EntrywiseStats b = testing::entrywise_stats(deltas);
  const Matrix target = expected_R(p).inverse();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      EXPECT_LT(std::abs(a.mean(i, j) - target(i, j)), 3.0 * a.stderr_(i, j) + 1e-15);
      EXPECT_LT(std::abs(b.mean(i, j) - DeltaHat(i, j)), 3.0 * b.stderr_(i, j));
    }
  }
}

TEST(Mvniw, ConcentratedSamplerHasKroneckerCovariance) {
  Rng rng(45);
  Matrix V(2, 2);
  V << 1.0, 0.4, 0.4, 0.5;
  Matrix R(2, 2);
  R << 2.0, -0.6, -0.6, 1.0;
  const double nu = 1e6;
  const MvniwParams p = params(Matrix::Zero(2, 2), V, (nu - 3.0) * R, nu);
  const int n = 200000;
  Matrix cov = Matrix::Zero(4, 4);
  for (int i = 0; i < n; ++i) {
    const Matrix D = mvniw_sample(rng, p).Delta;
    const Eigen::Map<const Vector> v(D.data(), 4);
    cov += v * v.transpose();
  }
  cov /= n;
  const Matrix target = Eigen::kroneckerProduct(V, R);
  EXPECT_LT((cov - target).cwiseAbs().maxCoeff(), 0.03);
}

TEST(Mvniw, ValidationErrors) {
  EXPECT_THROW(params(I2, -I2, I2, 5.0).validate(), ValidationError);
  EXPECT_THROW(params(I2, I2, Matrix::Identity(3, 3), 5.0).validate(), ValidationError);
  EXPECT_NO_THROW(params(I2, I2, I2, 4.0 + 1e-12).validate());
}

}  // namespace
}  // namespace skewar
