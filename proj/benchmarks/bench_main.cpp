#include <benchmark/benchmark.h>

#include "skewar/baseline_gaussian.hpp"
#include "skewar/identifier.hpp"
#include "skewar/random.hpp"
#include "skewar/sim_harness.hpp"
#include "skewar/skew_normal.hpp"
#include "skewar/truncation.hpp"

#include <numeric>
#include <vector>

namespace {

using namespace skewar;

// Regressor and measurement from a short simulated trajectory.
struct Workload {
  FilterState skew;
  GaussianFilterState gauss;
  Matrix C;
  Vector z;
};

Workload make_workload(Eigen::Index n_ar) {
  Rng rng(7);
  const SkewNormalParams truth = reference_truth();
  const Vector coeffs = generate_stable_coefficients(rng, n_ar);
  const std::vector<Vector> data = simulate_trajectory(rng, coeffs, truth, static_cast<std::size_t>(n_ar) + 1);
  std::vector<Vector> history(data.rbegin() + 1, data.rend());
  Workload w;
  w.skew = reference_skew_prior(n_ar, 2);
  w.gauss = reference_gaussian_prior(n_ar, 2);
  w.C = build_regressor(history, n_ar, 2);
  w.z = data.back();
  return w;
}

void BM_VbMeasurementUpdate(benchmark::State& state) {
  const Workload w = make_workload(state.range(0));
  IdentifierConfig cfg;
  cfg.n_ar = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(vb_measurement_update(w.skew, w.z, w.C, cfg));
}
BENCHMARK(BM_VbMeasurementUpdate)->Arg(5)->Arg(25)->Arg(50);

void BM_GaussianVbUpdate(benchmark::State& state) {
  const Workload w = make_workload(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gvb_update(w.gauss, w.z, w.C, 10));
}
BENCHMARK(BM_GaussianVbUpdate)->Arg(5)->Arg(25)->Arg(50);

void BM_SequentialTruncate(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  Rng rng(11);
  std::normal_distribution<double> n01;
  Matrix A(n, n);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = n01(rng);
  const GaussianMoments g{Vector::Zero(n), A * A.transpose() / static_cast<double>(n) + Matrix::Identity(n, n)};
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (auto _ : state) benchmark::DoNotOptimize(sequential_truncate(g, idx));
}
BENCHMARK(BM_SequentialTruncate)->Arg(2)->Arg(8)->Arg(32);

void BM_SnPdf(benchmark::State& state) {
  const SkewNormalParams p = reference_truth();
  const Vector z{{0.3, -0.1}};
  for (auto _ : state) benchmark::DoNotOptimize(sn_pdf(z, p));
}
BENCHMARK(BM_SnPdf);

}  // namespace

BENCHMARK_MAIN();
