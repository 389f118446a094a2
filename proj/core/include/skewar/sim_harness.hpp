#pragma once

#include "skewar/identifier.hpp"
#include "skewar/linalg.hpp"
#include "skewar/random.hpp"
#include "skewar/skew_normal.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace skewar {

// Innovation truth of the reference experiment: mu = 0, R = 0.1^2 I,
// Delta = [2 0; 1 2].
SkewNormalParams reference_truth();

struct ExperimentConfig {
  Eigen::Index n_ar = 25;
  Eigen::Index n_z = 2;
  std::size_t steps = 10000;
  std::size_t replications = 1000;
  double gamma = 0.975;
  int vb_iterations = 10;
  SkewNormalParams truth = reference_truth();
  std::uint64_t master_seed = 1;
  // "adaptive" (stable-spline shaped, scaled by max diag P) or "fixed"
  // (q_fixed_scale * stable spline kernel).
  std::string q_policy = "adaptive";
  double q_fixed_scale = 0.0;
  double nu_margin = 1e-10;
  SkewPriorShape skew_prior;
  // Worker threads for replications; 0 means hardware concurrency. Results
  // do not depend on it.
  std::size_t threads = 0;
  // Write every m-th step to the CSV (the last step is always written).
  std::size_t csv_every = 1;
  bool check_invariants = true;

  void validate() const;
  IdentifierConfig identifier_config() const;
};

struct BenchmarkRecord {
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  std::vector<double> eps_skew;
  std::vector<double> eps_gauss;
  std::uint64_t config_hash = 0;
};

// Counts of steps at which an invariant did not hold.
struct InvariantReport {
  std::size_t steps_checked = 0;
  std::size_t p_not_spd = 0;
  std::size_t psi_not_spd = 0;
  std::size_t v_not_spd = 0;
  std::size_t nu_out_of_range = 0;
  std::size_t gauss_p_not_spd = 0;
  std::size_t gauss_psi_not_spd = 0;
  std::size_t gauss_nu_out_of_range = 0;

  std::size_t violations() const {
    return p_not_spd + psi_not_spd + v_not_spd + nu_out_of_range + gauss_p_not_spd +
           gauss_psi_not_spd + gauss_nu_out_of_range;
  }
  InvariantReport& operator+=(const InvariantReport& o);
};

struct ReplicationResult {
  BenchmarkRecord record;
  InvariantReport invariants;
};

struct ReplicationFailure {
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  std::string message;
};

inline constexpr std::array<double, 5> kPercentileLevels{5.0, 25.0, 50.0, 75.0, 95.0};

struct BenchmarkSummary {
  ExperimentConfig config;
  std::uint64_t config_hash = 0;
  std::vector<BenchmarkRecord> records;  // successful replications, by index
  std::vector<ReplicationFailure> failures;
  // percentiles[k][j]: level kPercentileLevels[j] of rho at step k + 1.
  std::vector<std::array<double, 5>> rho_percentiles;
  double win_fraction = 0.0;        // rho_K > 0
  double improve25_fraction = 0.0;  // rho_K > 0.25
  double median_rho_final = 0.0;
  std::size_t zero_error_guards = 0;
  InvariantReport invariants;
};

// Roots r_i ~ unif(-1, 1); returns a with prod(q - r_i) = q^n - a_1 q^{n-1} - ... - a_n.
Vector generate_stable_coefficients(Rng& rng, Eigen::Index n_ar);

Matrix companion_matrix(const Vector& coeffs);

// z_k = sum_i a_i z_{k-i} + e_k, e_k ~ SN(truth), zero initial history.
// Throws DivergenceError on non-finite output.
std::vector<Vector> simulate_trajectory(Rng& rng, const Vector& coeffs, const SkewNormalParams& truth,
                                        std::size_t steps);

double identification_error(const Vector& x_est, const Vector& x_true);

// (eps_gauss - eps_skew) / eps_gauss; a zero denominator is replaced by the
// smallest normal double and counted in `guards`.
double relative_difference(double eps_gauss, double eps_skew, std::size_t* guards = nullptr);

// Linear interpolation between order statistics; `values` is reordered.
double percentile(std::vector<double>& values, double level);

std::uint64_t replication_seed(const ExperimentConfig& cfg, std::size_t replication);

// Single replication: coefficients, data, both identifiers.
ReplicationResult run_replication(const ExperimentConfig& cfg, std::size_t replication);

using ProgressCallback = std::function<void(std::size_t done, std::size_t total)>;

// Failures are logged and excluded when fewer than 1% of replications fail;
// otherwise NumericalError is thrown.
BenchmarkSummary run_benchmark(const ExperimentConfig& cfg, const ProgressCallback& progress = {});

}  // namespace skewar
