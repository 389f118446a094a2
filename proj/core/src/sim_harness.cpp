#include "skewar/sim_harness.hpp"

#include "skewar/baseline_gaussian.hpp"
#include "skewar/benchmark_io.hpp"
#include "skewar/errors.hpp"
#include "skewar/stable_spline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

namespace skewar {

SkewNormalParams reference_truth() {
  SkewNormalParams t;
  t.mu = Vector::Zero(2);
  t.R = 0.01 * Matrix::Identity(2, 2);
  t.Delta.resize(2, 2);
  t.Delta << 2.0, 0.0, 1.0, 2.0;
  return t;
}

void ExperimentConfig::validate() const {
  if (n_ar < 1) throw ValidationError("config: n_ar must be positive");
  if (n_z < 1) throw ValidationError("config: n_z must be positive");
  if (steps < 1) throw ValidationError("config: steps must be positive");
  if (replications < 1) throw ValidationError("config: replications must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("config: gamma must lie in (0, 1]");
  if (vb_iterations < 1) throw ValidationError("config: vb_iterations must be at least 1");
  if (q_policy != "adaptive" && q_policy != "fixed") {
    throw ValidationError("config: q_policy must be 'adaptive' or 'fixed'");
  }
  if (!(q_fixed_scale >= 0.0)) throw ValidationError("config: q_fixed_scale must be non-negative");
  if (!(nu_margin > 0.0)) throw ValidationError("config: nu_margin must be positive");
  if (csv_every < 1) throw ValidationError("config: csv_every must be positive");
  skew_prior.validate();
  truth.validate();
  if (truth.dim() != n_z) throw ValidationError("config: truth dimension does not match n_z");
}

IdentifierConfig ExperimentConfig::identifier_config() const {
  IdentifierConfig c;
  c.n_ar = n_ar;
  c.n_z = n_z;
  c.gamma = gamma;
  c.vb_iterations = vb_iterations;
  c.q_policy = q_policy == "fixed" ? QPolicy::constant(q_fixed_scale * stable_spline_kernel(n_ar))
                                   : QPolicy::adaptive();
  return c;
}

InvariantReport& InvariantReport::operator+=(const InvariantReport& o) {
  steps_checked += o.steps_checked;
  p_not_spd += o.p_not_spd;
  psi_not_spd += o.psi_not_spd;
  v_not_spd += o.v_not_spd;
  nu_out_of_range += o.nu_out_of_range;
  gauss_p_not_spd += o.gauss_p_not_spd;
  gauss_psi_not_spd += o.gauss_psi_not_spd;
  gauss_nu_out_of_range += o.gauss_nu_out_of_range;
  return *this;
}

Vector generate_stable_coefficients(Rng& rng, Eigen::Index n_ar) {
  if (n_ar < 1) throw ValidationError("generate_stable_coefficients: n_ar must be positive");
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  // poly[j] is the coefficient of q^{n-j} in prod (q - r_i).
  std::vector<double> poly{1.0};
  for (Eigen::Index i = 0; i < n_ar; ++i) {
    const double root = unif(rng);
    poly.push_back(0.0);
    for (std::size_t j = poly.size() - 1; j >= 1; --j) poly[j] -= root * poly[j - 1];
  }
  Vector a(n_ar);
  for (Eigen::Index i = 0; i < n_ar; ++i) a[i] = -poly[static_cast<std::size_t>(i) + 1];
  return a;
}

Matrix companion_matrix(const Vector& coeffs) {
  const Eigen::Index n = coeffs.size();
  Matrix A = Matrix::Zero(n, n);
  A.row(0) = coeffs.transpose();
  for (Eigen::Index i = 1; i < n; ++i) A(i, i - 1) = 1.0;
  return A;
}

std::vector<Vector> simulate_trajectory(Rng& rng, const Vector& coeffs, const SkewNormalParams& truth,
                                        std::size_t steps) {
  truth.validate();
  const Eigen::Index n_ar = coeffs.size();
  if (n_ar < 1) throw ValidationError("simulate_trajectory: empty coefficient vector");
  const Matrix chol_R = Eigen::LLT<Matrix>(truth.R).matrixL();

  std::vector<Vector> z;
  z.reserve(steps);
  constexpr double kDivergenceLimit = 1e100;
  for (std::size_t k = 0; k < steps; ++k) {
    Vector next = sn_draw(rng, truth, chol_R);
    for (Eigen::Index i = 0; i < n_ar && static_cast<std::size_t>(i) < k; ++i) {
      next.noalias() += coeffs[i] * z[k - 1 - static_cast<std::size_t>(i)];
    }
    if (!next.allFinite() || next.cwiseAbs().maxCoeff() > kDivergenceLimit) {
      throw DivergenceError("simulate_trajectory: trajectory diverged at step " + std::to_string(k + 1));
    }
    z.push_back(std::move(next));
  }
  return z;
}

double identification_error(const Vector& x_est, const Vector& x_true) {
  if (x_est.size() != x_true.size()) throw ValidationError("identification_error: size mismatch");
  return (x_est - x_true).norm();
}

double relative_difference(double eps_gauss, double eps_skew, std::size_t* guards) {
  double denom = eps_gauss;
  if (!(denom > 0.0)) {
    denom = std::numeric_limits<double>::min();
    if (guards) ++*guards;
  }
  return (eps_gauss - eps_skew) / denom;
}

double percentile(std::vector<double>& values, double level) {
  if (values.empty()) throw ValidationError("percentile: no values");
  std::sort(values.begin(), values.end());
  const double pos = (level / 100.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::uint64_t replication_seed(const ExperimentConfig& cfg, std::size_t replication) {
  return derive_seed(cfg.master_seed, replication);
}

ReplicationResult run_replication(const ExperimentConfig& cfg, std::size_t replication) {
  ReplicationResult out;
  BenchmarkRecord& rec = out.record;
  rec.replication = replication;
  rec.seed = replication_seed(cfg, replication);
  rec.config_hash = config_hash(cfg);

  Rng rng(rec.seed);
  const Vector coeffs = generate_stable_coefficients(rng, cfg.n_ar);
  const std::vector<Vector> data = simulate_trajectory(rng, coeffs, cfg.truth, cfg.steps);
  const IdentifierConfig icfg = cfg.identifier_config();

  const double nz = static_cast<double>(cfg.n_z);
  const double nu_span = cfg.gamma < 1.0 ? 1.0 / (1.0 - cfg.gamma) : std::numeric_limits<double>::infinity();
  // A few ulps of headroom on the upper bound: the recursion converges to
  // it from below and rounding can land on the far side of the last bit.
  const auto within = [](double nu, double lo, double hi) {
    return nu > lo && nu <= hi + 64.0 * std::numeric_limits<double>::epsilon() * hi;
  };
  InvariantReport& inv = out.invariants;

  rec.eps_skew.reserve(cfg.steps);
  rec.eps_gauss.reserve(cfg.steps);
  run_identifier(data, skew_prior(cfg.n_ar, cfg.n_z, cfg.nu_margin, cfg.skew_prior), icfg,
                 [&](std::size_t, const FilterState& s) {
                   rec.eps_skew.push_back(identification_error(s.x, coeffs));
                   if (cfg.check_invariants) {
                     ++inv.steps_checked;
                     if (!is_lower_factor(s.P_sqrt)) ++inv.p_not_spd;
                     if (!is_spd(s.noise.Psi)) ++inv.psi_not_spd;
                     if (!is_spd(s.noise.V)) ++inv.v_not_spd;
                     if (!within(s.noise.nu, 2.0 * nz, 2.0 * nz + nu_span)) ++inv.nu_out_of_range;
                   }
                 });
  run_gaussian_identifier(data, reference_gaussian_prior(cfg.n_ar, cfg.n_z, cfg.nu_margin), icfg,
                          [&](std::size_t, const GaussianFilterState& s) {
                            rec.eps_gauss.push_back(identification_error(s.x, coeffs));
                            if (cfg.check_invariants) {
                              if (!is_lower_factor(s.P_sqrt)) ++inv.gauss_p_not_spd;
                              if (!is_spd(s.Psi)) ++inv.gauss_psi_not_spd;
                              if (!within(s.nu, nz + 1.0, nz + 1.0 + nu_span)) ++inv.gauss_nu_out_of_range;
                            }
                          });
  return out;
}

BenchmarkSummary run_benchmark(const ExperimentConfig& cfg, const ProgressCallback& progress) {
  cfg.validate();
  const std::size_t total = cfg.replications;
  std::vector<std::optional<ReplicationResult>> results(total);
  std::vector<std::optional<ReplicationFailure>> failed(total);

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  auto worker = [&]() {
    for (std::size_t r = next.fetch_add(1); r < total; r = next.fetch_add(1)) {
      try {
        results[r] = run_replication(cfg, r);
      } catch (const std::exception& e) {
        failed[r] = ReplicationFailure{r, replication_seed(cfg, r), e.what()};
      }
      const std::size_t finished = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, total);
      }
    }
  };

  std::size_t threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, total);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  BenchmarkSummary summary;
  summary.config = cfg;
  summary.config_hash = config_hash(cfg);
  for (std::size_t r = 0; r < total; ++r) {
    if (results[r]) {
      summary.invariants += results[r]->invariants;
      summary.records.push_back(std::move(results[r]->record));
    } else if (failed[r]) {
      summary.failures.push_back(std::move(*failed[r]));
    }
  }

  if (!summary.failures.empty() &&
      static_cast<double>(summary.failures.size()) >= 0.01 * static_cast<double>(total)) {
    std::ostringstream msg;
    msg << summary.failures.size() << " of " << total << " replications failed; first: replication "
        << summary.failures.front().replication << " (seed " << summary.failures.front().seed
        << "): " << summary.failures.front().message;
    throw NumericalError(msg.str());
  }

  const std::size_t steps = cfg.steps;
  summary.rho_percentiles.resize(steps);
  std::vector<double> column(summary.records.size());
  std::size_t guards = 0;
  for (std::size_t k = 0; k < steps; ++k) {
    for (std::size_t r = 0; r < summary.records.size(); ++r) {
      const BenchmarkRecord& rec = summary.records[r];
      column[r] = relative_difference(rec.eps_gauss[k], rec.eps_skew[k], &guards);
    }
    if (k + 1 == steps) {
      const auto wins = std::count_if(column.begin(), column.end(), [](double v) { return v > 0.0; });
      const auto big = std::count_if(column.begin(), column.end(), [](double v) { return v > 0.25; });
      summary.win_fraction = static_cast<double>(wins) / static_cast<double>(column.size());
      summary.improve25_fraction = static_cast<double>(big) / static_cast<double>(column.size());
    }
    for (std::size_t j = 0; j < kPercentileLevels.size(); ++j) {
      summary.rho_percentiles[k][j] = percentile(column, kPercentileLevels[j]);
    }
  }
  summary.median_rho_final = summary.rho_percentiles.back()[2];
  summary.zero_error_guards = guards;
  return summary;
}

}  // namespace skewar
