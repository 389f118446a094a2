#pragma once

#include "skewar/sim_harness.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace skewar {

// Canonical JSON form of the fully resolved config (thread count excluded,
// it never changes results).
std::string experiment_config_to_json(const ExperimentConfig& cfg, int indent = 2);

// Fields absent from `json` keep their defaults. Throws ValidationError on
// type errors or unknown keys.
ExperimentConfig experiment_config_from_json(const std::string& json);

// Layers the keys present in `json` over `base`.
ExperimentConfig merge_experiment_config(const ExperimentConfig& base, const std::string& json);

// FNV-1a over the canonical config JSON.
std::uint64_t config_hash(const ExperimentConfig& cfg);

// Columns: replication,k,eps_skew,eps_gauss,rho. The first line is a
// "# config: {...}" comment.
void write_benchmark_csv(std::ostream& out, const BenchmarkSummary& summary);

// Percentile curves, headline fractions, failures, invariants, seeds and the
// config echo. Deterministic for a given config.
void write_benchmark_json(std::ostream& out, const BenchmarkSummary& summary);

// Ground truth of a simulated data set.
struct TruthRecord {
  std::uint64_t seed = 0;
  Vector coefficients;
  SkewNormalParams noise;
};

// JSON sidecar with the config echo, the seed, the coefficients and the
// innovation parameters. Numbers round-trip exactly.
void write_truth_json(std::ostream& out, const ExperimentConfig& cfg, const TruthRecord& truth);

// Throws ValidationError on malformed content.
TruthRecord read_truth_json(std::istream& in);

}  // namespace skewar
