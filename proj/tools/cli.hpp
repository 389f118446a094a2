#pragma once

#include "skewar/sim_harness.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace skewar::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitIo = 4,
};

// Unreadable/unwritable files and malformed data files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Everything needed to reproduce one invocation.
struct RunManifest {
  std::string subcommand;
  std::optional<std::filesystem::path> config_path;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir = ".";
  std::optional<std::size_t> replications;
  std::optional<std::size_t> steps;
  std::optional<double> gamma;
  std::optional<int> vb_iterations;
  std::optional<std::size_t> threads;

  // identify only
  std::filesystem::path data_path;
  std::optional<std::filesystem::path> truth_path;
  std::string method = "skew";

  // Config file (if any) layered over the defaults, then the flag overrides.
  // Validated before it is returned.
  ExperimentConfig resolve_config() const;
};

struct Measurements {
  std::vector<Vector> z;
};

// CSV with optional '#' comment lines, a header "k,z_1,...,z_n" and rows
// numbered 1..K. Throws IoError naming the offending line.
Measurements read_measurements(std::istream& in, Eigen::Index n_z);
void write_measurements(std::ostream& out, const ExperimentConfig& cfg, const std::vector<Vector>& z);

// Writes measurements.csv and truth.json into m.out_dir. Uses the seed of
// replication 0, so the data equal the first benchmark replication.
void cmd_simulate(const RunManifest& m, std::ostream& log);

// Writes estimates_<method>.csv into m.out_dir.
void cmd_identify(const RunManifest& m, std::ostream& log);

// Writes summary.json, benchmark.csv and timing.json into m.out_dir and
// prints the headline fractions to `log`.
void cmd_benchmark(const RunManifest& m, std::ostream& log, std::ostream& progress);

// Parses argv, dispatches and maps errors to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace skewar::cli
