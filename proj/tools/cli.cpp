#include "cli.hpp"

#include "skewar/baseline_gaussian.hpp"
#include "skewar/benchmark_io.hpp"
#include "skewar/errors.hpp"
#include "skewar/identifier.hpp"
#include "skewar/random.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace skewar::cli {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  const fs::path path = dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::string& name) {
  out.flush();
  if (!out) throw IoError("write failed for " + name);
}

std::string fmt(double v, int digits = 12) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) parts.push_back(cur);
  if (!line.empty() && line.back() == sep) parts.emplace_back();
  return parts;
}

double parse_double(const std::string& text, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) {
    throw IoError("data line " + std::to_string(line_no) + ": invalid number '" + text + "'");
  }
  return v;
}

struct EstimateRow {
  const Vector* x = nullptr;
  Vector p_diag;
  Matrix delta;
  Matrix r;
};

}  // namespace

ExperimentConfig RunManifest::resolve_config() const {
  ExperimentConfig cfg;
  if (config_path) cfg = experiment_config_from_json(read_file(*config_path));
  if (seed) cfg.master_seed = *seed;
  if (replications) cfg.replications = *replications;
  if (steps) cfg.steps = *steps;
  if (gamma) cfg.gamma = *gamma;
  if (vb_iterations) cfg.vb_iterations = *vb_iterations;
  if (threads) cfg.threads = *threads;
  cfg.validate();
  return cfg;
}

Measurements read_measurements(std::istream& in, Eigen::Index n_z) {
  Measurements m;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const std::vector<std::string> cells = split(line, ',');
    if (static_cast<Eigen::Index>(cells.size()) != n_z + 1) {
      throw IoError("data line " + std::to_string(line_no) + ": expected " + std::to_string(n_z + 1) +
                    " columns, found " + std::to_string(cells.size()));
    }
    if (!header_seen) {
      if (cells.front() != "k") throw IoError("data line " + std::to_string(line_no) + ": missing header");
      header_seen = true;
      continue;
    }
    const double k = parse_double(cells.front(), line_no);
    if (k != static_cast<double>(m.z.size() + 1)) {
      throw IoError("data line " + std::to_string(line_no) + ": expected k = " + std::to_string(m.z.size() + 1));
    }
    Vector z(n_z);
    for (Eigen::Index i = 0; i < n_z; ++i) z[i] = parse_double(cells[static_cast<std::size_t>(i) + 1], line_no);
    m.z.push_back(std::move(z));
  }
  if (m.z.empty()) throw IoError("data file contains no measurements");
  return m;
}

void write_measurements(std::ostream& out, const ExperimentConfig& cfg, const std::vector<Vector>& z) {
  out << "# config: " << experiment_config_to_json(cfg, -1) << '\n';
  out << 'k';
  for (Eigen::Index i = 0; i < cfg.n_z; ++i) out << ",z_" << i + 1;
  out << '\n';
  for (std::size_t k = 0; k < z.size(); ++k) {
    out << k + 1;
    for (Eigen::Index i = 0; i < z[k].size(); ++i) out << ',' << fmt(z[k][i], 17);
    out << '\n';
  }
}

void cmd_simulate(const RunManifest& m, std::ostream& log) {
  const ExperimentConfig cfg = m.resolve_config();
  TruthRecord truth;
  truth.seed = replication_seed(cfg, 0);
  truth.noise = cfg.truth;
  Rng rng(truth.seed);
  truth.coefficients = generate_stable_coefficients(rng, cfg.n_ar);
  const std::vector<Vector> z = simulate_trajectory(rng, truth.coefficients, cfg.truth, cfg.steps);

  std::ofstream data = open_output(m.out_dir, "measurements.csv");
  write_measurements(data, cfg, z);
  finish(data, "measurements.csv");
  std::ofstream sidecar = open_output(m.out_dir, "truth.json");
  write_truth_json(sidecar, cfg, truth);
  finish(sidecar, "truth.json");
  log << "wrote " << z.size() << " measurements to " << (m.out_dir / "measurements.csv").string() << '\n';
}

void cmd_identify(const RunManifest& m, std::ostream& log) {
  if (m.method != "skew" && m.method != "gaussian") {
    throw ValidationError("method must be 'skew' or 'gaussian'");
  }
  const ExperimentConfig cfg = m.resolve_config();
  std::optional<TruthRecord> truth;
  if (m.truth_path) {
    std::istringstream in(read_file(*m.truth_path));
    truth = read_truth_json(in);
    if (truth->coefficients.size() != cfg.n_ar) {
      throw ValidationError("truth has " + std::to_string(truth->coefficients.size()) +
                            " coefficients but the config sets n_ar = " + std::to_string(cfg.n_ar));
    }
  }
  std::istringstream data_in(read_file(m.data_path));
  const Measurements data = read_measurements(data_in, cfg.n_z);

  const std::string name = "estimates_" + m.method + ".csv";
  std::ofstream out = open_output(m.out_dir, name);
  out << "# config: " << experiment_config_to_json(cfg, -1) << '\n';
  out << "# method: " << m.method << '\n';
  out << 'k';
  for (Eigen::Index i = 1; i <= cfg.n_ar; ++i) out << ",x_" << i;
  for (Eigen::Index i = 1; i <= cfg.n_ar; ++i) out << ",P_" << i << '_' << i;
  for (Eigen::Index i = 1; i <= cfg.n_z; ++i) {
    for (Eigen::Index j = 1; j <= cfg.n_z; ++j) out << ",Delta_" << i << '_' << j;
  }
  for (Eigen::Index i = 1; i <= cfg.n_z; ++i) {
    for (Eigen::Index j = 1; j <= cfg.n_z; ++j) out << ",R_" << i << '_' << j;
  }
  if (truth) out << ",eps";
  out << '\n';

  const auto emit = [&](std::size_t k, const EstimateRow& row) {
    out << k;
    for (Eigen::Index i = 0; i < row.x->size(); ++i) out << ',' << fmt((*row.x)[i]);
    for (Eigen::Index i = 0; i < row.p_diag.size(); ++i) out << ',' << fmt(row.p_diag[i]);
    for (Eigen::Index i = 0; i < row.delta.rows(); ++i) {
      for (Eigen::Index j = 0; j < row.delta.cols(); ++j) out << ',' << fmt(row.delta(i, j));
    }
    for (Eigen::Index i = 0; i < row.r.rows(); ++i) {
      for (Eigen::Index j = 0; j < row.r.cols(); ++j) out << ',' << fmt(row.r(i, j));
    }
    if (truth) out << ',' << fmt(identification_error(*row.x, truth->coefficients));
    out << '\n';
  };

  const IdentifierConfig icfg = cfg.identifier_config();
  if (m.method == "skew") {
    run_identifier(data.z, skew_prior(cfg.n_ar, cfg.n_z, cfg.nu_margin, cfg.skew_prior), icfg,
                   [&](std::size_t k, const FilterState& s) {
                     emit(k, {&s.x, s.P_sqrt.rowwise().squaredNorm(), s.noise.DeltaHat, expected_R(s.noise)});
                   });
  } else {
    const Matrix zero = Matrix::Zero(cfg.n_z, cfg.n_z);
    run_gaussian_identifier(data.z, reference_gaussian_prior(cfg.n_ar, cfg.n_z, cfg.nu_margin), icfg,
                            [&](std::size_t k, const GaussianFilterState& s) {
                              emit(k, {&s.x, s.P_sqrt.rowwise().squaredNorm(), zero, expected_R(s)});
                            });
  }
  finish(out, name);
  log << "wrote " << data.z.size() << " estimates to " << (m.out_dir / name).string() << '\n';
}

void cmd_benchmark(const RunManifest& m, std::ostream& log, std::ostream& progress) {
  const ExperimentConfig cfg = m.resolve_config();
  const auto start = std::chrono::steady_clock::now();
  const BenchmarkSummary summary = run_benchmark(cfg, [&progress](std::size_t done, std::size_t total) {
    progress << "\rreplications " << done << '/' << total << std::flush;
    if (done == total) progress << '\n';
  });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::ofstream json_out = open_output(m.out_dir, "summary.json");
  write_benchmark_json(json_out, summary);
  finish(json_out, "summary.json");
  std::ofstream csv_out = open_output(m.out_dir, "benchmark.csv");
  write_benchmark_csv(csv_out, summary);
  finish(csv_out, "benchmark.csv");
  // Wall-clock time lives in its own file so the two outputs above stay
  // byte-identical across runs.
  std::ofstream timing = open_output(m.out_dir, "timing.json");
  timing << "{\"wall_seconds\": " << fmt(seconds, 6) << ", \"replications\": " << summary.records.size()
         << ", \"threads\": " << cfg.threads << "}\n";
  finish(timing, "timing.json");

  log << "replications_ok " << summary.records.size() << '/' << cfg.replications << '\n';
  log << "win_fraction " << fmt(summary.win_fraction, 6) << '\n';
  log << "improve25_fraction " << fmt(summary.improve25_fraction, 6) << '\n';
  log << "median_rho_final " << fmt(summary.median_rho_final, 6) << '\n';
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Skew-normal AR identification: simulate, identify and benchmark"};
  app.require_subcommand(1);

  RunManifest m;
  const auto add_common = [&m](CLI::App* sub) {
    sub->add_option("--config", m.config_path, "JSON config file");
    sub->add_option("--seed", m.seed, "master seed");
    sub->add_option("--out", m.out_dir, "output directory");
    sub->add_option("--steps", m.steps, "measurements per trajectory");
    sub->add_option("--gamma", m.gamma, "forgetting factor");
    sub->add_option("--vb-iters", m.vb_iterations, "VB iterations per measurement");
  };
  CLI::App* simulate = app.add_subcommand("simulate", "simulate one trajectory and its truth");
  add_common(simulate);
  CLI::App* identify = app.add_subcommand("identify", "run an identifier on a measurement file");
  add_common(identify);
  identify->add_option("--data", m.data_path, "measurement CSV")->required();
  identify->add_option("--truth", m.truth_path, "truth sidecar; adds an eps column");
  identify->add_option("--method", m.method, "skew | gaussian");
  CLI::App* benchmark = app.add_subcommand("benchmark", "Monte Carlo comparison of both identifiers");
  add_common(benchmark);
  benchmark->add_option("--replications", m.replications, "number of replications");
  benchmark->add_option("--threads", m.threads, "worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (simulate->parsed()) {
      m.subcommand = "simulate";
      cmd_simulate(m, out);
    } else if (identify->parsed()) {
      m.subcommand = "identify";
      cmd_identify(m, out);
    } else {
      m.subcommand = "benchmark";
      cmd_benchmark(m, out, err);
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace skewar::cli
