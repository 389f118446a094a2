#include "skewar/benchmark_io.hpp"

#include "skewar/errors.hpp"

#include <json.hpp>

#include <cstdio>
#include <ostream>
#include <set>
#include <string>

namespace skewar {
namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Matrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ValidationError("config: " + what + " must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ValidationError("config: " + what + " rows must have equal length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Vector vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw ValidationError("config: " + what + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

json config_to_json_object(const ExperimentConfig& cfg) {
  json j;
  j["n_ar"] = cfg.n_ar;
  j["n_z"] = cfg.n_z;
  j["steps"] = cfg.steps;
  j["replications"] = cfg.replications;
  j["gamma"] = cfg.gamma;
  j["vb_iterations"] = cfg.vb_iterations;
  j["truth"] = {{"mu", vector_to_json(cfg.truth.mu)},
                {"R", matrix_to_json(cfg.truth.R)},
                {"Delta", matrix_to_json(cfg.truth.Delta)}};
  j["master_seed"] = cfg.master_seed;
  j["q_policy"] = cfg.q_policy;
  j["q_fixed_scale"] = cfg.q_fixed_scale;
  j["nu_margin"] = cfg.nu_margin;
  j["skew_prior"] = {{"delta_scale", cfg.skew_prior.delta_scale},
                     {"v_scale", cfg.skew_prior.v_scale},
                     {"r_share", cfg.skew_prior.r_share}};
  j["csv_every"] = cfg.csv_every;
  j["check_invariants"] = cfg.check_invariants;
  return j;
}

void apply_json(ExperimentConfig& cfg, const json& j) {
  static const std::set<std::string> known{"n_ar", "n_z", "steps", "replications", "gamma", "vb_iterations",
                                           "truth", "master_seed", "q_policy", "q_fixed_scale", "nu_margin",
                                           "csv_every", "check_invariants", "threads", "skew_prior"};
  if (!j.is_object()) throw ValidationError("config: top level must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ValidationError("config: unknown key '" + key + "'");
  }
  try {
    if (j.contains("n_ar")) cfg.n_ar = j["n_ar"].get<Eigen::Index>();
    if (j.contains("n_z")) cfg.n_z = j["n_z"].get<Eigen::Index>();
    if (j.contains("steps")) cfg.steps = j["steps"].get<std::size_t>();
    if (j.contains("replications")) cfg.replications = j["replications"].get<std::size_t>();
    if (j.contains("gamma")) cfg.gamma = j["gamma"].get<double>();
    if (j.contains("vb_iterations")) cfg.vb_iterations = j["vb_iterations"].get<int>();
    if (j.contains("master_seed")) cfg.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("q_policy")) cfg.q_policy = j["q_policy"].get<std::string>();
    if (j.contains("q_fixed_scale")) cfg.q_fixed_scale = j["q_fixed_scale"].get<double>();
    if (j.contains("nu_margin")) cfg.nu_margin = j["nu_margin"].get<double>();
    if (j.contains("csv_every")) cfg.csv_every = j["csv_every"].get<std::size_t>();
    if (j.contains("check_invariants")) cfg.check_invariants = j["check_invariants"].get<bool>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<std::size_t>();
    if (j.contains("skew_prior")) {
      const json& p = j["skew_prior"];
      if (!p.is_object()) throw ValidationError("config: skew_prior must be an object");
      for (const auto& [key, value] : p.items()) {
        if (key != "delta_scale" && key != "v_scale" && key != "r_share") {
          throw ValidationError("config: unknown skew_prior key '" + key + "'");
        }
      }
      if (p.contains("delta_scale")) cfg.skew_prior.delta_scale = p["delta_scale"].get<double>();
      if (p.contains("v_scale")) cfg.skew_prior.v_scale = p["v_scale"].get<double>();
      if (p.contains("r_share")) cfg.skew_prior.r_share = p["r_share"].get<double>();
    }
    if (j.contains("truth")) {
      const json& t = j["truth"];
      if (!t.is_object()) throw ValidationError("config: truth must be an object");
      for (const auto& [key, value] : t.items()) {
        if (key != "mu" && key != "R" && key != "Delta") {
          throw ValidationError("config: unknown truth key '" + key + "'");
        }
      }
      if (t.contains("mu")) cfg.truth.mu = vector_from_json(t["mu"], "truth.mu");
      if (t.contains("R")) cfg.truth.R = matrix_from_json(t["R"], "truth.R");
      if (t.contains("Delta")) cfg.truth.Delta = matrix_from_json(t["Delta"], "truth.Delta");
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string experiment_config_to_json(const ExperimentConfig& cfg, int indent) {
  return config_to_json_object(cfg).dump(indent);
}

ExperimentConfig merge_experiment_config(const ExperimentConfig& base, const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg = base;
  apply_json(cfg, j);
  return cfg;
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  return merge_experiment_config(ExperimentConfig{}, text);
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string canonical = experiment_config_to_json(cfg, -1);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_benchmark_csv(std::ostream& out, const BenchmarkSummary& summary) {
  const std::size_t every = summary.config.csv_every;
  const std::size_t steps = summary.config.steps;
  out << "# config: " << experiment_config_to_json(summary.config, -1) << '\n';
  out << "replication,k,eps_skew,eps_gauss,rho\n";
  for (const BenchmarkRecord& rec : summary.records) {
    for (std::size_t k = 0; k < steps; ++k) {
      const std::size_t step = k + 1;
      if (step % every != 0 && step != steps) continue;
      const double rho = relative_difference(rec.eps_gauss[k], rec.eps_skew[k]);
      out << rec.replication << ',' << step << ',' << format_number(rec.eps_skew[k]) << ','
          << format_number(rec.eps_gauss[k]) << ',' << format_number(rho) << '\n';
    }
  }
}

void write_benchmark_json(std::ostream& out, const BenchmarkSummary& summary) {
  json j;
  j["format"] = "skewar-benchmark-summary";
  j["version"] = 1;
  j["config"] = config_to_json_object(summary.config);
  j["config_hash"] = hex64(summary.config_hash);
  j["replications_requested"] = summary.config.replications;
  j["replications_ok"] = summary.records.size();

  json seeds = json::array();
  for (const BenchmarkRecord& rec : summary.records) {
    seeds.push_back({{"replication", rec.replication}, {"seed", rec.seed}});
  }
  j["seeds"] = std::move(seeds);

  json failures = json::array();
  for (const ReplicationFailure& f : summary.failures) {
    failures.push_back({{"replication", f.replication}, {"seed", f.seed}, {"message", f.message}});
  }
  j["failures"] = std::move(failures);

  j["headline"] = {{"steps", summary.config.steps},
                   {"win_fraction", summary.win_fraction},
                   {"improve25_fraction", summary.improve25_fraction},
                   {"median_rho_final", summary.median_rho_final}};
  j["zero_error_guards"] = summary.zero_error_guards;

  const InvariantReport& inv = summary.invariants;
  j["invariants"] = {{"steps_checked", inv.steps_checked},
                     {"p_not_spd", inv.p_not_spd},
                     {"psi_not_spd", inv.psi_not_spd},
                     {"v_not_spd", inv.v_not_spd},
                     {"nu_out_of_range", inv.nu_out_of_range},
                     {"gauss_p_not_spd", inv.gauss_p_not_spd},
                     {"gauss_psi_not_spd", inv.gauss_psi_not_spd},
                     {"gauss_nu_out_of_range", inv.gauss_nu_out_of_range}};

  json levels = json::array();
  for (const double l : kPercentileLevels) levels.push_back(l);
  j["percentile_levels"] = std::move(levels);
  json curves;
  curves["k"] = json::array();
  std::array<json, kPercentileLevels.size()> columns;
  for (auto& c : columns) c = json::array();
  for (std::size_t k = 0; k < summary.rho_percentiles.size(); ++k) {
    curves["k"].push_back(k + 1);
    for (std::size_t l = 0; l < columns.size(); ++l) columns[l].push_back(summary.rho_percentiles[k][l]);
  }
  for (std::size_t l = 0; l < columns.size(); ++l) {
    curves["p" + std::to_string(static_cast<int>(kPercentileLevels[l]))] = std::move(columns[l]);
  }
  j["rho_percentiles"] = std::move(curves);
  out << j.dump(1) << '\n';
}

void write_truth_json(std::ostream& out, const ExperimentConfig& cfg, const TruthRecord& truth) {
  json j;
  j["format"] = "skewar-truth";
  j["version"] = 1;
  j["config"] = config_to_json_object(cfg);
  j["seed"] = truth.seed;
  j["coefficients"] = vector_to_json(truth.coefficients);
  j["noise"] = {{"mu", vector_to_json(truth.noise.mu)},
                {"R", matrix_to_json(truth.noise.R)},
                {"Delta", matrix_to_json(truth.noise.Delta)}};
  out << j.dump(1) << '\n';
}

TruthRecord read_truth_json(std::istream& in) {
  TruthRecord t;
  try {
    const json j = json::parse(in);
    if (j.value("format", std::string{}) != "skewar-truth") throw ValidationError("truth: not a skewar-truth file");
    t.seed = j.at("seed").get<std::uint64_t>();
    t.coefficients = vector_from_json(j.at("coefficients"), "coefficients");
    const json& n = j.at("noise");
    t.noise.mu = vector_from_json(n.at("mu"), "noise.mu");
    t.noise.R = matrix_from_json(n.at("R"), "noise.R");
    t.noise.Delta = matrix_from_json(n.at("Delta"), "noise.Delta");
  } catch (const json::exception& e) {
    throw ValidationError(std::string("truth: ") + e.what());
  }
  if (t.coefficients.size() == 0) throw ValidationError("truth: empty coefficient vector");
  t.noise.validate();
  return t;
}

}  // namespace skewar
