#include "skewar/snapshot.hpp"

#include "skewar/errors.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace skewar {
namespace {

constexpr int kFormatVersion = 1;

void write_vector(std::ostream& out, const char* name, const Vector& v) {
  out << name << ' ' << v.size() << '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
  out << '\n';
}

void write_matrix(std::ostream& out, const char* name, const Matrix& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << m(i, j);
    out << '\n';
  }
}

void write_header(std::ostream& out, const char* kind, Eigen::Index n_ar, Eigen::Index n_z) {
  out << std::setprecision(17);
  out << "skewar-state " << kFormatVersion << '\n';
  out << "kind " << kind << '\n';
  out << "n_ar " << n_ar << '\n';
  out << "n_z " << n_z << '\n';
}

// Line-oriented reader that reports 1-based line numbers.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::istringstream next_line() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) {
        return std::istringstream(line);
      }
    }
    fail("unexpected end of input");
  }

  // Reads "<key> <values...>" and checks the key.
  std::istringstream expect(const std::string& key) {
    std::istringstream line = next_line();
    std::string got;
    line >> got;
    if (got != key) fail("expected '" + key + "', found '" + got + "'");
    return line;
  }

  template <typename T>
  T value(std::istringstream& line, const std::string& what) {
    T v{};
    if (!(line >> v)) fail("cannot parse " + what);
    return v;
  }

  Vector vector(const std::string& key, Eigen::Index expected) {
    std::istringstream head = expect(key);
    const auto n = value<Eigen::Index>(head, key + " size");
    if (n != expected) fail(key + " has size " + std::to_string(n) + ", expected " + std::to_string(expected));
    Vector v(n);
    std::istringstream row = next_line();
    for (Eigen::Index i = 0; i < n; ++i) v[i] = value<double>(row, key + " entry");
    return v;
  }

  Matrix matrix(const std::string& key, Eigen::Index rows, Eigen::Index cols) {
    std::istringstream head = expect(key);
    const auto r = value<Eigen::Index>(head, key + " rows");
    const auto c = value<Eigen::Index>(head, key + " cols");
    if (r != rows || c != cols) fail(key + " has wrong shape");
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
      std::istringstream row = next_line();
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = value<double>(row, key + " entry");
    }
    return m;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ValidationError("snapshot line " + std::to_string(line_no_) + ": " + msg);
  }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

}  // namespace

void write_snapshot(std::ostream& out, const FilterState& state) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  write_header(out, "skew", state.n_ar(), state.n_z());
  write_vector(out, "x", state.x);
  write_matrix(out, "P_sqrt", state.P_sqrt);
  write_matrix(out, "DeltaHat", state.noise.DeltaHat);
  write_matrix(out, "V", state.noise.V);
  write_matrix(out, "Psi", state.noise.Psi);
  out << "nu " << state.noise.nu << "\nend\n";
  out.flags(flags);
  out.precision(precision);
}

void write_snapshot(std::ostream& out, const GaussianFilterState& state) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  write_header(out, "gaussian", state.n_ar(), state.n_z());
  write_vector(out, "x", state.x);
  write_matrix(out, "P_sqrt", state.P_sqrt);
  write_matrix(out, "Psi", state.Psi);
  out << "nu " << state.nu << "\nend\n";
  out.flags(flags);
  out.precision(precision);
}

AnyFilterState read_snapshot(std::istream& in) {
  Reader r(in);
  {
    std::istringstream line = r.expect("skewar-state");
    const int version = r.value<int>(line, "format version");
    if (version != kFormatVersion) r.fail("unsupported format version " + std::to_string(version));
  }
  std::string kind;
  {
    std::istringstream line = r.expect("kind");
    kind = r.value<std::string>(line, "kind");
    if (kind != "skew" && kind != "gaussian") r.fail("unknown kind '" + kind + "'");
  }
  std::istringstream ar_line = r.expect("n_ar");
  const auto n_ar = r.value<Eigen::Index>(ar_line, "n_ar");
  std::istringstream z_line = r.expect("n_z");
  const auto n_z = r.value<Eigen::Index>(z_line, "n_z");
  if (n_ar < 1 || n_z < 1) r.fail("dimensions must be positive");

  Vector x = r.vector("x", n_ar);
  Matrix P_sqrt = r.matrix("P_sqrt", n_ar, n_ar);
  AnyFilterState result;
  if (kind == "skew") {
    FilterState s;
    s.x = std::move(x);
    s.P_sqrt = std::move(P_sqrt);
    s.noise.DeltaHat = r.matrix("DeltaHat", n_z, n_z);
    s.noise.V = r.matrix("V", n_z, n_z);
    s.noise.Psi = r.matrix("Psi", n_z, n_z);
    std::istringstream nu_line = r.expect("nu");
    s.noise.nu = r.value<double>(nu_line, "nu");
    result = std::move(s);
  } else {
    GaussianFilterState s;
    s.x = std::move(x);
    s.P_sqrt = std::move(P_sqrt);
    s.Psi = r.matrix("Psi", n_z, n_z);
    std::istringstream nu_line = r.expect("nu");
    s.nu = r.value<double>(nu_line, "nu");
    result = std::move(s);
  }
  r.expect("end");
  std::visit([&r](const auto& s) {
    try {
      s.validate();
    } catch (const ValidationError& e) {
      r.fail(e.what());
    }
  }, result);
  return result;
}

std::string to_snapshot_string(const AnyFilterState& state) {
  std::ostringstream out;
  std::visit([&out](const auto& s) { write_snapshot(out, s); }, state);
  return out.str();
}

}  // namespace skewar
