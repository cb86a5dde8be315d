/// File formats: Matrix Market matrices (array and coordinate), the key-value
/// problem config, and the CSV emitters for solver results and diagnostics.
/// All floating point output uses 17 significant digits so files round-trip.
#pragma once

#include <Eigen/Dense>

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hamdevp/arnoldi.hpp"
#include "hamdevp/problem.hpp"

namespace hamdevp {

struct IOError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string format_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace detail {

inline std::string lowercase(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline std::string trimmed(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Reads a real Matrix Market file; array and coordinate formats, general,
/// symmetric and skew-symmetric storage. Coordinate input is densified.
inline Eigen::MatrixXd read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open matrix file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IOError("empty matrix file: " + path);
  std::istringstream head(detail::lowercase(line));
  std::string banner, object, format, field, symmetry;
  head >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%matrixmarket" || object != "matrix")
    throw IOError("not a Matrix Market file: " + path);
  if (field != "real" && field != "integer")
    throw IOError(path + ": only real-valued matrices are supported");
  const bool coordinate = format == "coordinate";
  if (!coordinate && format != "array") throw IOError(path + ": unknown format " + format);
  if (symmetry != "general" && symmetry != "symmetric" && symmetry != "skew-symmetric")
    throw IOError(path + ": unsupported symmetry " + symmetry);

  while (std::getline(in, line)) {
    const std::string t = detail::trimmed(line);
    if (!t.empty() && t[0] != '%') break;
  }
  std::istringstream sizes(line);
  long rows = 0, cols = 0, nnz = 0;
  if (coordinate) {
    if (!(sizes >> rows >> cols >> nnz)) throw IOError(path + ": bad size line");
  } else {
    if (!(sizes >> rows >> cols)) throw IOError(path + ": bad size line");
  }
  if (rows <= 0 || cols <= 0) throw IOError(path + ": nonpositive dimensions");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  if (coordinate) {
    for (long e = 0; e < nnz; ++e) {
      long i, j;
      double v;
      if (!(in >> i >> j >> v)) throw IOError(path + ": truncated coordinate data");
      if (i < 1 || i > rows || j < 1 || j > cols) throw IOError(path + ": index out of range");
      m(i - 1, j - 1) = v;
      if (symmetry == "symmetric" && i != j) m(j - 1, i - 1) = v;
      if (symmetry == "skew-symmetric" && i != j) m(j - 1, i - 1) = -v;
    }
  } else {
    // column-major; symmetric/skew store the lower triangle only
    for (long j = 0; j < cols; ++j) {
      const long i0 = symmetry == "general" ? 0 : j + (symmetry == "skew-symmetric" ? 1 : 0);
      for (long i = i0; i < rows; ++i) {
        double v;
        if (!(in >> v)) throw IOError(path + ": truncated array data");
        m(i, j) = v;
        if (symmetry == "symmetric" && i != j) m(j, i) = v;
        if (symmetry == "skew-symmetric") m(j, i) = -v;
      }
    }
  }
  return m;
}

inline void write_matrix_market(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write matrix file: " + path);
  out << "%%MatrixMarket matrix array real general\n";
  out << m.rows() << " " << m.cols() << "\n";
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) out << format_full(m(i, j)) << "\n";
  if (!out) throw IOError("write failed: " + path);
}

inline Shift parse_shift(const std::string& text) {
  const std::string t = detail::trimmed(text);
  if (t == "0" || t == "0.0") return Shift::zero();
  if (t.size() > 2 && (t[0] == 'r' || t[0] == 'i') && t[1] == ':') {
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(t.substr(2), &used);
    } catch (const std::exception&) {
      throw IOError("cannot parse shift value: " + text);
    }
    if (used != t.size() - 2) throw IOError("cannot parse shift value: " + text);
    return t[0] == 'r' ? Shift::real(v) : Shift::imaginary(v);
  }
  throw IOError("shift must be 0, r:<x> or i:<x>, got: " + text);
}

inline std::string shift_to_string(const Shift& s) {
  switch (s.kind) {
    case ShiftKind::Zero: return "0";
    case ShiftKind::Real: return "r:" + format_full(s.value);
    default: return "i:" + format_full(s.value);
  }
}

inline SolverMode parse_mode(const std::string& text) {
  const std::string t = detail::lowercase(detail::trimmed(text));
  if (t == "baseline") return SolverMode::Baseline;
  if (t == "plain-r" || t == "plain") return SolverMode::PlainReorth;
  if (t == "j-enforced" || t == "jenforced") return SolverMode::JEnforced;
  throw IOError("unknown mode: " + text + " (expected baseline, plain-r or j-enforced)");
}

/// A solver run loaded from disk: the problem plus the run parameters the
/// config chose to pin down.
struct ProblemConfig {
  DelayHamiltonianProblem problem;
  Shift shift = Shift::zero();
  Index iters = 30;
  SolverMode mode = SolverMode::JEnforced;
  Eigen::VectorXd start;  ///< empty = default
};

/// Key-value config: `key = value` lines, `#` comments. Keys: n, delays
/// (whitespace/comma separated), h0, hneg<k>, hpos<k> (Matrix Market paths,
/// relative to the config file), shift, iters, mode, start (2n reals).
inline ProblemConfig load_problem_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open config: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = detail::trimmed(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw IOError(path + ":" + std::to_string(lineno) + ": expected key = value");
    kv[detail::lowercase(detail::trimmed(t.substr(0, eq)))] = detail::trimmed(t.substr(eq + 1));
  }
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw IOError(path + ": missing key '" + key + "'");
    return it->second;
  };
  auto numbers = [&](const std::string& text) {
    std::string s = text;
    for (char& c : s)
      if (c == ',') c = ' ';
    std::istringstream ss(s);
    std::vector<double> vals;
    double v;
    while (ss >> v) vals.push_back(v);
    return vals;
  };
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto matrix = [&](const std::string& key) {
    return read_matrix_market((base / need(key)).string());
  };

  ProblemConfig cfg;
  try {
    cfg.problem.n = static_cast<Index>(std::stol(need("n")));
  } catch (const std::exception&) {
    throw IOError(path + ": bad value for n");
  }
  cfg.problem.delays = numbers(need("delays"));
  cfg.problem.H0 = matrix("h0");
  for (std::size_t k = 1; k <= cfg.problem.delays.size(); ++k) {
    cfg.problem.Hneg.push_back(matrix("hneg" + std::to_string(k)));
    cfg.problem.Hpos.push_back(matrix("hpos" + std::to_string(k)));
  }
  cfg.problem.check_shapes();
  if (kv.count("shift")) cfg.shift = parse_shift(kv["shift"]);
  if (kv.count("iters")) cfg.iters = static_cast<Index>(std::stol(kv["iters"]));
  if (kv.count("mode")) cfg.mode = parse_mode(kv["mode"]);
  if (kv.count("start")) {
    const std::vector<double> s = numbers(kv["start"]);
    cfg.start = Eigen::Map<const Eigen::VectorXd>(s.data(), s.size());
    if (cfg.start.size() != cfg.problem.size())
      throw IOError(path + ": start vector must have 2n entries");
  }
  return cfg;
}

/// Eigenvalue table: re_lambda, im_lambda, residual, symmetry_class, mode.
inline void write_eigenvalue_csv(const std::string& path, const SolveResult& res) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write: " + path);
  out << "re_lambda,im_lambda,residual,symmetry_class,mode\n";
  for (const RitzPair& r : res.ritz)
    out << format_full(r.lambda.real()) << "," << format_full(r.lambda.imag()) << ","
        << format_full(r.residual) << "," << r.symmetry << "," << to_string(res.mode) << "\n";
  if (!out) throw IOError("write failed: " + path);
}

struct EigenvalueRow {
  Complex lambda;
  double residual;
  std::string symmetry;
  std::string mode;
};

inline std::vector<EigenvalueRow> read_eigenvalue_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IOError("empty csv: " + path);
  std::vector<EigenvalueRow> rows;
  while (std::getline(in, line)) {
    if (detail::trimmed(line).empty()) continue;
    std::istringstream ss(line);
    std::string re, im, r, sym, mode;
    if (!std::getline(ss, re, ',') || !std::getline(ss, im, ',') || !std::getline(ss, r, ',') ||
        !std::getline(ss, sym, ',') || !std::getline(ss, mode))
      throw IOError(path + ": malformed row: " + line);
    rows.push_back({Complex(std::stod(re), std::stod(im)), std::stod(r), sym, mode});
  }
  return rows;
}

/// Diagnostics: iteration, degree, scaled max |Q^T S Q|, max |Q^H Q - I|.
inline void write_diagnostics_csv(const std::string& path, const SolveResult& res) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write: " + path);
  out << "iteration,degree,neutrality_max,ortho_max\n";
  for (std::size_t i = 0; i < res.degree_history.size(); ++i) {
    out << (i + 1) << "," << res.degree_history[i] << ",";
    out << (i < res.neutrality_history.size() ? format_full(res.neutrality_history[i]) : "");
    out << ",";
    out << (i < res.ortho_history.size() ? format_full(res.ortho_history[i]) : "");
    out << "\n";
  }
  if (!out) throw IOError("write failed: " + path);
}

inline void write_degree_csv(const std::string& path, const SolveResult& res) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write: " + path);
  out << "iteration,degree\n";
  for (std::size_t i = 0; i < res.degree_history.size(); ++i)
    out << (i + 1) << "," << res.degree_history[i] << "\n";
  if (!out) throw IOError("write failed: " + path);
}

/// Convergence history: one row per iteration, one column of forward errors per
/// tracked eigenvalue.
inline void write_convergence_csv(const std::string& path, const std::vector<Complex>& tracked,
                                  const std::vector<std::vector<double>>& errors) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write: " + path);
  out << "iteration";
  for (const Complex& t : tracked)
    out << ",err_" << format_full(t.real()) << (t.imag() < 0 ? "-" : "+") << "j"
        << format_full(std::abs(t.imag()));
  out << "\n";
  for (std::size_t i = 0; i < errors.size(); ++i) {
    out << (i + 1);
    for (double e : errors[i]) out << "," << format_full(e);
    out << "\n";
  }
  if (!out) throw IOError("write failed: " + path);
}

/// Debug dump of a coefficient matrix: row = component, column = coefficient.
template <typename Scalar>
void write_chebfun_csv(const std::string& path, const ChebFun<Scalar>& f) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write: " + path);
  for (Index i = 0; i < f.dim(); ++i) {
    for (Index l = 0; l <= f.degree(); ++l) {
      if (l) out << ",";
      if constexpr (std::is_same_v<Scalar, double>) {
        out << format_full(f.coeffs()(i, l));
      } else {
        out << format_full(f.coeffs()(i, l).real()) << (f.coeffs()(i, l).imag() < 0 ? "-" : "+")
            << format_full(std::abs(f.coeffs()(i, l).imag())) << "j";
      }
    }
    out << "\n";
  }
  if (!out) throw IOError("write failed: " + path);
}

}  // namespace hamdevp
