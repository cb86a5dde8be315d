// Command-line front end: solve / compare / validate over config files or the
// builtin example problems, with CSV emission of tables and diagnostics.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hamdevp/hamdevp.hpp"

namespace {

using namespace hamdevp;

constexpr int kExitOk = 0;
constexpr int kExitSolver = 1;
constexpr int kExitValidation = 2;
constexpr int kExitIO = 3;

struct RunSpec {
  std::string config_path;
  int example = 0;
  Index n = 100;
  double gamma = 0.00018;
  std::string shift = "";
  Index iters = -1;
  std::string mode = "";
  std::string start = "";
  std::string out_dir = ".";
  bool emit_eigen = false;
  bool emit_convergence = false;
  bool emit_degrees = false;
  bool emit_diagnostics = false;
  bool validate_only_print = false;
};

Eigen::VectorXd parse_start(const std::string& text) {
  std::string s = text;
  for (char& c : s)
    if (c == ',') c = ' ';
  std::istringstream ss(s);
  std::vector<double> vals;
  double v;
  while (ss >> v) vals.push_back(v);
  if (vals.empty()) throw IOError("empty start vector: " + text);
  return Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size());
}

/// Problem plus effective run parameters, from config file or builtin example.
ProblemConfig assemble(const RunSpec& spec) {
  ProblemConfig cfg;
  if (!spec.config_path.empty()) {
    cfg = load_problem_config(spec.config_path);
  } else if (spec.example == 1) {
    cfg.problem = make_example1();
    cfg.start = Eigen::Vector2d(0.6, 0.8);
    cfg.iters = 21;
  } else if (spec.example == 2) {
    cfg.problem = make_example2_problem(spec.n, spec.gamma);
    cfg.iters = 70;
  } else {
    throw IOError("no problem source: pass --config or --example 1|2");
  }
  if (!spec.shift.empty()) cfg.shift = parse_shift(spec.shift);
  if (spec.iters > 0) cfg.iters = spec.iters;
  if (!spec.mode.empty()) cfg.mode = parse_mode(spec.mode);
  if (!spec.start.empty()) {
    cfg.start = parse_start(spec.start);
    if (cfg.start.size() != cfg.problem.size())
      throw IOError("start vector must have 2n entries");
  }
  return cfg;
}

void print_report(const ValidationReport& report) {
  for (const auto& c : report.conditions)
    std::printf("  %-40s deviation %.3e  %s\n", c.name.c_str(), c.deviation,
                c.ok ? "ok" : "FAIL");
  std::printf("structure validation: %s\n", report.pass ? "pass" : "FAIL");
}

void print_table(const SolveResult& res, std::size_t max_rows = 12) {
  std::printf("%-26s %-26s %-12s %s\n", "Re(lambda)", "Im(lambda)", "residual", "class");
  for (std::size_t i = 0; i < res.ritz.size() && i < max_rows; ++i) {
    const RitzPair& r = res.ritz[i];
    std::printf("%-26.17g %-26.17g %-12.3e %s\n", r.lambda.real(), r.lambda.imag(), r.residual,
                r.symmetry.c_str());
  }
}

double max_imag_class_real_part(const SolveResult& res) {
  double worst = 0.0;
  bool any = false;
  for (const RitzPair& r : res.ritz) {
    const bool imag_class =
        res.mode == SolverMode::Baseline
            ? (r.residual <= 1e-6 && std::abs(r.lambda.real()) <= 1e-3 * std::max(1.0, std::abs(r.lambda)))
            : r.symmetry == "imaginary-pair";
    if (imag_class) {
      worst = std::max(worst, std::abs(r.lambda.real()));
      any = true;
    }
  }
  return any ? worst : std::nan("");
}

/// Forward-error trace against the best converged eigenvalues of the final run.
void emit_convergence(const std::string& path, const SolveResult& res) {
  std::vector<Complex> tracked;
  for (const RitzPair& r : res.ritz) {
    if (r.lambda.imag() < 0.0) continue;
    bool dup = false;
    for (const Complex& t : tracked) dup = dup || std::abs(t - r.lambda) < 1e-8;
    if (!dup) tracked.push_back(r.lambda);
    if (tracked.size() >= 6) break;
  }
  std::vector<std::vector<double>> errors;
  for (Index j = 1; j <= res.m_eff; ++j) {
    const std::vector<Complex> vals =
        res.complex_basis
            ? ritz_values_baseline(res.psi_c, j, res.shift)
            : (res.mode == SolverMode::Baseline
                   ? ritz_values_baseline(res.psi.cast<Complex>(), j, res.shift)
                   : ritz_values_structured(res.psi, j, res.shift));
    std::vector<double> row;
    for (const Complex& t : tracked) {
      double best = std::numeric_limits<double>::infinity();
      for (const Complex& v : vals) best = std::min(best, std::abs(v - t));
      row.push_back(best);
    }
    errors.push_back(std::move(row));
  }
  write_convergence_csv(path, tracked, errors);
}

SolveResult run_one(const ProblemConfig& cfg, SolverMode mode) {
  ShiftedOperator op(cfg.problem, cfg.shift);
  SolverConfig scfg;
  scfg.mode = mode;
  scfg.max_iters = cfg.iters;
  scfg.start = cfg.start;
  return solve(op, scfg);
}

int cmd_solve(const RunSpec& spec) {
  const ProblemConfig cfg = assemble(spec);
  const ValidationReport report = validate_structure(cfg.problem);
  if (spec.validate_only_print || !report.pass) print_report(report);
  if (!report.pass) return kExitValidation;

  const SolveResult res = run_one(cfg, cfg.mode);
  std::printf("mode %s, shift %s, %lld iterations%s, final degree %lld\n",
              to_string(res.mode).c_str(), shift_to_string(res.shift).c_str(),
              static_cast<long long>(res.m_eff), res.breakdown ? " (lucky breakdown)" : "",
              static_cast<long long>(res.degree_history.empty() ? 0 : res.degree_history.back()));
  print_table(res);

  const std::filesystem::path out(spec.out_dir);
  std::filesystem::create_directories(out);
  if (spec.emit_eigen) write_eigenvalue_csv((out / "eigenvalues.csv").string(), res);
  if (spec.emit_convergence) emit_convergence((out / "convergence.csv").string(), res);
  if (spec.emit_degrees) write_degree_csv((out / "degrees.csv").string(), res);
  if (spec.emit_diagnostics) write_diagnostics_csv((out / "diagnostics.csv").string(), res);
  return kExitOk;
}

int cmd_compare(const RunSpec& spec) {
  const ProblemConfig cfg = assemble(spec);
  const ValidationReport report = validate_structure(cfg.problem);
  if (!report.pass) {
    print_report(report);
    return kExitValidation;
  }
  const std::filesystem::path out(spec.out_dir);
  std::filesystem::create_directories(out);
  for (SolverMode mode :
       {SolverMode::Baseline, SolverMode::PlainReorth, SolverMode::JEnforced}) {
    const SolveResult res = run_one(cfg, mode);
    std::printf("== mode %s ==\n", to_string(mode).c_str());
    print_table(res);
    const double worst = max_imag_class_real_part(res);
    if (std::isnan(worst))
      std::printf("max |Re lambda| among imaginary-classified: none classified\n\n");
    else
      std::printf("max |Re lambda| among imaginary-classified: %.3e\n\n", worst);
    if (spec.emit_eigen)
      write_eigenvalue_csv((out / ("eigenvalues_" + to_string(mode) + ".csv")).string(), res);
  }
  return kExitOk;
}

int cmd_validate(const RunSpec& spec) {
  const ProblemConfig cfg = assemble(spec);
  const ValidationReport report = validate_structure(cfg.problem);
  print_report(report);
  return report.pass ? kExitOk : kExitValidation;
}

void add_common(CLI::App* cmd, RunSpec& spec) {
  cmd->add_option("--config", spec.config_path, "problem config file");
  cmd->add_option("--example", spec.example, "builtin example id (1 or 2)");
  cmd->add_option("--n", spec.n, "example 2 grid size");
  cmd->add_option("--gamma", spec.gamma, "example 2 level gamma");
  cmd->add_option("--shift", spec.shift, "shift: 0, r:<x> or i:<x>");
  cmd->add_option("--iters", spec.iters, "iteration count");
  cmd->add_option("--start", spec.start, "start value, comma-separated 2n reals");
  cmd->add_option("--out", spec.out_dir, "output directory for CSVs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structure-preserving delay eigensolver"};
  app.require_subcommand(1);
  RunSpec spec;

  CLI::App* solve_cmd = app.add_subcommand("solve", "run one solver mode");
  add_common(solve_cmd, spec);
  solve_cmd->add_option("--mode", spec.mode, "baseline | plain-r | j-enforced");
  solve_cmd->add_flag("--emit-eigen", spec.emit_eigen, "write eigenvalues.csv");
  solve_cmd->add_flag("--emit-convergence", spec.emit_convergence, "write convergence.csv");
  solve_cmd->add_flag("--emit-degrees", spec.emit_degrees, "write degrees.csv");
  solve_cmd->add_flag("--emit-diagnostics", spec.emit_diagnostics, "write diagnostics.csv");
  solve_cmd->add_flag("--validate", spec.validate_only_print, "print the validation report");

  CLI::App* compare_cmd = app.add_subcommand("compare", "run all three modes side by side");
  add_common(compare_cmd, spec);
  compare_cmd->add_flag("--emit-eigen", spec.emit_eigen, "write eigenvalues_<mode>.csv");

  CLI::App* validate_cmd = app.add_subcommand("validate", "check problem structure");
  add_common(validate_cmd, spec);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitIO;
  }

  try {
    if (app.got_subcommand(solve_cmd)) return cmd_solve(spec);
    if (app.got_subcommand(compare_cmd)) return cmd_compare(spec);
    return cmd_validate(spec);
  } catch (const IOError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIO;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return kExitSolver;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  }
}
