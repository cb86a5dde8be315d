// Acceptance gate: one pass/fail line per criterion, nonzero exit on failure.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <vector>

#include "test_helpers.hpp"

using namespace hamdevp;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("CRITERION %d: %s%s%s\n", criterion, pass ? "PASS" : "FAIL",
              detail.empty() ? "" : " ", detail.c_str());
  if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c);
  return buf;
}

SolveResult run_example1(SolverMode mode, const Shift& shift) {
  SolverConfig cfg;
  cfg.mode = mode;
  cfg.max_iters = 21;
  cfg.start = Eigen::Vector2d(0.6, 0.8);
  return hamdevp::solve(ShiftedOperator(make_example1(), shift), cfg);
}

/// Smallest |Im lambda - omega| among Ritz values with positive imaginary part
/// and exactly zero real part; infinity when the class is absent.
double best_imag_error(const SolveResult& res, double omega, bool* re_zero) {
  double best = std::numeric_limits<double>::infinity();
  for (const RitzPair& r : res.ritz) {
    if (r.lambda.imag() <= 0.0 || std::abs(r.lambda.imag() - omega) > 1e-3) continue;
    if (std::abs(r.lambda.imag() - omega) < best) {
      best = std::abs(r.lambda.imag() - omega);
      if (re_zero) *re_zero = r.lambda.real() == 0.0;
    }
  }
  return best;
}

int count_within(const SolveResult& res, double omega, double tol) {
  int c = 0;
  for (const RitzPair& r : res.ritz)
    if (r.lambda.imag() > 0.0 && std::abs(r.lambda.imag() - omega) <= tol &&
        std::abs(r.lambda.real()) <= tol)
      ++c;
  return c;
}

void criterion1() {
  const auto t0 = Clock::now();
  const SolveResult res = run_example1(SolverMode::JEnforced, Shift::zero());
  const double elapsed = seconds_since(t0);
  bool re1 = false, re2 = false;
  const double e1 = best_imag_error(res, M_PI_2, &re1);
  const double e2 = best_imag_error(res, M_PI, &re2);
  const bool once = count_within(res, M_PI_2, 1e-6) == 1 && count_within(res, M_PI, 1e-6) == 1;
  bool neg = true;
  for (double omega : {M_PI_2, M_PI}) {
    bool found = false;
    for (const RitzPair& r : res.ritz)
      found = found || (std::abs(r.lambda.imag() + omega) <= 1e-6 && r.lambda.real() == 0.0);
    neg = neg && found;
  }
  const bool pass =
      e1 <= 5e-10 && e2 <= 5e-9 && re1 && re2 && once && neg && elapsed < 1.0;
  report(1, pass,
         fmt("sigma=0: |w1-pi/2|=%.2e |w2-pi|=%.2e", e1, e2) +
             fmt(" unique=%g Re-zero=%g", once, re1 && re2) + fmt(" time=%.2fs", elapsed));
}

void criterion2() {
  const auto t0 = Clock::now();
  const SolveResult res = run_example1(SolverMode::JEnforced, Shift::imaginary(3.0 * M_PI / 4.0));
  const double elapsed = seconds_since(t0);
  bool re1 = false, re2 = false;
  const double e1 = best_imag_error(res, M_PI_2, &re1);
  const double e2 = best_imag_error(res, M_PI, &re2);
  const bool pass = e1 <= 5e-9 && e2 <= 5e-9 && re1 && re2 && elapsed < 5.0;
  report(2, pass,
         fmt("sigma=i3pi/4: |w1-pi/2|=%.2e |w2-pi|=%.2e time=%.2fs", e1, e2, elapsed));
}

void criterion3() {
  const SolveResult plain = run_example1(SolverMode::PlainReorth, Shift::zero());
  const SolveResult enforced = run_example1(SolverMode::JEnforced, Shift::zero());
  bool pass = true;
  std::string detail;
  for (double omega : {M_PI_2, M_PI}) {
    const int np = count_within(plain, omega, 1e-6);
    const int ne = count_within(enforced, omega, 1e-6);
    pass = pass && np >= 2 && ne == 1;
    detail += fmt("w=%.4f plain-r=%.0f j-enforced=%.0f  ", omega, np, ne);
  }
  report(3, pass, detail);
}

void criterion4(SolveResult* shifted_run) {
  const DelayHamiltonianProblem rod = make_example2_problem(1000, 0.00018);
  SolverConfig cfg;
  cfg.mode = SolverMode::JEnforced;
  cfg.max_iters = 70;

  auto t0 = Clock::now();
  const SolveResult shifted = hamdevp::solve(ShiftedOperator(rod, Shift::imaginary(4.5)), cfg);
  const double t_shift = seconds_since(t0);
  bool freq_ok = true;
  std::string detail = fmt("n=1000 sigma=i4.5 time=%.1fs ", t_shift);
  for (double omega : {3.790888, 5.571120}) {
    double best = std::numeric_limits<double>::infinity();
    for (const RitzPair& r : shifted.ritz)
      if (r.residual <= 1e-8 && r.lambda.imag() > 0.0)
        best = std::min(best, std::abs(r.lambda - Complex(0.0, omega)));
    freq_ok = freq_ok && best <= 1e-4;
    detail += fmt("|l-i%.6f|=%.2e ", omega, best);
  }

  t0 = Clock::now();
  const SolveResult origin = hamdevp::solve(ShiftedOperator(rod, Shift::zero()), cfg);
  const double t_origin = seconds_since(t0);
  int pairs = 0;
  for (const RitzPair& r : origin.ritz)
    if (r.residual <= 1e-8 && r.lambda.imag() > 0.0) ++pairs;
  detail += fmt("sigma=0 pairs(res<=1e-8)=%.0f time=%.1fs", pairs, t_origin);

  const bool pass = freq_ok && pairs >= 6 && t_shift < 120.0 && t_origin < 120.0;
  report(4, pass, detail);
  *shifted_run = shifted;
}

void criterion5() {
  bool pass = true;
  double worst = 0.0;
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::mt19937 rng(900 + trial);
    const DelayHamiltonianProblem p = testutil::zero_delay_problem(rng, 5);
    const Eigen::EigenSolver<Eigen::MatrixXd> es(p.H0);
    for (const Shift& sh : {Shift::zero(), Shift::imaginary(0.7)}) {
      SolverConfig cfg;
      cfg.mode = SolverMode::JEnforced;
      cfg.max_iters = 12;
      const SolveResult res = hamdevp::solve(ShiftedOperator(p, sh), cfg);
      for (const RitzPair& r : res.ritz) {
        if (r.residual > 1e-9) continue;
        double best = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < es.eigenvalues().size(); ++i)
          best = std::min(best, std::abs(r.lambda - es.eigenvalues()[i]));
        const double rel = best / std::max(1.0, std::abs(r.lambda));
        worst = std::max(worst, rel);
        pass = pass && rel <= 1e-8;
        ++checked;
      }
    }
  }
  pass = pass && checked >= 20;
  report(5, pass, fmt("checked=%.0f worst relative match=%.2e", checked, worst));
}

void criterion6() {
  bool pass = true;
  std::string detail;

  // S_N skew-symmetry and agreement with the direct quadrature form
  {
    std::mt19937 rng(1001);
    double worst_skew = 0.0, worst_agree = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const DelayHamiltonianProblem p = testutil::random_problem(rng, 2, 1 + trial % 2);
      const Index N = 4 + trial % 4;
      const SkewForm sf = SkewForm::build(p, N);
      const ChebFunD f = testutil::random_chebfun<double>(rng, 4, N, p.half_width());
      const ChebFunD g = testutil::random_chebfun<double>(rng, 4, N, p.half_width());
      const Eigen::VectorXd sfv = sf.apply(f.stacked());
      const double scale = std::max(1.0, sfv.norm() * f.stacked().norm());
      worst_skew = std::max(worst_skew, std::abs(f.stacked().dot(sfv)) / scale);
      const double via_s = g.stacked().dot(sfv);
      const double direct = bilinear_j(p, f, g);
      worst_agree = std::max(worst_agree,
                             std::abs(via_s - direct) / std::max(1.0, std::abs(direct)));
    }
    pass = pass && worst_skew <= 1e-13 && worst_agree <= 1e-12;
    detail += fmt("skew=%.1e s-vs-direct=%.1e ", worst_skew, worst_agree);
  }

  // self-adjointness of R^{-1} in both shift regimes
  {
    std::mt19937 rng(1002);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const DelayHamiltonianProblem p = testutil::random_problem(rng, 2, 1);
      const Shift sh = trial % 2 ? Shift::imaginary(0.8) : Shift::zero();
      const ShiftedOperator op(p, sh);
      const ChebFunD f = testutil::random_chebfun<double>(rng, 4, 5, p.half_width());
      const ChebFunD g = testutil::random_chebfun<double>(rng, 4, 5, p.half_width());
      const double lhs = bilinear_j(p, op.apply_rinv(f), g);
      const double rhs = bilinear_j(p, f, op.apply_rinv(g));
      worst = std::max(worst,
                       std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)}));
    }
    pass = pass && worst <= 1e-9;
    detail += fmt("self-adjoint=%.1e ", worst);
  }

  // squared ODE and both domain conditions
  {
    std::mt19937 rng(1003);
    double worst_ode = 0.0, worst_bc = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const DelayHamiltonianProblem p = testutil::random_problem(rng, 2, 1);
      const Shift sh = trial % 2 ? Shift::imaginary(0.6) : Shift::zero();
      const ShiftedOperator op(p, sh);
      const double tau = p.half_width();
      const ChebFunD f = testutil::random_chebfun<double>(rng, 4, 5, tau);
      const ChebFunD phi = op.apply_rinv(f);
      const double scale = std::max(1.0, phi.max_coeff());
      const Eigen::VectorXd pts = Eigen::VectorXd::LinSpaced(65, -tau, tau);
      const Eigen::MatrixXd lhs = phi.derivative().derivative().eval_many(pts) -
                                  sh.sigma_squared() * phi.eval_many(pts);
      worst_ode = std::max(worst_ode, (lhs - f.eval_many(pts)).lpNorm<Eigen::Infinity>() /
                                          std::max(1.0, f.max_coeff()));
      const ChebFunD dphi = phi.derivative();
      for (const ChebFunD* fn : {&phi, &dphi}) {
        Eigen::VectorXd r = fn->derivative().eval(0.0) - p.H0 * fn->eval(0.0);
        for (Index k = 0; k < p.K(); ++k) {
          r -= p.Hneg[k] * fn->eval(-p.delays[k]);
          r -= p.Hpos[k] * fn->eval(p.delays[k]);
        }
        worst_bc = std::max(worst_bc, r.lpNorm<Eigen::Infinity>() / scale);
      }
    }
    pass = pass && worst_ode <= 1e-9 && worst_bc <= 1e-9;
    detail += fmt("ode=%.1e bc=%.1e ", worst_ode, worst_bc);
  }

  // J-neutrality through full enforced runs, and exact multiset closure
  {
    std::mt19937 rng(1004);
    double worst_neutral = 0.0;
    bool closed = true;
    for (int trial = 0; trial < 100; ++trial) {
      const DelayHamiltonianProblem p = testutil::random_problem(rng, 2, 1);
      const Shift sh = trial % 2 ? Shift::imaginary(0.5) : Shift::zero();
      SolverConfig cfg;
      cfg.mode = trial % 4 < 2 ? SolverMode::JEnforced : SolverMode::PlainReorth;
      cfg.max_iters = 8;
      SolveResult res;
      try {
        res = hamdevp::solve(ShiftedOperator(p, sh), cfg);
      } catch (const SolverError&) {
        continue;  // shift collided with an eigenvalue of the random problem
      }
      for (double v : res.neutrality_history) worst_neutral = std::max(worst_neutral, v);
      for (const RitzPair& r : res.ritz) {
        auto present = [&](Complex w) {
          for (const RitzPair& q : res.ritz)
            if (q.lambda.real() == w.real() && q.lambda.imag() == w.imag()) return true;
          return false;
        };
        closed = closed && present(-r.lambda) && present(std::conj(r.lambda));
      }
    }
    pass = pass && worst_neutral <= 1e-12 && closed;
    detail += fmt("neutrality=%.1e closure=%g", worst_neutral, closed);
  }

  report(6, pass, detail);
}

void criterion7(const SolveResult& shifted_run) {
  const std::string path = "acceptance_degrees.csv";
  write_degree_csv(path, shifted_run);
  std::ifstream in(path);
  int rows = 0;
  std::string line;
  std::getline(in, line);
  const bool header_ok = line == "iteration,degree";
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  const Index final_degree =
      shifted_run.degree_history.empty() ? -1 : shifted_run.degree_history.back();
  const bool pass = header_ok && rows == static_cast<int>(shifted_run.degree_history.size()) &&
                    final_degree >= 0 && final_degree <= 400;
  report(7, pass, fmt("rows=%.0f final degree=%.0f (cap 400)", rows, final_degree));
}

}  // namespace

int main() {
  try {
    criterion1();
    criterion2();
    criterion3();
    SolveResult shifted_rod;
    criterion4(&shifted_rod);
    criterion5();
    criterion6();
    criterion7(shifted_rod);
  } catch (const std::exception& e) {
    std::printf("ACCEPTANCE ABORTED: %s\n", e.what());
    return 1;
  }
  return g_failures == 0 ? 0 : 1;
}
