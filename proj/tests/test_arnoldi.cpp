#include <doctest.h>

#include <random>

#include "test_helpers.hpp"

using namespace hamdevp;

namespace {

/// Count Ritz values with Im > 0 within tol of target, residual below rtol.
int count_near(const std::vector<RitzPair>& ritz, Complex target, double tol, double rtol) {
  int c = 0;
  for (const RitzPair& r : ritz)
    if (r.lambda.imag() > 0.0 && std::abs(r.lambda - target) <= tol && r.residual <= rtol) ++c;
  return c;
}

bool contains_exact(const std::vector<RitzPair>& ritz, Complex lam) {
  for (const RitzPair& r : ritz)
    if (r.lambda.real() == lam.real() && r.lambda.imag() == lam.imag()) return true;
  return false;
}

}  // namespace

TEST_CASE("back-transformation algebra on crafted Psi blocks") {
  // mu = -4/pi^2 at sigma = 0 gives lambda = +-i pi/2 with exactly zero real part
  Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(2, 1);
  psi(0, 0) = -4.0 / (M_PI * M_PI);
  std::vector<Complex> vals = ritz_values_structured(psi, 1, Shift::zero());
  REQUIRE(vals.size() == 2);
  CHECK(vals[0].real() == 0.0);
  CHECK(vals[1].real() == 0.0);
  CHECK(vals[0].imag() == doctest::Approx(M_PI_2).epsilon(1e-15));
  CHECK(vals[1].imag() == -vals[0].imag());

  // mu = 1 at sigma = 0 gives the exactly real pair +-1
  psi(0, 0) = 1.0;
  vals = ritz_values_structured(psi, 1, Shift::zero());
  REQUIRE(vals.size() == 2);
  CHECK(vals[0] == Complex(1.0, 0.0));
  CHECK(vals[1] == Complex(-1.0, 0.0));

  // complex-conjugate mu pair: the four back-transformed values close exactly
  Eigen::MatrixXd rot(3, 2);
  rot.setZero();
  rot.topLeftCorner(2, 2) << 0.4, -0.3, 0.3, 0.4;
  vals = ritz_values_structured(rot, 2, Shift::imaginary(0.5));
  REQUIRE(vals.size() == 4);
  for (const Complex& v : vals) {
    auto present = [&](Complex w) {
      for (const Complex& u : vals)
        if (u.real() == w.real() && u.imag() == w.imag()) return true;
      return false;
    };
    CHECK(present(-v));
    CHECK(present(std::conj(v)));
  }

  // baseline back-transformation is sigma + 1/mu
  Eigen::MatrixXcd psic = Eigen::MatrixXcd::Zero(2, 1);
  psic(0, 0) = Complex(0.0, -2.0);
  const std::vector<Complex> bl = ritz_values_baseline(psic, 1, Shift::imaginary(1.0));
  REQUIRE(bl.size() == 1);
  CHECK(bl[0] == Complex(0.0, 1.0) + 1.0 / Complex(0.0, -2.0));
}

TEST_CASE("zero-delay problems reproduce the dense spectrum") {
  std::mt19937 rng(601);
  for (const Shift& sh : {Shift::zero(), Shift::imaginary(0.7)}) {
    const DelayHamiltonianProblem p = testutil::zero_delay_problem(rng, 5);
    const Eigen::EigenSolver<Eigen::MatrixXd> es(p.H0);
    const ShiftedOperator op(p, sh);
    SolverConfig cfg;
    cfg.mode = SolverMode::JEnforced;
    cfg.max_iters = 12;
    const SolveResult res = hamdevp::solve(op, cfg);
    CHECK_FALSE(res.complex_basis);
    CHECK(res.psi_c.size() == 0);

    int matched = 0;
    for (const RitzPair& r : res.ritz) {
      if (r.residual > 1e-9) continue;
      double best = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < es.eigenvalues().size(); ++i)
        best = std::min(best, std::abs(r.lambda - es.eigenvalues()[i]));
      CHECK(best <= 1e-8 * std::max(1.0, std::abs(r.lambda)));
      ++matched;
    }
    CHECK(matched >= 6);
  }
}

TEST_CASE("Ritz sets close exactly under negation and conjugation") {
  std::mt19937 rng(602);
  const DelayHamiltonianProblem p = testutil::random_problem(rng, 2, 2);
  const ShiftedOperator op(p, Shift::imaginary(0.6));
  SolverConfig cfg;
  cfg.mode = SolverMode::JEnforced;
  cfg.max_iters = 14;
  const SolveResult res = hamdevp::solve(op, cfg);
  CHECK(!res.ritz.empty());
  for (const RitzPair& r : res.ritz) {
    CHECK(contains_exact(res.ritz, -r.lambda));
    CHECK(contains_exact(res.ritz, std::conj(r.lambda)));
  }
}

TEST_CASE("enforced runs keep orthogonality and neutrality at working precision") {
  const DelayHamiltonianProblem ex1 = make_example1();
  const ShiftedOperator op(ex1, Shift::zero());
  SolverConfig cfg;
  cfg.mode = SolverMode::JEnforced;
  cfg.max_iters = 21;
  cfg.start = Eigen::Vector2d(0.6, 0.8);
  const SolveResult res = hamdevp::solve(op, cfg);
  REQUIRE(res.neutrality_history.size() == res.ortho_history.size());
  for (double v : res.neutrality_history) CHECK(v <= 1e-12);
  for (double v : res.ortho_history) CHECK(v <= 1e-12);
  CHECK(res.degree_history.size() == static_cast<std::size_t>(res.m_eff));
}

TEST_CASE("plain reorthogonalized mode duplicates what the enforced mode finds once") {
  const DelayHamiltonianProblem ex1 = make_example1();
  const ShiftedOperator op(ex1, Shift::zero());
  SolverConfig cfg;
  cfg.max_iters = 21;
  cfg.start = Eigen::Vector2d(0.6, 0.8);

  cfg.mode = SolverMode::PlainReorth;
  const SolveResult plain = hamdevp::solve(op, cfg);
  cfg.mode = SolverMode::JEnforced;
  const SolveResult enforced = hamdevp::solve(op, cfg);

  for (double omega : {M_PI_2, M_PI}) {
    CHECK(count_near(plain.ritz, Complex(0.0, omega), 1e-6, 1e-6) >= 2);
    CHECK(count_near(enforced.ritz, Complex(0.0, omega), 1e-6, 1e-6) == 1);
  }
}

TEST_CASE("baseline agrees with the enforced mode on the test problem") {
  const DelayHamiltonianProblem ex1 = make_example1();
  const Shift sh = Shift::imaginary(3.0 * M_PI / 4.0);
  SolverConfig cfg;
  cfg.max_iters = 21;
  cfg.start = Eigen::Vector2d(0.6, 0.8);

  cfg.mode = SolverMode::Baseline;
  const SolveResult base = hamdevp::solve(ShiftedOperator(ex1, sh), cfg);
  CHECK(base.complex_basis);
  CHECK(base.psi.size() == 0);
  cfg.mode = SolverMode::JEnforced;
  const SolveResult enf = hamdevp::solve(ShiftedOperator(ex1, sh), cfg);

  for (double omega : {M_PI_2, M_PI}) {
    double best_b = std::numeric_limits<double>::infinity();
    for (const RitzPair& r : base.ritz)
      if (r.residual <= 1e-8) best_b = std::min(best_b, std::abs(r.lambda - Complex(0, omega)));
    double best_e = std::numeric_limits<double>::infinity();
    for (const RitzPair& r : enf.ritz)
      if (r.residual <= 1e-8) best_e = std::min(best_e, std::abs(r.lambda - Complex(0, omega)));
    CHECK(best_b <= 1e-7);
    CHECK(best_e <= 1e-7);
  }
}

TEST_CASE("solver input validation") {
  const DelayHamiltonianProblem ex1 = make_example1();
  const ShiftedOperator op(ex1, Shift::zero());
  SolverConfig cfg;
  cfg.max_iters = 0;
  CHECK_THROWS_AS(hamdevp::solve(op, cfg), std::invalid_argument);
  cfg.max_iters = 5;
  cfg.start = Eigen::Vector3d(1.0, 0.0, 0.0);
  CHECK_THROWS_AS(hamdevp::solve(op, cfg), std::invalid_argument);
  cfg.start = Eigen::Vector2d(0.0, 0.0);
  CHECK_THROWS_AS(hamdevp::solve(op, cfg), std::invalid_argument);
}
