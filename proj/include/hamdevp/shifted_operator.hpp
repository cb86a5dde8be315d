/// Action of the inverted operators on Chebyshev coefficients: the squared
/// shift-invert R_sigma^{-1} = ((H - sigma)(H + sigma))^{-1} used by the
/// structured iteration, and the plain (H - sigma)^{-1} used by the baseline.
/// Functions with an exponential factor are handled through their polynomial
/// carrier part; only boundary solves with M(+-sigma) touch the matrices.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <utility>

#include "hamdevp/chebfun.hpp"
#include "hamdevp/problem.hpp"

namespace hamdevp {

/// Numerical failure inside the solver (near-singular shifted matrix, loss of
/// realness, unresolvable interpolation).
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OperatorOptions {
  double chop_tol = 1e-13;     ///< relative coefficient chop threshold
  Index max_degree = 4096;     ///< adaptive interpolation degree cap
  double realness_tol = 1e-10; ///< relative imaginary residue allowed after R_sigma^{-1}
  double rcond_floor = 1e-14;  ///< reject shifts this close to an eigenvalue
};

/// phi = (H - s)^{-1} (e^{s theta} a(theta)) written as e^{s theta} b(theta):
/// b is the antiderivative of a with the constant term fixed by the boundary
/// solve M(s) b_0 = -a(0) + (H0 - s) w(0) + sum_k (Hpos_k e^{s tau_k} w(tau_k)
/// + Hneg_k e^{-s tau_k} w(-tau_k)), w = b without its constant term.
template <typename Scalar, typename Solve>
ChebFun<Scalar> resolvent_step(const DelayHamiltonianProblem& p, Scalar s,
                               const ChebFun<Scalar>& a, Solve&& solve_mshift) {
  const double tau = p.half_width();
  const MatrixX<Scalar>& ac = a.coeffs();
  const Index Na = a.degree();
  MatrixX<Scalar> b = MatrixX<Scalar>::Zero(ac.rows(), Na + 2);
  b.col(1) += tau * ac.col(0);
  if (Na >= 1) b.col(2) += 0.25 * tau * ac.col(1);
  for (Index l = 2; l <= Na; ++l) {
    b.col(l + 1) += tau / (2.0 * (l + 1)) * ac.col(l);
    b.col(l - 1) -= tau / (2.0 * (l - 1)) * ac.col(l);
  }

  const Index N = b.cols() - 1;
  Eigen::VectorXd T0, Tk;
  cheb_basis(N, 0.0, &T0);
  VectorX<Scalar> rhs = -(ac * T0.head(Na + 1).cast<Scalar>());
  const VectorX<Scalar> w0 = b.rightCols(N) * T0.tail(N).cast<Scalar>();
  rhs += p.H0.cast<Scalar>() * w0 - s * w0;
  for (Index k = 0; k < p.K(); ++k) {
    cheb_basis(N, p.delays[k] / tau, &Tk);
    rhs += std::exp(s * Scalar(p.delays[k])) *
           (p.Hpos[k].cast<Scalar>() * (b.rightCols(N) * Tk.tail(N).cast<Scalar>()));
    cheb_basis(N, -p.delays[k] / tau, &Tk);
    rhs += std::exp(-s * Scalar(p.delays[k])) *
           (p.Hneg[k].cast<Scalar>() * (b.rightCols(N) * Tk.tail(N).cast<Scalar>()));
  }
  b.col(0) = solve_mshift(VectorX<Scalar>(rhs));
  return ChebFun<Scalar>(tau, std::move(b));
}

/// Holds the factored boundary matrices for one shift and applies the inverses.
/// For imaginary sigma a single complex factorization serves both M(sigma) and
/// M(-sigma) = conj(M(sigma)).
class ShiftedOperator {
 public:
  ShiftedOperator(DelayHamiltonianProblem p, Shift shift, OperatorOptions opts = {})
      : p_(std::move(p)), shift_(shift), opts_(opts) {
    p_.check_shapes();
    switch (shift_.kind) {
      case ShiftKind::Zero:
        factor_real(lu_plus_, 0.0);
        break;
      case ShiftKind::Real:
        factor_real(lu_plus_, shift_.value);
        factor_real(lu_minus_, -shift_.value);
        break;
      case ShiftKind::Imaginary:
        factor_cplx(lu_cplx_, shift_.sigma());
        break;
    }
  }

  const DelayHamiltonianProblem& problem() const { return p_; }
  const Shift& shift() const { return shift_; }
  const OperatorOptions& options() const { return opts_; }

  /// R_sigma^{-1} f for a real polynomial f; the result is again real and
  /// polynomial (for imaginary sigma after discarding a checked imaginary
  /// residue).
  ChebFunD apply_rinv(const ChebFunD& f) const {
    switch (shift_.kind) {
      case ShiftKind::Zero:
        return apply_rinv_zero(f);
      case ShiftKind::Real: {
        const double s = shift_.value;
        auto solve_p = [&](const Eigen::VectorXd& r) { return lu_plus_.solve(r); };
        auto solve_m = [&](const Eigen::VectorXd& r) { return lu_minus_.solve(r); };
        return rinv_pipeline<double>(s, f, solve_p, solve_m);
      }
      default: {
        const Complex s = shift_.sigma();
        auto solve_p = [&](const Eigen::VectorXcd& r) { return lu_cplx_.solve(r); };
        auto solve_m = [&](const Eigen::VectorXcd& r) {
          return Eigen::VectorXcd(lu_cplx_.solve(r.conjugate()).conjugate());
        };
        const ChebFunC fc(f.half_width(), f.coeffs().cast<Complex>());
        return require_real(rinv_pipeline<Complex>(s, fc, solve_p, solve_m));
      }
    }
  }

  /// (H - sigma)^{-1} on the polynomial carrier part, real shifts.
  ChebFunD apply_shift_invert(const ChebFunD& f) const {
    if (shift_.kind == ShiftKind::Imaginary)
      throw std::logic_error("apply_shift_invert: imaginary shift needs the complex overload");
    auto solve = [&](const Eigen::VectorXd& r) { return lu_plus_.solve(r); };
    return resolvent_step<double>(p_, shift_.value, f, solve);
  }

  /// (H - sigma)^{-1} on the polynomial carrier part, imaginary shift.
  ChebFunC apply_shift_invert(const ChebFunC& f) const {
    if (shift_.kind != ShiftKind::Imaginary)
      throw std::logic_error("apply_shift_invert: real shift takes the real overload");
    auto solve = [&](const Eigen::VectorXcd& r) { return lu_cplx_.solve(r); };
    return resolvent_step<Complex>(p_, shift_.sigma(), f, solve);
  }

 private:
  void factor_real(Eigen::PartialPivLU<Eigen::MatrixXd>& lu, double s) {
    lu.compute(eval_char_matrix_real(p_, s));
    if (!(lu.rcond() >= opts_.rcond_floor))
      throw SolverError("shifted boundary matrix is numerically singular; move the shift");
  }
  void factor_cplx(Eigen::PartialPivLU<Eigen::MatrixXcd>& lu, Complex s) {
    lu.compute(eval_char_matrix(p_, s));
    if (!(lu.rcond() >= opts_.rcond_floor))
      throw SolverError("shifted boundary matrix is numerically singular; move the shift");
  }

  /// R_0^{-1}: exact double antiderivative band, then the two domain conditions
  /// fix the T_1 and T_0 coefficients through solves with M(0).
  ChebFunD apply_rinv_zero(const ChebFunD& f) const {
    const double tau = p_.half_width(), t2 = tau * tau;
    const Eigen::MatrixXd& Q = f.coeffs();
    const Index Nf = f.degree(), N = Nf + 2;
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(Q.rows(), N + 1);
    for (Index l = 0; l <= Nf; ++l) {
      if (l == 0) {
        V.col(2) += 0.25 * t2 * Q.col(0);
      } else if (l == 1) {
        V.col(3) += t2 / 24.0 * Q.col(1);
      } else if (l == 2) {
        V.col(4) += t2 / 48.0 * Q.col(2);
        V.col(2) -= t2 / 6.0 * Q.col(2);
      } else {
        V.col(l + 2) += t2 / (4.0 * (l + 1) * (l + 2)) * Q.col(l);
        V.col(l) -= t2 / (2.0 * (l + 1) * (l - 1)) * Q.col(l);
        V.col(l - 2) += t2 / (4.0 * (l - 1) * (l - 2)) * Q.col(l);
      }
    }

    Eigen::VectorXd T0, dT0, ddT0, Tk, dTk;
    cheb_basis(N, 0.0, &T0, &dT0, &ddT0);
    auto tail = [&](Index from) { return V.middleCols(from, N + 1 - from); };
    // phi'' in domain: M(0) v_1 = sum_{l>=2} (H0 T_l'(0) + delay terms - T_l''(0)/tau) v_l
    Eigen::VectorXd rhs = p_.H0 * (tail(2) * dT0.tail(N - 1)) - tail(2) * ddT0.tail(N - 1) / tau;
    for (Index k = 0; k < p_.K(); ++k) {
      cheb_basis(N, p_.delays[k] / tau, &Tk, &dTk);
      rhs += p_.Hpos[k] * (tail(2) * dTk.tail(N - 1));
      cheb_basis(N, -p_.delays[k] / tau, &Tk, &dTk);
      rhs += p_.Hneg[k] * (tail(2) * dTk.tail(N - 1));
    }
    V.col(1) = lu_plus_.solve(rhs);
    // phi in domain: M(0) v_0 = sum_{l>=1} (H0 T_l(0) + delay terms - T_l'(0)/tau) v_l
    rhs = p_.H0 * (tail(1) * T0.tail(N)) - tail(1) * dT0.tail(N) / tau;
    for (Index k = 0; k < p_.K(); ++k) {
      cheb_basis(N, p_.delays[k] / tau, &Tk);
      rhs += p_.Hpos[k] * (tail(1) * Tk.tail(N));
      cheb_basis(N, -p_.delays[k] / tau, &Tk);
      rhs += p_.Hneg[k] * (tail(1) * Tk.tail(N));
    }
    V.col(0) = lu_plus_.solve(rhs);
    return ChebFunD(tau, std::move(V));
  }

  /// Nonzero sigma in five steps: move the carrier onto the polynomial side by
  /// interpolation, one resolvent step per factor of R_sigma, carrier removed
  /// at the end.
  template <typename Scalar, typename SolveP, typename SolveM>
  ChebFun<Scalar> rinv_pipeline(Scalar sigma, const ChebFun<Scalar>& f, SolveP&& solve_p,
                                SolveM&& solve_m) const {
    auto weighted = [&](const ChebFun<Scalar>& g, Scalar w) {
      auto sample = [&](const Eigen::VectorXd& pts) {
        MatrixX<Scalar> vals = g.eval_many(pts);
        for (Index j = 0; j < pts.size(); ++j) vals.col(j) *= std::exp(w * Scalar(pts[j]));
        return vals;
      };
      try {
        return interpolate<Scalar>(sample, f.half_width(), opts_.chop_tol, opts_.max_degree);
      } catch (const InterpolationError& e) {
        throw SolverError(e.what());
      }
    };
    const ChebFun<Scalar> chi = weighted(f, -sigma);
    const ChebFun<Scalar> xi = resolvent_step<Scalar>(p_, sigma, chi, solve_p);
    const ChebFun<Scalar> zeta = weighted(xi, 2.0 * sigma);
    const ChebFun<Scalar> ups = resolvent_step<Scalar>(p_, -sigma, zeta, solve_m);
    return weighted(ups, -sigma);
  }

  ChebFunD require_real(const ChebFunC& g) const {
    const double scale = std::max(1.0, g.max_coeff());
    const double residue = g.coeffs().imag().lpNorm<Eigen::Infinity>();
    if (residue > opts_.realness_tol * scale)
      throw SolverError("imaginary-shift result lost realness (relative residue " +
                        std::to_string(residue / scale) + ")");
    return ChebFunD(g.half_width(), g.coeffs().real());
  }

  DelayHamiltonianProblem p_;
  Shift shift_;
  OperatorOptions opts_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_plus_, lu_minus_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_cplx_;
};

}  // namespace hamdevp
