/// Krylov iteration on the function side: growing Chebyshev-coefficient basis,
/// optional enforcement of neutrality with respect to the skew form, and Ritz
/// extraction with the exact eigenvalue symmetry of the Hamiltonian problem.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "hamdevp/chebfun.hpp"
#include "hamdevp/problem.hpp"
#include "hamdevp/shifted_operator.hpp"
#include "hamdevp/skew_form.hpp"

namespace hamdevp {

enum class SolverMode {
  Baseline,    ///< plain shift-invert (H - sigma)^{-1}, no structure
  PlainReorth, ///< squared operator R_sigma^{-1}, reorthogonalized basis
  JEnforced    ///< PlainReorth plus neutrality against the skew form
};

inline std::string to_string(SolverMode m) {
  switch (m) {
    case SolverMode::Baseline: return "baseline";
    case SolverMode::PlainReorth: return "plain-r";
    default: return "j-enforced";
  }
}

struct SolverConfig {
  SolverMode mode = SolverMode::JEnforced;
  Index max_iters = 30;
  Eigen::VectorXd start;        ///< value of the constant start function; empty = ones
  double breakdown_tol = 1e-12; ///< relative happy-breakdown threshold
  double real_mu_tol = 1e-10;   ///< |Im mu| below this (times ||Psi||) is treated as real
  double sproj_threshold = 1e-12; ///< rank threshold of the skew-form Gram solve
  bool diagnostics = true;      ///< record per-iteration orthogonality/neutrality
};

struct RitzPair {
  Complex lambda;
  Complex mu;                   ///< transformed Ritz value it came from
  double residual = std::numeric_limits<double>::infinity();
  Eigen::VectorXcd vec;         ///< eigenvector approximation, unit norm
  std::string symmetry;         ///< imaginary-pair | real-pair | quadruple | zero | none
};

struct SolveResult {
  SolverMode mode = SolverMode::JEnforced;
  Shift shift;
  std::vector<RitzPair> ritz;   ///< sorted by residual, then distance to the shift
  Eigen::MatrixXd basis;        ///< stacked coefficients, real modes
  Eigen::MatrixXd psi;
  Eigen::MatrixXcd basis_c;     ///< baseline with imaginary shift
  Eigen::MatrixXcd psi_c;
  bool complex_basis = false;
  double half_width = 1.0;
  Index dim = 0;
  Index m_eff = 0;              ///< completed iterations (columns of psi in use)
  bool breakdown = false;
  std::vector<Index> degree_history;      ///< representation degree after each iteration
  std::vector<double> ortho_history;      ///< max |Q^H Q - I| after each iteration
  std::vector<double> neutrality_history; ///< scaled max |Q^T S Q| (j-enforced only)
};

namespace detail {

inline double safe_residual(const DelayHamiltonianProblem& p, Complex lambda,
                            const Eigen::VectorXcd& v) {
  const double inf = std::numeric_limits<double>::infinity();
  if (!(v.norm() > 0.0) || !std::isfinite(lambda.real()) || !std::isfinite(lambda.imag()))
    return inf;
  if (std::abs(lambda.real()) * p.half_width() > 500.0) return inf;
  const double r = nlevp_residual(p, lambda, v);
  return std::isfinite(r) ? r : inf;
}

/// Rotates a complex vector by the phase of its largest entry; for eigenvectors
/// of a (numerically) real eigenvalue this exposes the real representative.
inline Eigen::VectorXcd derotated(const Eigen::VectorXcd& y) {
  Index imax = 0;
  y.cwiseAbs().maxCoeff(&imax);
  const Complex ph = y[imax] / std::abs(y[imax]);
  return y / ph;
}

inline Eigen::VectorXcd unitized(const Eigen::VectorXcd& v) {
  const double n = v.norm();
  return n > 0.0 ? Eigen::VectorXcd(v / n) : v;
}

inline void sort_ritz(std::vector<RitzPair>& ritz, Complex sigma) {
  std::stable_sort(ritz.begin(), ritz.end(), [sigma](const RitzPair& a, const RitzPair& b) {
    if (a.residual != b.residual) return a.residual < b.residual;
    return std::abs(a.lambda - sigma) < std::abs(b.lambda - sigma);
  });
}

}  // namespace detail

/// Back-transformed Ritz values only (no vectors, no residuals); cheap enough
/// to call for every leading block when tracing convergence.
inline std::vector<Complex> ritz_values_structured(const Eigen::MatrixXd& psi, Index m,
                                                   const Shift& shift,
                                                   double real_mu_tol = 1e-10) {
  std::vector<Complex> out;
  if (m < 1) return out;
  const Eigen::MatrixXd H = psi.topLeftCorner(m, m);
  const double scale = std::max(H.norm(), std::numeric_limits<double>::min());
  Eigen::EigenSolver<Eigen::MatrixXd> es(H, false);
  for (Index i = 0; i < m; ++i) {
    const Complex mu = es.eigenvalues()[i];
    if (std::abs(mu) <= 1e-250) continue;
    if (std::abs(mu.imag()) <= real_mu_tol * scale) {
      const double t = 1.0 / mu.real() + shift.sigma_squared();
      if (t < 0.0) {
        out.emplace_back(0.0, std::sqrt(-t));
        out.emplace_back(0.0, -std::sqrt(-t));
      } else {
        out.emplace_back(std::sqrt(t), 0.0);
        out.emplace_back(-std::sqrt(t), 0.0);
      }
    } else if (mu.imag() > 0.0) {
      const Complex lambda = std::sqrt(1.0 / mu + shift.sigma_squared());
      out.push_back(lambda);
      out.push_back(-lambda);
      out.push_back(std::conj(lambda));
      out.push_back(-std::conj(lambda));
    }
  }
  return out;
}

inline std::vector<Complex> ritz_values_baseline(const Eigen::MatrixXcd& psi, Index m,
                                                 const Shift& shift) {
  std::vector<Complex> out;
  if (m < 1) return out;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(psi.topLeftCorner(m, m), false);
  for (Index i = 0; i < m; ++i) {
    const Complex mu = es.eigenvalues()[i];
    if (std::abs(mu) <= 1e-250) continue;
    out.push_back(shift.sigma() + 1.0 / mu);
  }
  return out;
}

/// Ritz extraction for the squared-operator modes. mu solves R_sigma^{-1}, so
/// lambda^2 = 1/mu + sigma^2; the Ritz function mixes the +-lambda carriers and
/// the two branch eigenvectors are split through its value and slope at zero:
/// v(+-lambda) = (y(0) +- y'(0)/lambda) / 2. Real mu yields a +- pair that is
/// exactly imaginary or exactly real; complex mu yields the closed quadruple.
inline std::vector<RitzPair> extract_ritz_structured(const DelayHamiltonianProblem& p,
                                                     const Shift& shift,
                                                     const Eigen::MatrixXd& basis,
                                                     const Eigen::MatrixXd& psi, Index m,
                                                     double real_mu_tol = 1e-10) {
  std::vector<RitzPair> out;
  if (m < 1) return out;
  const double tau = p.half_width();
  const Index d = p.size();
  const Eigen::MatrixXd H = psi.topLeftCorner(m, m);
  Eigen::EigenSolver<Eigen::MatrixXd> es(H);
  const double scale = std::max(H.norm(), std::numeric_limits<double>::min());

  for (Index i = 0; i < m; ++i) {
    const Complex mu = es.eigenvalues()[i];
    if (std::abs(mu) <= 1e-250) continue;
    const bool treat_real = std::abs(mu.imag()) <= real_mu_tol * scale;
    if (!treat_real && mu.imag() < 0.0) continue;  // partner handled with its conjugate

    const Eigen::VectorXcd yc = detail::derotated(es.eigenvectors().col(i));
    // Ritz function and its slope; complex coefficients combined from two real products
    const Eigen::VectorXd br = basis.leftCols(m) * yc.real().eval();
    const Eigen::VectorXd bi = basis.leftCols(m) * yc.imag().eval();
    const ChebFunD fr = ChebFunD::FromStacked(tau, d, br);
    const ChebFunD fi = ChebFunD::FromStacked(tau, d, bi);
    const Eigen::VectorXcd y0 = fr.eval(0.0) + Complex(0, 1) * fi.eval(0.0);
    const Eigen::VectorXcd yp0 =
        fr.derivative().eval(0.0) + Complex(0, 1) * fi.derivative().eval(0.0);

    auto push = [&](Complex lambda, Complex mu_tag, const Eigen::VectorXcd& v,
                    const char* cls) {
      const Eigen::VectorXcd u = detail::unitized(v);
      out.push_back({lambda, mu_tag, detail::safe_residual(p, lambda, u), u, cls});
    };

    if (treat_real) {
      const double t = 1.0 / mu.real() + shift.sigma_squared();
      if (t < 0.0) {
        const Complex lambda(0.0, std::sqrt(-t));
        const Eigen::VectorXcd v = detail::unitized(0.5 * (y0 + yp0 / lambda));
        push(lambda, mu.real(), v, "imaginary-pair");
        push(-lambda, mu.real(), v.conjugate(), "imaginary-pair");
      } else if (t > 0.0) {
        const double lam = std::sqrt(t);
        push(Complex(lam, 0.0), mu.real(), 0.5 * (y0 + yp0 / lam), "real-pair");
        push(Complex(-lam, 0.0), mu.real(), 0.5 * (y0 - yp0 / lam), "real-pair");
      } else {
        push(Complex(0.0, 0.0), mu.real(), y0, "zero");
      }
    } else {
      const Complex t = 1.0 / mu + shift.sigma_squared();
      const Complex lambda = std::sqrt(t);
      const Eigen::VectorXcd vp = detail::unitized(0.5 * (y0 + yp0 / lambda));
      const Eigen::VectorXcd vm = detail::unitized(0.5 * (y0 - yp0 / lambda));
      push(lambda, mu, vp, "quadruple");
      push(-lambda, mu, vm, "quadruple");
      push(std::conj(lambda), std::conj(mu), vp.conjugate(), "quadruple");
      push(-std::conj(lambda), std::conj(mu), vm.conjugate(), "quadruple");
    }
  }
  detail::sort_ritz(out, shift.sigma());
  return out;
}

/// Ritz extraction for the baseline: lambda = sigma + 1/mu, eigenvector taken as
/// the Ritz function value at zero (the carrier e^{sigma theta} is one there).
inline std::vector<RitzPair> extract_ritz_baseline(const DelayHamiltonianProblem& p,
                                                   const Shift& shift,
                                                   const Eigen::MatrixXcd& basis,
                                                   const Eigen::MatrixXcd& psi, Index m) {
  std::vector<RitzPair> out;
  if (m < 1) return out;
  const double tau = p.half_width();
  const Index d = p.size();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(psi.topLeftCorner(m, m));
  for (Index i = 0; i < m; ++i) {
    const Complex mu = es.eigenvalues()[i];
    if (std::abs(mu) <= 1e-250) continue;
    const Complex lambda = shift.sigma() + 1.0 / mu;
    const Eigen::VectorXcd bc = basis.leftCols(m) * es.eigenvectors().col(i);
    const Eigen::VectorXcd v = detail::unitized(ChebFunC::FromStacked(tau, d, bc).eval(0.0));
    out.push_back({lambda, mu, detail::safe_residual(p, lambda, v), v, "none"});
  }
  detail::sort_ritz(out, shift.sigma());
  return out;
}

namespace detail {

/// One Krylov run over a scalar type. Apply maps a ChebFun to a ChebFun; Extend
/// is notified when the representation degree grows or a column is added; SProj
/// applies the skew-form projection in place; Diag records per-iteration data.
template <typename Scalar, typename Apply, typename Extend, typename SProj, typename Diag>
void krylov_loop(MatrixX<Scalar>& Q, MatrixX<Scalar>& psi, SolveResult& res,
                 const SolverConfig& cfg, double tau, Index d, bool enforce, Apply&& apply,
                 Extend&& extend, SProj&& sproj, Diag&& diag, Index& deg) {
  const Index m = cfg.max_iters;
  for (Index j = 0; j < m; ++j) {
    const ChebFun<Scalar> qfun =
        ChebFun<Scalar>::FromStacked(tau, d, VectorX<Scalar>(Q.col(j).head(d * (deg + 1))));
    const ChebFun<Scalar> w = apply(qfun);
    if (w.degree() > deg) {
      extend(w.degree(), j);
      deg = w.degree();
    }
    VectorX<Scalar> wv = w.padded(deg).stacked();
    const double w0norm = wv.norm();
    VectorX<Scalar> h = VectorX<Scalar>::Zero(j + 1);
    // repeated passes: two are not enough once convergence makes the projected
    // norm collapse (removed components re-enter scaled by w0norm / beta)
    for (int pass = 0; pass < 6; ++pass) {
      const VectorX<Scalar> c = Q.leftCols(j + 1).adjoint() * wv;
      wv.noalias() -= Q.leftCols(j + 1) * c;
      h += c;
      double removed = c.norm();
      if (enforce) removed = std::hypot(removed, sproj(wv, j));
      if (pass >= 1 && removed <= 1e-14 * std::max(wv.norm(), 1e-300)) break;
    }
    const double beta = wv.norm();
    psi.col(j).head(j + 1) = h;
    psi(j + 1, j) = Scalar(beta);
    res.degree_history.push_back(deg);
    res.m_eff = j + 1;
    if (beta <= cfg.breakdown_tol * std::max(w0norm, 1e-300)) {
      res.breakdown = true;
      return;
    }
    Q.col(j + 1) = wv / beta;
    extend(deg, j + 1);  // degree unchanged: refresh hook for per-column caches
    if (cfg.diagnostics) diag(j + 2);
  }
}

}  // namespace detail

/// Runs the configured iteration and extracts Ritz approximations.
inline SolveResult solve(const ShiftedOperator& op, const SolverConfig& cfg) {
  const DelayHamiltonianProblem& p = op.problem();
  const double tau = p.half_width();
  const Index d = p.size(), m = cfg.max_iters;
  if (m < 1) throw std::invalid_argument("solve: need at least one iteration");
  Eigen::VectorXd start = cfg.start.size() ? cfg.start : Eigen::VectorXd::Ones(d);
  if (start.size() != d) throw std::invalid_argument("solve: start vector has wrong length");
  if (!(start.norm() > 0.0)) throw std::invalid_argument("solve: start vector is zero");

  SolveResult res;
  res.mode = cfg.mode;
  res.shift = op.shift();
  res.half_width = tau;
  res.dim = d;

  const bool baseline = cfg.mode == SolverMode::Baseline;
  const bool enforce = cfg.mode == SolverMode::JEnforced;

  if (baseline && op.shift().kind == ShiftKind::Imaginary) {
    res.complex_basis = true;
    Index deg = 0;
    Eigen::MatrixXcd Q = Eigen::MatrixXcd::Zero(d, m + 1);
    Q.col(0) = (start / start.norm()).cast<Complex>();
    res.psi_c = Eigen::MatrixXcd::Zero(m + 1, m);
    auto apply = [&](const ChebFunC& f) { return op.apply_shift_invert(f); };
    auto extend = [&](Index newdeg, Index) {
      if (newdeg <= deg) return;
      const Index oldrows = Q.rows();
      Q.conservativeResize(d * (newdeg + 1), Eigen::NoChange);
      Q.bottomRows(Q.rows() - oldrows).setZero();
    };
    auto noproj = [](Eigen::VectorXcd&, Index) { return 0.0; };
    auto diag = [&](Index cols) {
      Eigen::MatrixXcd G = Q.leftCols(cols).adjoint() * Q.leftCols(cols);
      G.diagonal().array() -= 1.0;
      res.ortho_history.push_back(G.cwiseAbs().maxCoeff());
    };
    detail::krylov_loop<Complex>(Q, res.psi_c, res, cfg, tau, d, false, apply, extend, noproj,
                                 diag, deg);
    res.basis_c = std::move(Q);
    res.ritz = extract_ritz_baseline(p, op.shift(), res.basis_c, res.psi_c, res.m_eff);
    return res;
  }

  Index deg = 0;
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(d, m + 1);
  Q.col(0) = start / start.norm();
  res.psi = Eigen::MatrixXd::Zero(m + 1, m);
  SkewForm sf;
  Eigen::MatrixXd SQ;
  if (enforce) {
    sf = SkewForm::build(p, 0);
    SQ = Eigen::MatrixXd::Zero(d, m + 1);
    SQ.col(0) = sf.apply(Q.col(0));
  }

  auto apply = [&](const ChebFunD& f) {
    return baseline ? op.apply_shift_invert(f) : op.apply_rinv(f);
  };
  auto extend = [&](Index newdeg, Index jcols) {
    if (newdeg <= deg) {
      // refresh hook: fill the skew-form column for a newly added basis vector
      if (enforce && jcols < SQ.cols() && SQ.col(jcols).isZero(0.0) && !Q.col(jcols).isZero(0.0))
        SQ.col(jcols) = sf.apply(Q.col(jcols));
      return;
    }
    const SkewForm sf_new = enforce ? sf.extended(newdeg) : SkewForm();
    const Index oldrows = Q.rows(), newrows = d * (newdeg + 1);
    Q.conservativeResize(newrows, Eigen::NoChange);
    Q.bottomRows(newrows - oldrows).setZero();
    if (enforce) {
      SQ.conservativeResize(newrows, Eigen::NoChange);
      SQ.bottomRows(newrows - oldrows).setZero();
      for (Index i = 0; i <= jcols; ++i) {
        const Eigen::Map<const Eigen::MatrixXd> F(Q.col(i).data(), d, newdeg + 1);
        Eigen::MatrixXd tail = sf_new.apply_block_tail(F, deg + 1);
        SQ.col(i).tail(newrows - oldrows) =
            Eigen::Map<const Eigen::VectorXd>(tail.data(), tail.size());
      }
      sf = sf_new;
    }
  };
  // Orthonormal basis Z of the Q-deflated range of SQ, refreshed per iteration.
  // Projecting against Z instead of solving the Gram system (SQ)^T SQ avoids
  // squaring the conditioning of SQ, which otherwise caps the achievable
  // neutrality near sqrt(eps).
  Eigen::MatrixXd Z;
  Index z_iter = -1;
  auto sproj = [&](Eigen::VectorXd& wv, Index j) {
    if (z_iter != j || Z.rows() != Q.rows()) {
      Eigen::MatrixXd M = SQ.leftCols(j + 1);
      for (int pass = 0; pass < 2; ++pass)
        M -= Q.leftCols(j + 1) * (Q.leftCols(j + 1).transpose() * M).eval();
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
      qr.setThreshold(cfg.sproj_threshold);
      const Index r = qr.rank();
      Z = qr.householderQ() * Eigen::MatrixXd::Identity(M.rows(), r);
      z_iter = j;
    }
    const Eigen::VectorXd delta = Z * (Z.transpose() * wv).eval();
    wv -= delta;
    return delta.norm();
  };
  auto diag = [&](Index cols) {
    Eigen::MatrixXd G = Q.leftCols(cols).transpose() * Q.leftCols(cols);
    G.diagonal().array() -= 1.0;
    res.ortho_history.push_back(G.cwiseAbs().maxCoeff());
    if (enforce) {
      const double sscale =
          std::max(1.0, SQ.leftCols(cols).cwiseAbs().maxCoeff());
      const double nmax =
          (Q.leftCols(cols).transpose() * SQ.leftCols(cols)).cwiseAbs().maxCoeff();
      res.neutrality_history.push_back(nmax / sscale);
    }
  };
  detail::krylov_loop<double>(Q, res.psi, res, cfg, tau, d, enforce, apply, extend, sproj, diag,
                              deg);
  res.basis = std::move(Q);
  if (baseline) {
    res.ritz = extract_ritz_baseline(p, op.shift(), res.basis.cast<Complex>(),
                                     res.psi.cast<Complex>(), res.m_eff);
  } else {
    res.ritz =
        extract_ritz_structured(p, op.shift(), res.basis, res.psi, res.m_eff, cfg.real_mu_tol);
  }
  return res;
}

}  // namespace hamdevp
