/// Hamiltonian-structured delay eigenvalue problems: the characteristic matrix
/// M(lambda) = lambda*I - H0 - sum_k (Hneg_k e^{-lambda tau_k} + Hpos_k e^{lambda tau_k}),
/// structure validation, residual normalization, the gamma-level transfer-matrix
/// problem builder and the two builtin example problems.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "hamdevp/chebfun.hpp"

namespace hamdevp {

/// The skew-symmetric pairing matrix [[0, I],[-I, 0]]; products are realized as
/// block swaps, never as dense multiplications.
struct StructuredJ {
  Index n = 0;

  /// J * X for a matrix (or vector) with 2n rows.
  template <typename Derived>
  MatrixX<typename Derived::Scalar> apply(const Eigen::MatrixBase<Derived>& x) const {
    MatrixX<typename Derived::Scalar> out(x.rows(), x.cols());
    out.topRows(n) = x.bottomRows(n);
    out.bottomRows(n) = -x.topRows(n);
    return out;
  }

  /// X * J for a matrix with 2n columns.
  template <typename Derived>
  MatrixX<typename Derived::Scalar> apply_right(const Eigen::MatrixBase<Derived>& x) const {
    MatrixX<typename Derived::Scalar> out(x.rows(), x.cols());
    out.leftCols(n) = -x.rightCols(n);
    out.rightCols(n) = x.leftCols(n);
    return out;
  }
};

struct DelayHamiltonianProblem {
  Index n = 0;                   ///< half-dimension; system size is 2n
  std::vector<double> delays;    ///< strictly increasing positive tau_1 < ... < tau_K
  Eigen::MatrixXd H0;            ///< 2n x 2n
  std::vector<Eigen::MatrixXd> Hpos;  ///< multiplies e^{+lambda tau_k}
  std::vector<Eigen::MatrixXd> Hneg;  ///< multiplies e^{-lambda tau_k}

  Index K() const { return static_cast<Index>(delays.size()); }
  Index size() const { return 2 * n; }
  double half_width() const {
    if (delays.empty()) throw std::logic_error("problem has no delays; no function interval");
    return delays.back();
  }
  StructuredJ J() const { return StructuredJ{n}; }

  /// Dimension consistency only (structure deviations go through validate_structure).
  void check_shapes() const {
    if (n <= 0) throw std::invalid_argument("problem: n must be positive");
    auto check = [&](const Eigen::MatrixXd& m, const std::string& name) {
      if (m.rows() != 2 * n || m.cols() != 2 * n)
        throw std::invalid_argument("problem: " + name + " is not 2n x 2n");
    };
    check(H0, "H0");
    if (Hpos.size() != delays.size() || Hneg.size() != delays.size())
      throw std::invalid_argument("problem: matrix count does not match delay count");
    for (Index k = 0; k < K(); ++k) {
      check(Hpos[k], "Hpos[" + std::to_string(k + 1) + "]");
      check(Hneg[k], "Hneg[" + std::to_string(k + 1) + "]");
    }
    double prev = 0.0;
    for (double tau : delays) {
      if (!(tau > prev)) throw std::invalid_argument("problem: delays must be strictly increasing and positive");
      prev = tau;
    }
  }
};

enum class ShiftKind { Zero, Real, Imaginary };

/// A purely real or purely imaginary shift sigma.
struct Shift {
  ShiftKind kind = ShiftKind::Zero;
  double value = 0.0;  ///< omega for sigma = j*omega, s for sigma = s

  static Shift zero() { return {ShiftKind::Zero, 0.0}; }
  static Shift real(double s) { return s == 0.0 ? zero() : Shift{ShiftKind::Real, s}; }
  static Shift imaginary(double omega) {
    return omega == 0.0 ? zero() : Shift{ShiftKind::Imaginary, omega};
  }

  Complex sigma() const {
    switch (kind) {
      case ShiftKind::Zero: return {0.0, 0.0};
      case ShiftKind::Real: return {value, 0.0};
      default: return {0.0, value};
    }
  }
  /// Signed sigma^2: s^2, -omega^2 or 0.
  double sigma_squared() const {
    return kind == ShiftKind::Imaginary ? -value * value : value * value;
  }
  bool is_zero() const { return kind == ShiftKind::Zero; }
};

struct ValidationReport {
  struct Condition {
    std::string name;
    double deviation;  ///< relative Frobenius deviation
    bool ok;
  };
  bool pass = true;
  std::vector<Condition> conditions;
};

/// Checks (J H0)^T = J H0 and (J Hneg_k)^T = J Hpos_k, Frobenius-normalized.
inline ValidationReport validate_structure(const DelayHamiltonianProblem& p, double tol = 1e-12) {
  p.check_shapes();
  const StructuredJ J = p.J();
  ValidationReport report;
  auto add = [&](const std::string& name, const Eigen::MatrixXd& lhs, const Eigen::MatrixXd& rhs) {
    const double scale = std::max({1.0, lhs.norm(), rhs.norm()});
    const double dev = (lhs - rhs).norm() / scale;
    const bool ok = dev <= tol;
    report.conditions.push_back({name, dev, ok});
    report.pass = report.pass && ok;
  };
  const Eigen::MatrixXd JH0 = J.apply(p.H0);
  add("(J*H0)^T = J*H0", JH0.transpose(), JH0);
  for (Index k = 0; k < p.K(); ++k) {
    add("(J*Hneg[" + std::to_string(k + 1) + "])^T = J*Hpos[" + std::to_string(k + 1) + "]",
        Eigen::MatrixXd(J.apply(p.Hneg[k]).transpose()), J.apply(p.Hpos[k]));
  }
  return report;
}

/// M(lambda) = lambda*I - H0 - sum_k (Hneg_k e^{-lambda tau_k} + Hpos_k e^{lambda tau_k}).
/// Exponents up to |Re(lambda)| * tau_K appear; callers probing far into the
/// right/left half plane own the overflow question.
inline Eigen::MatrixXcd eval_char_matrix(const DelayHamiltonianProblem& p, Complex lambda) {
  Eigen::MatrixXcd m = -p.H0.cast<Complex>();
  m.diagonal().array() += lambda;
  for (Index k = 0; k < p.K(); ++k) {
    m -= std::exp(-lambda * p.delays[k]) * p.Hneg[k].cast<Complex>();
    m -= std::exp(lambda * p.delays[k]) * p.Hpos[k].cast<Complex>();
  }
  return m;
}

/// Real evaluation (lambda on the real axis keeps every term real).
inline Eigen::MatrixXd eval_char_matrix_real(const DelayHamiltonianProblem& p, double lambda) {
  Eigen::MatrixXd m = -p.H0;
  m.diagonal().array() += lambda;
  for (Index k = 0; k < p.K(); ++k) {
    m -= std::exp(-lambda * p.delays[k]) * p.Hneg[k];
    m -= std::exp(lambda * p.delays[k]) * p.Hpos[k];
  }
  return m;
}

/// Backward-error style residual ||M(lambda) v|| / (||v|| * scale(lambda)).
inline double nlevp_residual(const DelayHamiltonianProblem& p, Complex lambda,
                             const Eigen::VectorXcd& v) {
  const double vnorm = v.norm();
  if (vnorm == 0.0) throw std::invalid_argument("nlevp_residual: zero vector");
  double scale = std::abs(lambda) + p.H0.norm();
  for (Index k = 0; k < p.K(); ++k) {
    scale += p.Hpos[k].norm() * std::exp(lambda.real() * p.delays[k]);
    scale += p.Hneg[k].norm() * std::exp(-lambda.real() * p.delays[k]);
  }
  return (eval_char_matrix(p, lambda) * v).norm() / (vnorm * scale);
}

/// gamma-level problem for the transfer matrix of a delay state-space system:
/// T(j*omega) has a singular value equal to gamma iff j*omega is an eigenvalue
/// of the assembled problem. A holds [A_0, A_1, ..., A_K].
inline DelayHamiltonianProblem build_hinf_problem(const std::vector<Eigen::MatrixXd>& A,
                                                  const Eigen::MatrixXd& B,
                                                  const Eigen::MatrixXd& C, double gamma,
                                                  const std::vector<double>& delays) {
  if (gamma <= 0.0) throw std::invalid_argument("build_hinf_problem: gamma must be positive");
  if (A.empty()) throw std::invalid_argument("build_hinf_problem: need at least A_0");
  if (A.size() != delays.size() + 1)
    throw std::invalid_argument("build_hinf_problem: need one delay per A_k, k >= 1");
  const Index n = A[0].rows();
  for (const auto& Ak : A)
    if (Ak.rows() != n || Ak.cols() != n)
      throw std::invalid_argument("build_hinf_problem: state matrices must be square and equal sized");
  if (B.rows() != n || C.cols() != n)
    throw std::invalid_argument("build_hinf_problem: B/C dimensions inconsistent with A_0");

  DelayHamiltonianProblem p;
  p.n = n;
  p.delays = delays;
  p.H0.setZero(2 * n, 2 * n);
  p.H0.topLeftCorner(n, n) = A[0];
  p.H0.topRightCorner(n, n) = (B * B.transpose()) / gamma;
  p.H0.bottomLeftCorner(n, n) = -(C.transpose() * C) / gamma;
  p.H0.bottomRightCorner(n, n) = -A[0].transpose();
  for (std::size_t k = 1; k < A.size(); ++k) {
    Eigen::MatrixXd neg = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    neg.topLeftCorner(n, n) = A[k];
    Eigen::MatrixXd pos = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    pos.bottomRightCorner(n, n) = -A[k].transpose();
    p.Hneg.push_back(std::move(neg));
    p.Hpos.push_back(std::move(pos));
  }
  p.check_shapes();
  return p;
}

/// 2x2 single-delay problem with purely imaginary eigenvalues at +-j*pi/2, +-j*pi.
inline DelayHamiltonianProblem make_example1() {
  const double a1 = (3.0 * M_PI * M_PI / 4.0) / (20.0 + M_PI);
  const double c0 = -1000.0 - 10.0 * a1 * a1 - 10.0 * a1 * M_PI - 2.5 * M_PI * M_PI;
  DelayHamiltonianProblem p;
  p.n = 1;
  p.delays = {1.0};
  p.H0.resize(2, 2);
  p.H0 << 10.0, 0.1, c0, -10.0;
  Eigen::MatrixXd neg(2, 2), pos(2, 2);
  neg << a1, 0.0, 0.0, 0.0;
  pos << 0.0, 0.0, 0.0, -a1;
  p.Hneg = {neg};
  p.Hpos = {pos};
  return p;
}

/// State-space data of the cooled heated rod: interior-point central differences
/// of v_t = v_xx + a0(x) v + a1(x) v(pi - x, t - 1) on [0, pi], Dirichlet ends,
/// a0 = -2 sin x, a1 = 2 sin x; the spatial reflection x -> pi - x becomes the
/// index-reversal permutation on the uniform interior grid.
struct RodExample {
  Eigen::MatrixXd A0;
  Eigen::MatrixXd A1;
  Eigen::MatrixXd B;  ///< n x 1
  Eigen::MatrixXd C;  ///< 1 x n, average temperature
  double delay = 1.0;
};

inline RodExample make_example2(Index n) {
  if (n < 2) throw std::invalid_argument("make_example2: need n >= 2 grid points");
  RodExample ex;
  const double h = M_PI / static_cast<double>(n + 1);
  ex.A0 = Eigen::MatrixXd::Zero(n, n);
  ex.A1 = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const double x = (i + 1) * h;
    ex.A0(i, i) = -2.0 / (h * h) - 2.0 * std::sin(x);
    if (i > 0) ex.A0(i, i - 1) = 1.0 / (h * h);
    if (i + 1 < n) ex.A0(i, i + 1) = 1.0 / (h * h);
    ex.A1(i, n - 1 - i) = 2.0 * std::sin(x);
  }
  ex.C = Eigen::MatrixXd::Constant(1, n, 1.0 / static_cast<double>(n));
  ex.B = ex.C.transpose();
  return ex;
}

inline DelayHamiltonianProblem make_example2_problem(Index n, double gamma) {
  const RodExample ex = make_example2(n);
  return build_hinf_problem({ex.A0, ex.A1}, ex.B, ex.C, gamma, {ex.delay});
}

}  // namespace hamdevp
