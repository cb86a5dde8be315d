/// The bilinear form [phi, J psi] on Chebyshev coefficients: cached S-matrix
/// blocks, their Kronecker-structured application (the big form is never
/// assembled densely) and a direct quadrature evaluation of the form itself.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <vector>

#include "hamdevp/chebfun.hpp"
#include "hamdevp/problem.hpp"
#include "hamdevp/quadrature.hpp"

namespace hamdevp {

/// Cached blocks of S_N = S0 (x) J + sum_k (Sneg_k (x) J*Hneg_k + Spos_k (x) J*Hpos_k).
/// Entry (l1,l2):
///   S0:   -T_{l1}(0) T_{l2}(0)
///   Sneg: -int_0^{tau_k} T_{l1}(theta/tau_K) T_{l2}((theta-tau_k)/tau_K) dtheta
///   Spos: +int_0^{tau_k} T_{l1}((theta-tau_k)/tau_K) T_{l2}(theta/tau_K) dtheta
/// Extension preserves existing entries bit-for-bit (top-left nesting).
class SkewForm {
 public:
  static SkewForm build(const DelayHamiltonianProblem& p, Index degree) {
    SkewForm sf;
    sf.n_ = p.n;
    sf.delays_ = p.delays;
    sf.tau_ = p.half_width();
    sf.degree_ = degree;
    const StructuredJ J = p.J();
    for (Index k = 0; k < p.K(); ++k) {
      sf.j_hneg_.push_back(J.apply(p.Hneg[k]).sparseView());
      sf.j_hpos_.push_back(J.apply(p.Hpos[k]).sparseView());
    }
    sf.s0_ = s0_block(degree);
    for (Index k = 0; k < p.K(); ++k) {
      sf.sneg_.push_back(sneg_block(degree, p.delays[k], sf.tau_));
      sf.spos_.push_back(Eigen::MatrixXd(-sf.sneg_.back().transpose()));
    }
    return sf;
  }

  /// Same form at a higher degree; the old top-left blocks are reused.
  SkewForm extended(Index degree) const {
    if (degree <= degree_) return *this;
    SkewForm sf(*this);
    sf.degree_ = degree;
    sf.s0_ = s0_block(degree);
    sf.s0_.topLeftCorner(degree_ + 1, degree_ + 1) = s0_;
    for (std::size_t k = 0; k < sneg_.size(); ++k) {
      Eigen::MatrixXd big = sneg_block(degree, delays_[k], tau_);
      big.topLeftCorner(degree_ + 1, degree_ + 1) = sneg_[k];
      sf.sneg_[k] = big;
      sf.spos_[k] = -sf.sneg_[k].transpose();
    }
    return sf;
  }

  Index degree() const { return degree_; }
  Index dim() const { return 2 * n_; }
  const Eigen::MatrixXd& s0() const { return s0_; }
  const Eigen::MatrixXd& sneg(Index k) const { return sneg_[k]; }
  const Eigen::MatrixXd& spos(Index k) const { return spos_[k]; }

  /// S_N applied to a coefficient block (2n x (M+1), M <= N; implicit zero
  /// padding). Returns the full 2n x (N+1) result block.
  Eigen::MatrixXd apply_block(const Eigen::Ref<const Eigen::MatrixXd>& F) const {
    return apply_cols(F, 0);
  }

  /// Only coefficient columns from_col..N of S_N applied to vec(F); this is the
  /// incremental piece needed when previously computed products are padded to a
  /// larger degree.
  Eigen::MatrixXd apply_block_tail(const Eigen::Ref<const Eigen::MatrixXd>& F,
                                   Index from_col) const {
    return apply_cols(F, from_col);
  }

  /// S_N * q for a stacked coefficient vector of length 2n(N+1).
  Eigen::VectorXd apply(const Eigen::VectorXd& q) const {
    if (q.size() != dim() * (degree_ + 1))
      throw std::invalid_argument("SkewForm::apply: stacked length mismatch");
    const Eigen::Map<const Eigen::MatrixXd> F(q.data(), dim(), degree_ + 1);
    Eigen::MatrixXd out = apply_block(F);
    return Eigen::Map<Eigen::VectorXd>(out.data(), out.size());
  }

 private:
  Eigen::MatrixXd apply_cols(const Eigen::Ref<const Eigen::MatrixXd>& F, Index from_col) const {
    if (F.rows() != dim() || F.cols() > degree_ + 1)
      throw std::invalid_argument("SkewForm: coefficient block shape mismatch");
    const Index c = F.cols(), out_cols = degree_ + 1 - from_col;
    const StructuredJ J{n_};
    // (S (x) M) vec(F) = vec(M F S^T); rows from_col.. of S select output columns.
    Eigen::MatrixXd out =
        J.apply(F * s0_.block(from_col, 0, out_cols, c).transpose());
    for (std::size_t k = 0; k < sneg_.size(); ++k) {
      out += j_hneg_[k] * (F * sneg_[k].block(from_col, 0, out_cols, c).transpose());
      out += j_hpos_[k] * (F * spos_[k].block(from_col, 0, out_cols, c).transpose());
    }
    return out;
  }

  static Eigen::MatrixXd s0_block(Index degree) {
    Eigen::VectorXd T0(degree + 1);
    for (Index l = 0; l <= degree; ++l) T0[l] = (l % 2 == 1) ? 0.0 : (l % 4 == 0 ? 1.0 : -1.0);
    return -T0 * T0.transpose();
  }

  /// Gauss-Legendre on [0, tau_k] with degree+1 nodes, exact for the degree
  /// <= 2*degree Chebyshev product integrands.
  static Eigen::MatrixXd sneg_block(Index degree, double tau_k, double tau) {
    const QuadratureRule rule = gauss_legendre(degree + 1, 0.0, tau_k);
    const Index nn = rule.nodes.size();
    Eigen::MatrixXd t1(degree + 1, nn), t2(degree + 1, nn);
    Eigen::VectorXd basis;
    for (Index j = 0; j < nn; ++j) {
      cheb_basis(degree, rule.nodes[j] / tau, &basis);
      t1.col(j) = basis;
      cheb_basis(degree, (rule.nodes[j] - tau_k) / tau, &basis);
      t2.col(j) = basis;
    }
    return -(t1 * rule.weights.asDiagonal() * t2.transpose());
  }

  Index n_ = 0;
  Index degree_ = 0;
  std::vector<double> delays_;
  double tau_ = 1.0;
  Eigen::MatrixXd s0_;
  std::vector<Eigen::MatrixXd> sneg_, spos_;
  std::vector<Eigen::SparseMatrix<double>> j_hneg_, j_hpos_;
};

/// [f, g] by quadrature exact for the polynomial degrees present:
/// g(0)^T f(0) + sum_k ( int_0^{tau_k} g^T Hneg_k f(.-tau_k)
///                     - int_0^{tau_k} g(.-tau_k)^T Hpos_k f ).
template <typename Scalar>
Scalar bilinear_form(const DelayHamiltonianProblem& p, const ChebFun<Scalar>& f,
                     const ChebFun<Scalar>& g) {
  auto dotp = [](const VectorX<Scalar>& a, const VectorX<Scalar>& b) -> Scalar {
    return (a.transpose() * b)(0);  // bilinear, no conjugation
  };
  Scalar acc = dotp(g.eval(0.0), f.eval(0.0));
  const Index nodes = (f.degree() + g.degree()) / 2 + 2;
  for (Index k = 0; k < p.K(); ++k) {
    const QuadratureRule rule = gauss_legendre(nodes, 0.0, p.delays[k]);
    const MatrixX<Scalar> g_here = g.eval_many(rule.nodes);
    const MatrixX<Scalar> f_here = f.eval_many(rule.nodes);
    const MatrixX<Scalar> g_back = g.eval_many(rule.nodes.array() - p.delays[k]);
    const MatrixX<Scalar> f_back = f.eval_many(rule.nodes.array() - p.delays[k]);
    const MatrixX<Scalar> hneg_f = p.Hneg[k].cast<Scalar>() * f_back;
    const MatrixX<Scalar> hpos_f = p.Hpos[k].cast<Scalar>() * f_here;
    for (Index j = 0; j < rule.nodes.size(); ++j)
      acc += rule.weights[j] *
             (dotp(g_here.col(j), hneg_f.col(j)) - dotp(g_back.col(j), hpos_f.col(j)));
  }
  return acc;
}

/// [f, J g], the pairing realized by the S-matrices.
template <typename Scalar>
Scalar bilinear_j(const DelayHamiltonianProblem& p, const ChebFun<Scalar>& f,
                  const ChebFun<Scalar>& g) {
  ChebFun<Scalar> jg(g.half_width(), p.J().apply(g.coeffs()));
  return bilinear_form(p, f, jg);
}

}  // namespace hamdevp
