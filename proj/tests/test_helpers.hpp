// Shared generators and oracles for the test suite.
#pragma once

#include <random>

#include "hamdevp/hamdevp.hpp"

namespace testutil {

using namespace hamdevp;

inline Eigen::MatrixXd random_matrix(std::mt19937& rng, Index r, Index c) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = u(rng);
  return m;
}

inline Eigen::MatrixXd random_symmetric(std::mt19937& rng, Index m) {
  Eigen::MatrixXd a = random_matrix(rng, m, m);
  return 0.5 * (a + a.transpose());
}

/// Random problem satisfying the structure exactly: H0 = -J*A with A symmetric,
/// and per delay Hpos = -J*(J*Hneg)^T.
inline DelayHamiltonianProblem random_problem(std::mt19937& rng, Index n, Index K,
                                              double scale = 1.0) {
  DelayHamiltonianProblem p;
  p.n = n;
  const StructuredJ J{n};
  p.H0 = -scale * J.apply(random_symmetric(rng, 2 * n));
  std::uniform_real_distribution<double> u(0.3, 1.0);
  std::vector<double> taus;
  for (Index k = 0; k < K; ++k) taus.push_back(u(rng) + static_cast<double>(k));
  std::sort(taus.begin(), taus.end());
  p.delays = taus;
  for (Index k = 0; k < K; ++k) {
    Eigen::MatrixXd hneg = scale * random_matrix(rng, 2 * n, 2 * n);
    p.Hneg.push_back(hneg);
    p.Hpos.push_back(-J.apply(Eigen::MatrixXd(J.apply(hneg).transpose())));
  }
  return p;
}

/// Hamiltonian H0, zero delay matrices; the single nominal delay keeps the
/// function-space machinery on [-1, 1].
inline DelayHamiltonianProblem zero_delay_problem(std::mt19937& rng, Index n,
                                                  double scale = 1.0) {
  DelayHamiltonianProblem p;
  p.n = n;
  const StructuredJ J{n};
  p.H0 = -scale * J.apply(random_symmetric(rng, 2 * n));
  p.delays = {1.0};
  p.Hneg = {Eigen::MatrixXd::Zero(2 * n, 2 * n)};
  p.Hpos = {Eigen::MatrixXd::Zero(2 * n, 2 * n)};
  return p;
}

template <typename Scalar>
ChebFun<Scalar> random_chebfun(std::mt19937& rng, Index dim, Index degree, double half_width) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MatrixX<Scalar> c(dim, degree + 1);
  for (Index j = 0; j <= degree; ++j)
    for (Index i = 0; i < dim; ++i) {
      if constexpr (std::is_same_v<Scalar, double>)
        c(i, j) = u(rng);
      else
        c(i, j) = Complex(u(rng), u(rng));
    }
  return ChebFun<Scalar>(half_width, std::move(c));
}

/// I[h] = integral of h(theta)/sqrt(tau^2 - theta^2) over [-tau, tau], by the
/// M-node Gauss-Chebyshev rule (exact for polynomial h of degree < 2M).
template <typename F>
auto gauss_chebyshev(F&& h, double tau, int M) {
  auto acc = h(0.0);
  acc.setZero();
  for (int j = 0; j < M; ++j) {
    const double t = (j + 0.5) * M_PI / M;
    acc += h(tau * std::cos(t));
  }
  return (M_PI / M * acc).eval();
}

}  // namespace testutil
