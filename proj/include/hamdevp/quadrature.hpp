/// Gauss-Legendre rules (Golub-Welsch), used for the skew-form integrals and by
/// the quadrature oracles in the test suite.
#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace hamdevp {

struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// n-point Gauss-Legendre rule on [a, b]; exact for polynomials of degree 2n-1.
inline QuadratureRule gauss_legendre(Eigen::Index n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (Eigen::Index k = 0; k < n; ++k) {
    rule.nodes[k] = mid + half * es.eigenvalues()[k];
    const double v0 = es.eigenvectors()(0, k);
    rule.weights[k] = 2.0 * v0 * v0 * half;
  }
  return rule;
}

}  // namespace hamdevp
