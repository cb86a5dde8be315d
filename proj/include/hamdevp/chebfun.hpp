/// Scaled-Chebyshev representation of vector-valued functions on [-tau_K, tau_K]:
/// evaluation, differentiation, padding/chopping, adaptive interpolation and the
/// coefficient inner product used by the Krylov iteration.
#pragma once

#include <Eigen/Dense>
#include <fftw3.h>

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hamdevp {

using Complex = std::complex<double>;
using Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Thrown when adaptive interpolation fails to resolve a function within the
/// degree cap (typically a function too oscillatory or too fast growing for a
/// polynomial carrier).
struct InterpolationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Chebyshev extreme points theta_l = half_width * cos(l*pi/N), l = 0..N.
inline Eigen::VectorXd cheb_points(Index degree, double half_width) {
  if (degree < 1) throw std::invalid_argument("cheb_points: degree must be >= 1");
  Eigen::VectorXd pts(degree + 1);
  for (Index l = 0; l <= degree; ++l)
    pts[l] = half_width * std::cos(l * M_PI / static_cast<double>(degree));
  return pts;
}

/// Values T_0(t)..T_N(t); optionally first and second derivatives w.r.t. t.
inline void cheb_basis(Index max_degree, double t, Eigen::VectorXd* T,
                       Eigen::VectorXd* dT = nullptr, Eigen::VectorXd* ddT = nullptr) {
  const Index n = max_degree + 1;
  T->resize(n);
  if (dT) dT->resize(n);
  if (ddT) ddT->resize(n);
  for (Index l = 0; l < n; ++l) {
    double tl, dl = 0.0, ddl = 0.0;
    if (l == 0) {
      tl = 1.0;
    } else if (l == 1) {
      tl = t;
      dl = 1.0;
    } else {
      tl = 2.0 * t * (*T)[l - 1] - (*T)[l - 2];
      if (dT) dl = 2.0 * (*T)[l - 1] + 2.0 * t * (*dT)[l - 1] - (*dT)[l - 2];
      if (ddT) ddl = 4.0 * (*dT)[l - 1] + 2.0 * t * (*ddT)[l - 1] - (*ddT)[l - 2];
    }
    (*T)[l] = tl;
    if (dT) (*dT)[l] = dl;
    if (ddT) (*ddT)[l] = ddl;
  }
}

/// A vector-valued polynomial phi(theta) = sum_l coeffs.col(l) * T_l(theta/half_width).
/// Immutable after construction; the representation is exact (polynomials, not
/// truncations of some underlying function).
template <typename Scalar>
class ChebFun {
 public:
  ChebFun() = default;

  ChebFun(double half_width, MatrixX<Scalar> coeffs)
      : half_width_(half_width), coeffs_(std::move(coeffs)) {
    if (half_width_ <= 0.0) throw std::invalid_argument("ChebFun: half_width must be positive");
    if (coeffs_.cols() == 0) throw std::invalid_argument("ChebFun: empty coefficient matrix");
  }

  static ChebFun Constant(double half_width, const VectorX<Scalar>& value) {
    return ChebFun(half_width, value);
  }

  Index dim() const { return coeffs_.rows(); }
  Index degree() const { return coeffs_.cols() - 1; }
  double half_width() const { return half_width_; }
  const MatrixX<Scalar>& coeffs() const { return coeffs_; }

  /// Clenshaw evaluation at a single point.
  template <typename Arg>
  VectorX<decltype(Scalar() * Arg())> eval(Arg theta) const {
    using Out = decltype(Scalar() * Arg());
    const Arg t = theta / static_cast<Arg>(half_width_);
    const Index n = degree();
    VectorX<Out> b1 = VectorX<Out>::Zero(dim()), b2 = VectorX<Out>::Zero(dim());
    for (Index k = n; k >= 1; --k) {
      VectorX<Out> bk = coeffs_.col(k).template cast<Out>() + (2.0 * t) * b1 - b2;
      b2.swap(b1);
      b1.swap(bk);
    }
    return coeffs_.col(0).template cast<Out>() + t * b1 - b2;
  }

  /// Dense evaluation at many real points (one column per point).
  MatrixX<Scalar> eval_many(const Eigen::VectorXd& thetas) const {
    const Index p = thetas.size(), n = degree();
    Eigen::MatrixXd basis(n + 1, p);
    for (Index j = 0; j < p; ++j) {
      const double t = thetas[j] / half_width_;
      basis(0, j) = 1.0;
      if (n >= 1) basis(1, j) = t;
      for (Index l = 2; l <= n; ++l) basis(l, j) = 2.0 * t * basis(l - 1, j) - basis(l - 2, j);
    }
    return coeffs_ * basis.cast<Scalar>();
  }

  /// Spectral derivative d/dtheta, degree max(N-1, 0).
  ChebFun derivative() const {
    const Index n = degree();
    if (n == 0) return ChebFun(half_width_, MatrixX<Scalar>::Zero(dim(), 1));
    MatrixX<Scalar> d = MatrixX<Scalar>::Zero(dim(), n);
    // b_{k-1} = b_{k+1} + 2k c_k, then the k = 0 column is halved
    for (Index k = n; k >= 1; --k) {
      d.col(k - 1) = 2.0 * static_cast<double>(k) * coeffs_.col(k);
      if (k + 1 < n) d.col(k - 1) += d.col(k + 1);
    }
    d.col(0) *= 0.5;
    d /= half_width_;
    return ChebFun(half_width_, std::move(d));
  }

  /// Appends zero coefficient columns up to the target degree.
  ChebFun padded(Index target_degree) const {
    if (target_degree < degree())
      throw std::invalid_argument("ChebFun::padded: target degree below current degree");
    MatrixX<Scalar> c = MatrixX<Scalar>::Zero(dim(), target_degree + 1);
    c.leftCols(coeffs_.cols()) = coeffs_;
    return ChebFun(half_width_, std::move(c));
  }

  /// Drops trailing columns whose max-norm is <= tol * (global max coefficient).
  ChebFun chopped(double tol) const {
    const double scale = max_coeff();
    Index last = 0;
    for (Index l = degree(); l >= 1; --l) {
      if (coeffs_.col(l).template lpNorm<Eigen::Infinity>() > tol * scale) {
        last = l;
        break;
      }
    }
    return ChebFun(half_width_, coeffs_.leftCols(last + 1));
  }

  double max_coeff() const { return coeffs_.template lpNorm<Eigen::Infinity>(); }

  /// Column-major stacking [c_0; c_1; ...; c_N].
  VectorX<Scalar> stacked() const {
    return Eigen::Map<const VectorX<Scalar>>(coeffs_.data(), coeffs_.size());
  }

  static ChebFun FromStacked(double half_width, Index dim, const VectorX<Scalar>& v) {
    if (v.size() % dim != 0)
      throw std::invalid_argument("ChebFun::FromStacked: length not a multiple of dim");
    return ChebFun(half_width,
                   MatrixX<Scalar>(Eigen::Map<const MatrixX<Scalar>>(v.data(), dim, v.size() / dim)));
  }

 private:
  double half_width_ = 1.0;
  MatrixX<Scalar> coeffs_;
};

using ChebFunD = ChebFun<double>;
using ChebFunC = ChebFun<Complex>;

/// <psi, phi>_X on coefficient columns: sum_l f_l^H g_l (shorter operand
/// implicitly zero-padded). For real functions this is the Euclidean product of
/// the stacked coefficient vectors.
template <typename Scalar>
Scalar inner_product(const ChebFun<Scalar>& f, const ChebFun<Scalar>& g) {
  if (std::abs(f.half_width() - g.half_width()) >
      1e-14 * std::max(f.half_width(), g.half_width()))
    throw std::invalid_argument("inner_product: mismatched half widths");
  const Index n = std::min(f.degree(), g.degree());
  Scalar acc{};
  for (Index l = 0; l <= n; ++l) acc += f.coeffs().col(l).dot(g.coeffs().col(l));
  return acc;
}

namespace detail {

/// DCT-I along each row: values at cheb_points(N, .) -> interpolating
/// coefficients in the scaled Chebyshev basis.
inline Eigen::MatrixXd dct1_rows(const Eigen::MatrixXd& values) {
  const Index n = values.cols();  // N+1 samples
  const Index N = n - 1;
  std::vector<double> in(n), out(n);
  fftw_plan plan = fftw_plan_r2r_1d(static_cast<int>(n), in.data(), out.data(),
                                    FFTW_REDFT00, FFTW_ESTIMATE);
  Eigen::MatrixXd coeffs(values.rows(), n);
  for (Index r = 0; r < values.rows(); ++r) {
    for (Index j = 0; j < n; ++j) in[j] = values(r, j);
    fftw_execute(plan);
    for (Index k = 0; k < n; ++k) coeffs(r, k) = out[k] / static_cast<double>(N);
    coeffs(r, 0) *= 0.5;
    coeffs(r, N) *= 0.5;
  }
  fftw_destroy_plan(plan);
  return coeffs;
}

inline Eigen::MatrixXcd dct1_rows(const Eigen::MatrixXcd& values) {
  Eigen::MatrixXd re = dct1_rows(Eigen::MatrixXd(values.real()));
  Eigen::MatrixXd im = dct1_rows(Eigen::MatrixXd(values.imag()));
  return re + Complex(0.0, 1.0) * im;
}

}  // namespace detail

/// Adaptive Chebyshev interpolation. `sample` maps a vector of points to the
/// matrix of function values (one column per point). The degree doubles from 16
/// until the trailing coefficients decay below chop_tol relative to the largest
/// coefficient; the result is chopped to the last significant column.
template <typename Scalar, typename Sampler>
ChebFun<Scalar> interpolate(Sampler&& sample, double half_width, double chop_tol = 1e-13,
                            Index max_degree = 4096) {
  for (Index N = 16;; N *= 2) {
    const Eigen::VectorXd pts = cheb_points(N, half_width);
    MatrixX<Scalar> values = sample(pts);
    MatrixX<Scalar> coeffs = detail::dct1_rows(values);
    const double scale = coeffs.template lpNorm<Eigen::Infinity>();
    if (scale == 0.0)
      return ChebFun<Scalar>(half_width, MatrixX<Scalar>::Zero(values.rows(), 1));
    const Index ntail = std::max<Index>(3, N / 8);
    double tail = 0.0;
    for (Index l = N + 1 - ntail; l <= N; ++l)
      tail = std::max(tail, coeffs.col(l).template lpNorm<Eigen::Infinity>());
    if (tail <= chop_tol * scale)
      return ChebFun<Scalar>(half_width, std::move(coeffs)).chopped(chop_tol);
    if (2 * N > max_degree)
      throw InterpolationError("interpolate: coefficient tail did not decay below degree " +
                               std::to_string(max_degree));
  }
}

}  // namespace hamdevp
