#pragma once

// Spectral integration: closed-form antiderivatives of Chebyshev series and
// the Fredholm / Volterra integrals built on them.

#include <Eigen/Dense>

#include "snie/chebyshev.hpp"

namespace snie {

/// Antiderivative coefficients d_0..d_{N+1} (one more mode than the integrand).
/// Unlike ChebCoeffs these use the half-d_0 series
///     F(t) = d_0 / 2 + sum_{k>=1} d_k C_k(t),
/// normalised so that F(-1) = 0.
template <typename Scalar>
struct AntiderivCoeffsT {
  ChebCoeffsT<Scalar> d;

  Eigen::Index n_modes() const { return d.rows(); }
  Eigen::Index dim() const { return d.cols(); }

  /// The same function in full-sum convention.
  ChebCoeffsT<Scalar> as_series() const {
    ChebCoeffsT<Scalar> c = d;
    c.row(0) *= Scalar(0.5);
    return c;
  }

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> operator()(Scalar t) const {
    return eval_series(as_series(), t);
  }
};
using AntiderivCoeffs = AntiderivCoeffsT<double>;

/// d_k = (bh_{k-1} - bh_{k+1}) / (2k) for k = 1..N+1 with bh_0 = 2 b_0,
/// bh_k = b_k (k <= N), zero beyond; d_0 = 2 sum_k (-1)^{k+1} d_k.
template <typename Derived>
AntiderivCoeffsT<typename Derived::Scalar> antiderivative(const Eigen::MatrixBase<Derived>& b) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = b.rows() - 1;
  if (n < 0) throw InvalidArgument("antiderivative: empty coefficient matrix");
  const Eigen::Index dim = b.cols();

  auto bhat = [&](Eigen::Index k) -> Eigen::Matrix<Scalar, 1, Eigen::Dynamic> {
    if (k > n) return Eigen::Matrix<Scalar, 1, Eigen::Dynamic>::Zero(dim);
    if (k == 0) return Scalar(2) * b.row(0);
    return b.row(k);
  };

  AntiderivCoeffsT<Scalar> out;
  out.d = ChebCoeffsT<Scalar>::Zero(n + 2, dim);
  for (Eigen::Index k = 1; k <= n + 1; ++k) {
    out.d.row(k) = (bhat(k - 1) - bhat(k + 1)) / Scalar(2 * k);
  }
  for (Eigen::Index k = 1; k <= n + 1; ++k) {
    const Scalar sign = (k % 2 == 1) ? Scalar(2) : Scalar(-2);
    out.d.row(0) += sign * out.d.row(k);
  }
  return out;
}

/// Integral over [-1,1] per channel: 2 * sum of the odd-index d_k.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> fredholm_integral(
    const Eigen::MatrixBase<Derived>& b) {
  using Scalar = typename Derived::Scalar;
  const auto ad = antiderivative(b);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sum = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(b.cols());
  for (Eigen::Index k = 1; k < ad.n_modes(); k += 2) sum += ad.d.row(k).transpose();
  return Scalar(2) * sum;
}

/// Integral over [-1,t] per channel.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> volterra_eval(
    const Eigen::MatrixBase<Derived>& b, typename Derived::Scalar t) {
  t = clamp_to_domain(t);
  return antiderivative(b)(t);
}

/// Row vector r with fredholm_integral(b) = (r * b)^T for any b with `modes` rows.
template <typename Scalar = double>
Eigen::Matrix<Scalar, 1, Eigen::Dynamic> fredholm_row(Eigen::Index modes) {
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> r(modes);
  const ChebCoeffsT<Scalar> id = ChebCoeffsT<Scalar>::Identity(modes, modes);
  const auto ad = antiderivative(id);
  r.setZero();
  for (Eigen::Index k = 1; k < ad.n_modes(); k += 2) r += ad.d.row(k);
  return Scalar(2) * r;
}

/// Matrix whose row i maps integrand coefficients to the integral over [-1, ts(i)].
template <typename DerivedT>
ChebCoeffsT<typename DerivedT::Scalar> volterra_rows(Eigen::Index modes,
                                                    const Eigen::MatrixBase<DerivedT>& ts) {
  using Scalar = typename DerivedT::Scalar;
  const ChebCoeffsT<Scalar> id = ChebCoeffsT<Scalar>::Identity(modes, modes);
  // Column j of the antiderivative of the identity is the antiderivative of C_j.
  const ChebCoeffsT<Scalar> series = antiderivative(id).as_series();
  return evaluation_matrix(series.rows(), ts) * series;
}

}  // namespace snie
