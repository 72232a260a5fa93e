#pragma once

// Chebyshev basis on [-1,1]: collocation nodes, Clenshaw evaluation,
// interpolation at the extrema nodes and Monte Carlo projection.
//
// Coefficient matrices are (modes x channels). Row j holds the coefficient
// of C_j for every channel and the series is the full sum
//     y(t) = sum_{j=0}^{N} a_j C_j(t)
// with no implicit halving of a_0.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include "snie/errors.hpp"

namespace snie {

template <typename Scalar>
using ChebCoeffsT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using ChebCoeffs = ChebCoeffsT<double>;

/// Tolerance for evaluation points that drift outside [-1,1] through roundoff.
inline constexpr double kDomainSlack = 1e-12;

/// Chebyshev-Gauss-Lobatto points cos(k*pi/n), k = 0..n, in descending order.
template <typename Scalar>
struct CollocationGridT {
  int n = 0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> points;

  Eigen::Index size() const { return points.size(); }
};
using CollocationGrid = CollocationGridT<double>;

template <typename Scalar = double>
CollocationGridT<Scalar> cheb_nodes(int n) {
  if (n < 1) throw InvalidArgument("cheb_nodes: n must be >= 1");
  CollocationGridT<Scalar> grid;
  grid.n = n;
  grid.points.resize(n + 1);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  // Lower half mirrors the upper half so the grid is exactly antisymmetric
  // (cos(pi/2) alone would give 6e-17 instead of 0).
  for (int k = 0; k <= n; ++k) {
    if (2 * k < n) {
      grid.points(k) = std::cos(Scalar(k) * pi / Scalar(n));
    } else if (2 * k == n) {
      grid.points(k) = Scalar(0);
    } else {
      grid.points(k) = -std::cos(Scalar(n - k) * pi / Scalar(n));
    }
  }
  return grid;
}

/// Validates t against [-1,1] with roundoff slack and returns the clamped value.
template <typename Scalar>
Scalar clamp_to_domain(Scalar t) {
  using std::isfinite;
  if (!isfinite(t) || t < Scalar(-1 - kDomainSlack) || t > Scalar(1 + kDomainSlack)) {
    throw InvalidArgument("evaluation point outside [-1,1]: " + std::to_string(double(t)));
  }
  if (t > Scalar(1)) return Scalar(1);
  if (t < Scalar(-1)) return Scalar(-1);
  return t;
}

/// Clenshaw summation of every channel at t. Returns a column vector of length dim.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> eval_series(
    const Eigen::MatrixBase<Derived>& coeffs, typename Derived::Scalar t) {
  using Scalar = typename Derived::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  t = clamp_to_domain(t);
  const Eigen::Index modes = coeffs.rows();
  const Eigen::Index dim = coeffs.cols();
  if (modes == 0) return Vec::Zero(dim);
  Vec b1 = Vec::Zero(dim);
  Vec b2 = Vec::Zero(dim);
  const Scalar two_t = Scalar(2) * t;
  for (Eigen::Index k = modes - 1; k >= 1; --k) {
    Vec b0 = coeffs.row(k).transpose() + two_t * b1 - b2;
    b2 = std::move(b1);
    b1 = std::move(b0);
  }
  return coeffs.row(0).transpose() + t * b1 - b2;
}

/// Row i is eval_series(coeffs, ts(i)).
template <typename Derived, typename DerivedT>
ChebCoeffsT<typename Derived::Scalar> eval_series_grid(const Eigen::MatrixBase<Derived>& coeffs,
                                                       const Eigen::MatrixBase<DerivedT>& ts) {
  ChebCoeffsT<typename Derived::Scalar> out(ts.size(), coeffs.cols());
  for (Eigen::Index i = 0; i < ts.size(); ++i) out.row(i) = eval_series(coeffs, ts(i)).transpose();
  return out;
}

/// E(i,j) = C_j(ts(i)) for j < modes, via the three-term recurrence.
template <typename DerivedT>
ChebCoeffsT<typename DerivedT::Scalar> evaluation_matrix(Eigen::Index modes,
                                                        const Eigen::MatrixBase<DerivedT>& ts) {
  using Scalar = typename DerivedT::Scalar;
  ChebCoeffsT<Scalar> e(ts.size(), modes);
  for (Eigen::Index i = 0; i < ts.size(); ++i) {
    const Scalar t = clamp_to_domain(ts(i));
    if (modes > 0) e(i, 0) = Scalar(1);
    if (modes > 1) e(i, 1) = t;
    for (Eigen::Index j = 2; j < modes; ++j) e(i, j) = Scalar(2) * t * e(i, j - 1) - e(i, j - 2);
  }
  return e;
}

/// Discrete Chebyshev transform at the extrema nodes cos(k*pi/n): maps node
/// values (descending node order) to the coefficients of the degree-n interpolant.
template <typename Scalar = double>
ChebCoeffsT<Scalar> projection_matrix(int n) {
  if (n < 1) throw InvalidArgument("projection_matrix: n must be >= 1");
  const Scalar pi = std::numbers::pi_v<Scalar>;
  ChebCoeffsT<Scalar> p(n + 1, n + 1);
  for (int j = 0; j <= n; ++j) {
    const Scalar row_weight = (j == 0 || j == n) ? Scalar(1) / Scalar(n) : Scalar(2) / Scalar(n);
    for (int k = 0; k <= n; ++k) {
      const Scalar node_weight = (k == 0 || k == n) ? Scalar(0.5) : Scalar(1);
      // cos(j*k*pi/n) evaluated with the product reduced mod 2n for accuracy.
      const int m = (j * k) % (2 * n);
      p(j, k) = row_weight * node_weight * std::cos(Scalar(m) * pi / Scalar(n));
    }
  }
  return p;
}

template <typename Derived>
ChebCoeffsT<typename Derived::Scalar> project_nodes(const Eigen::MatrixBase<Derived>& values) {
  if (values.rows() < 2) throw InvalidArgument("project_nodes: need at least 2 node values");
  const int n = int(values.rows()) - 1;
  return projection_matrix<typename Derived::Scalar>(n) * values;
}

template <typename Derived>
ChebCoeffsT<typename Derived::Scalar> project_nodes(const Eigen::MatrixBase<Derived>& values,
                                                    int n) {
  if (values.rows() != n + 1) {
    throw InvalidArgument("project_nodes: expected " + std::to_string(n + 1) + " rows, got " +
                          std::to_string(values.rows()));
  }
  return project_nodes(values);
}

/// Monte Carlo estimate of b_k = (2/pi) int f(s) C_k(s) / sqrt(1-s^2) ds for
/// k = 0..k_max. Samples theta uniformly on (0,pi) and uses s = cos(theta), so
/// b_k ~ (2/n) sum f(cos theta_i) cos(k theta_i). Row 0 is halved on output
/// (full-sum convention). `f` maps a point in [-1,1] to a dim-vector.
template <typename F>
ChebCoeffs project_mc(F&& f, int k_max, int n_mc, std::uint64_t seed) {
  if (k_max < 0) throw InvalidArgument("project_mc: k_max must be >= 0");
  if (n_mc < 1) throw InvalidArgument("project_mc: n_mc must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> theta_dist(0.0, std::numbers::pi);
  Eigen::VectorXd theta(n_mc);
  for (int i = 0; i < n_mc; ++i) theta(i) = theta_dist(rng);

  Eigen::MatrixXd values;
  for (int i = 0; i < n_mc; ++i) {
    const Eigen::VectorXd v = f(std::cos(theta(i)));
    if (i == 0) values.resize(n_mc, v.size());
    values.row(i) = v.transpose();
  }
  Eigen::MatrixXd basis(k_max + 1, n_mc);
  for (int i = 0; i < n_mc; ++i) {
    for (int k = 0; k <= k_max; ++k) basis(k, i) = std::cos(double(k) * theta(i));
  }
  ChebCoeffs out = (2.0 * (basis * values)) / double(n_mc);
  out.row(0) *= 0.5;
  return out;
}

/// Affine bijection between data time [t_min, t_max] and [-1,1].
class TimeMap {
 public:
  TimeMap(double t_min, double t_max) : t_min_(t_min), t_max_(t_max) {
    if (!(t_max > t_min) || !std::isfinite(t_min) || !std::isfinite(t_max)) {
      throw InvalidArgument("TimeMap: require finite t_max > t_min");
    }
  }

  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }

  double to_cheb(double t) const {
    if (t == t_min_) return -1.0;
    if (t == t_max_) return 1.0;
    return (2.0 * t - (t_min_ + t_max_)) / (t_max_ - t_min_);
  }

  double from_cheb(double x) const {
    if (x == -1.0) return t_min_;
    if (x == 1.0) return t_max_;
    return 0.5 * ((t_max_ - t_min_) * x + (t_max_ + t_min_));
  }

  template <typename Derived>
  Eigen::VectorXd to_cheb(const Eigen::MatrixBase<Derived>& ts) const {
    Eigen::VectorXd out(ts.size());
    for (Eigen::Index i = 0; i < ts.size(); ++i) out(i) = to_cheb(ts(i));
    return out;
  }

 private:
  double t_min_;
  double t_max_;
};

}  // namespace snie
