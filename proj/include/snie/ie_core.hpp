#pragma once

// Integral equations of the second kind
//     y(t) = f(t) + lambda * int_{-1}^{alpha(t)} G(y(s), t, s) ds
// solved by fixed-point iteration on Chebyshev coefficients.

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <vector>

#include "snie/chebyshev.hpp"

namespace snie {

enum class EquationKind { Fredholm, Volterra };

const char* to_string(EquationKind kind);
EquationKind equation_kind_from_string(const std::string& name);

/// Maps a coefficient iterate u to the Chebyshev coefficients of the
/// integrand s -> G(u(s), t, s) at a fixed evaluation time t.
class IntegrandEvaluator {
 public:
  virtual ~IntegrandEvaluator() = default;

  virtual ChebCoeffs spectral_integrand(const ChebCoeffs& u, double t) const = 0;

  /// One integrand per entry of ts. The default loops over spectral_integrand.
  virtual std::vector<ChebCoeffs> spectral_integrands(const ChebCoeffs& u,
                                                      const Eigen::VectorXd& ts) const;
};

/// Pointwise kernel G(y, t, s) -> R^d.
using PointwiseKernel =
    std::function<Eigen::VectorXd(const Eigen::VectorXd& y, double t, double s)>;

class ClassicalIntegrand final : public IntegrandEvaluator {
 public:
  ClassicalIntegrand(PointwiseKernel kernel, const CollocationGrid& grid);

  ChebCoeffs spectral_integrand(const ChebCoeffs& u, double t) const override;

 private:
  PointwiseKernel kernel_;
  CollocationGrid grid_;
  Eigen::MatrixXd projection_;
};

/// Samples s -> G(u(s), t, s) at the grid nodes and interpolates.
std::shared_ptr<const IntegrandEvaluator> classical_to_spectral(PointwiseKernel kernel,
                                                                const CollocationGrid& grid);

struct IEProblem {
  EquationKind kind = EquationKind::Fredholm;
  double lambda = 1.0;
  ChebCoeffs f;  ///< free term, (N+1) x d
  std::shared_ptr<const IntegrandEvaluator> integrand;
};

struct SolverConfig {
  double tol = 1e-6;
  int max_iter = 100;
  double relaxation = 1.0;

  void validate() const;
};

struct SolveReport {
  int iterations = 0;
  std::vector<double> residuals;  ///< Frobenius norm of u_{k+1} - u_k per step
  bool converged = false;

  bool operator==(const SolveReport&) const = default;
};

struct SolveResult {
  ChebCoeffs u;
  SolveReport report;
};

/// Grid-dependent matrices of one Picard sweep. Node values of the integral
/// term are V(i,:) = lambda * rows(i,:) * b_i, and the undamped update is
/// f + projection * V.
class PicardOperator {
 public:
  PicardOperator(EquationKind kind, const CollocationGrid& grid);

  EquationKind kind() const { return kind_; }
  const CollocationGrid& grid() const { return grid_; }
  const Eigen::MatrixXd& projection() const { return projection_; }
  /// Row i integrates an integrand expansion over [-1, alpha(t_i)].
  const Eigen::MatrixXd& integration_rows() const { return rows_; }

  /// f + P * V(u): one undamped application.
  ChebCoeffs apply(const IEProblem& problem, const ChebCoeffs& u) const;

 private:
  EquationKind kind_;
  CollocationGrid grid_;
  Eigen::MatrixXd projection_;
  Eigen::MatrixXd rows_;
};

/// Iterates u_{k+1} = (1-rho) u_k + rho (f + P V(u_k)) from u_0 = f until
/// ||u_{k+1} - u_k||_F <= tol or max_iter. Throws NonFiniteError when an
/// iterate is not finite; hitting max_iter is reported, not thrown.
SolveResult picard_solve(const IEProblem& problem, const CollocationGrid& grid,
                         const SolverConfig& config);
SolveResult picard_solve(const IEProblem& problem, const PicardOperator& op,
                         const SolverConfig& config);

/// ||u - (f + P V(u))||_F, the undamped fixed-point defect.
double residual(const IEProblem& problem, const CollocationGrid& grid, const ChebCoeffs& u);

}  // namespace snie
