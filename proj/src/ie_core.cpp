#include "snie/ie_core.hpp"

#include <cmath>
#include <string>

#include "snie/spectral_ops.hpp"

namespace snie {

const char* to_string(EquationKind kind) {
  return kind == EquationKind::Fredholm ? "fredholm" : "volterra";
}

EquationKind equation_kind_from_string(const std::string& name) {
  if (name == "fredholm") return EquationKind::Fredholm;
  if (name == "volterra") return EquationKind::Volterra;
  throw InvalidArgument("unknown equation kind '" + name + "' (expected fredholm|volterra)");
}

std::vector<ChebCoeffs> IntegrandEvaluator::spectral_integrands(const ChebCoeffs& u,
                                                                const Eigen::VectorXd& ts) const {
  std::vector<ChebCoeffs> out;
  out.reserve(ts.size());
  for (Eigen::Index i = 0; i < ts.size(); ++i) out.push_back(spectral_integrand(u, ts(i)));
  return out;
}

ClassicalIntegrand::ClassicalIntegrand(PointwiseKernel kernel, const CollocationGrid& grid)
    : kernel_(std::move(kernel)), grid_(grid), projection_(projection_matrix(grid.n)) {
  if (!kernel_) throw InvalidArgument("ClassicalIntegrand: empty kernel");
}

ChebCoeffs ClassicalIntegrand::spectral_integrand(const ChebCoeffs& u, double t) const {
  if (u.rows() != grid_.size()) {
    throw InvalidArgument("ClassicalIntegrand: iterate has " + std::to_string(u.rows()) +
                          " modes, grid expects " + std::to_string(grid_.size()));
  }
  const Eigen::MatrixXd y = eval_series_grid(u, grid_.points);
  Eigen::MatrixXd g(grid_.size(), u.cols());
  for (Eigen::Index k = 0; k < grid_.size(); ++k) {
    const Eigen::VectorXd value = kernel_(y.row(k).transpose(), t, grid_.points(k));
    if (value.size() != u.cols()) throw InvalidArgument("kernel output has wrong dimension");
    if (!value.allFinite()) throw NonFiniteError("kernel returned a non-finite value");
    g.row(k) = value.transpose();
  }
  return projection_ * g;
}

std::shared_ptr<const IntegrandEvaluator> classical_to_spectral(PointwiseKernel kernel,
                                                                const CollocationGrid& grid) {
  return std::make_shared<ClassicalIntegrand>(std::move(kernel), grid);
}

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw InvalidArgument("solver tol must be > 0");
  if (max_iter < 1) throw InvalidArgument("solver max_iter must be >= 1");
  if (!(relaxation > 0.0 && relaxation <= 1.0)) {
    throw InvalidArgument("solver relaxation must lie in (0,1]");
  }
}

PicardOperator::PicardOperator(EquationKind kind, const CollocationGrid& grid)
    : kind_(kind), grid_(grid), projection_(projection_matrix(grid.n)) {
  const Eigen::Index modes = grid.size();
  if (kind == EquationKind::Fredholm) {
    rows_ = fredholm_row(modes).replicate(modes, 1);
  } else {
    rows_ = volterra_rows(modes, grid.points);
  }
}

ChebCoeffs PicardOperator::apply(const IEProblem& problem, const ChebCoeffs& u) const {
  const Eigen::Index modes = grid_.size();
  const Eigen::Index dim = problem.f.cols();
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(modes, dim);
  if (problem.lambda != 0.0) {
    const std::vector<ChebCoeffs> b = problem.integrand->spectral_integrands(u, grid_.points);
    for (Eigen::Index i = 0; i < modes; ++i) {
      v.row(i) = problem.lambda * (rows_.row(i) * b[std::size_t(i)]);
    }
  }
  // P maps node values of f back to f exactly, so the projection only acts on V.
  return problem.f + projection_ * v;
}

namespace {

void check_problem(const IEProblem& problem, Eigen::Index modes) {
  if (problem.f.rows() != modes) {
    throw InvalidArgument("free term has " + std::to_string(problem.f.rows()) +
                          " modes, grid expects " + std::to_string(modes));
  }
  if (problem.f.cols() < 1) throw InvalidArgument("free term has no channels");
  if (!problem.f.allFinite()) throw NonFiniteError("free term is not finite");
  if (!std::isfinite(problem.lambda)) throw NonFiniteError("lambda is not finite");
  if (!problem.integrand && problem.lambda != 0.0) {
    throw InvalidArgument("problem has no integrand");
  }
}

}  // namespace

SolveResult picard_solve(const IEProblem& problem, const PicardOperator& op,
                         const SolverConfig& config) {
  config.validate();
  check_problem(problem, op.grid().size());
  const double rho = config.relaxation;

  SolveResult result;
  ChebCoeffs u = problem.f;
  for (int k = 0; k < config.max_iter; ++k) {
    ChebCoeffs next = op.apply(problem, u);
    if (rho != 1.0) next = (1.0 - rho) * u + rho * next;
    if (!next.allFinite()) {
      throw NonFiniteError("picard_solve: iterate " + std::to_string(k + 1) + " is not finite");
    }
    const double step = (next - u).norm();
    u = std::move(next);
    result.report.residuals.push_back(step);
    result.report.iterations = k + 1;
    if (step <= config.tol) {
      result.report.converged = true;
      break;
    }
  }
  result.u = std::move(u);
  return result;
}

SolveResult picard_solve(const IEProblem& problem, const CollocationGrid& grid,
                         const SolverConfig& config) {
  return picard_solve(problem, PicardOperator(problem.kind, grid), config);
}

double residual(const IEProblem& problem, const CollocationGrid& grid, const ChebCoeffs& u) {
  check_problem(problem, grid.size());
  if (u.rows() != problem.f.rows() || u.cols() != problem.f.cols()) {
    throw InvalidArgument("residual: iterate shape does not match the free term");
  }
  const PicardOperator op(problem.kind, grid);
  return (u - op.apply(problem, u)).norm();
}

}  // namespace snie
