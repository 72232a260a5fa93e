#include "snie/selfcheck.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "snie/datagen.hpp"
#include "snie/ie_core.hpp"
#include "snie/neural.hpp"

namespace snie {

namespace {

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

// Power-basis coefficients of sum_k c_k C_k(t), exact integer recurrences in
// extended precision.
std::vector<long double> to_monomial(const Eigen::VectorXd& c) {
  const std::size_t n = std::size_t(c.size());
  std::vector<long double> out(n, 0.0L);
  std::vector<long double> prev(n + 1, 0.0L), cur(n + 1, 0.0L);
  prev[0] = 1.0L;  // C_0
  if (n > 0) out[0] += c(0);
  if (n > 1) {
    cur[1] = 1.0L;  // C_1
    out[1] += c(1);
  }
  for (std::size_t k = 2; k < n; ++k) {
    std::vector<long double> next(n + 1, 0.0L);
    for (std::size_t j = 0; j + 1 <= n; ++j) {
      if (j + 1 <= n) next[j + 1] += 2.0L * cur[j];
      next[j] -= prev[j];
    }
    for (std::size_t j = 0; j < n; ++j) out[j] += (long double)c(Eigen::Index(k)) * next[j];
    prev = cur;
    cur = next;
  }
  return out;
}

// int_{-1}^{t} of a power series.
long double integrate_monomial(const std::vector<long double>& a, long double t) {
  long double s = 0.0L;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const long double p = (long double)(k + 1);
    s += a[k] * (std::pow(t, p) - std::pow(-1.0L, p)) / p;
  }
  return s;
}

CheckResult check_roundtrip(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 12;
    ChebCoeffs c(n + 1, 2);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = u(rng);
    const auto grid = cheb_nodes(n);
    const ChebCoeffs back = project_nodes(eval_series_grid(c, grid.points));
    worst = std::max(worst, (back - c).cwiseAbs().maxCoeff());
  }
  const auto grid = cheb_nodes(10);
  const ChebCoeffs e = project_nodes(grid.points.array().exp().matrix().eval());
  const Eigen::VectorXd ts = Eigen::VectorXd::LinSpaced(1001, -1.0, 1.0);
  const double exp_err = (eval_series_grid(e, ts).col(0).array() - ts.array().exp()).abs().maxCoeff();
  return {"chebyshev-roundtrip", worst <= 1e-12 && exp_err < 1e-8,
          "coeff err " + sci(worst) + ", exp(t) N=10 err " + sci(exp_err)};
}

CheckResult check_integration(std::mt19937_64& rng, const SelfcheckHooks& hooks) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> deg(0, 20);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const int n = deg(rng);
    Eigen::VectorXd c(n + 1);
    for (int k = 0; k <= n; ++k) c(k) = u(rng);
    const auto mono = to_monomial(c);
    const AntiderivCoeffs ad = hooks.antiderivative(ChebCoeffs(c));
    double fred = 0.0;
    for (Eigen::Index k = 1; k < ad.n_modes(); k += 2) fred += 2.0 * ad.d(k, 0);
    worst = std::max(worst, std::abs(double((long double)fred - integrate_monomial(mono, 1.0L))));
    for (int j = 0; j < 5; ++j) {
      const double t = u(rng);
      const double v = ad(t)(0);
      worst = std::max(worst, std::abs(double((long double)v - integrate_monomial(mono, t))));
    }
  }
  return {"spectral-integration", worst <= 1e-10, "max err " + sci(worst) + " vs symbolic"};
}

CheckResult check_consistency(std::mt19937_64& rng, const SelfcheckHooks& hooks) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> deg(0, 20);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    ChebCoeffs b(deg(rng) + 1, 1);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = u(rng);
    const AntiderivCoeffs ad = hooks.antiderivative(b);
    double fred = 0.0;
    for (Eigen::Index k = 1; k < ad.n_modes(); k += 2) fred += 2.0 * ad.d(k, 0);
    worst = std::max(worst, std::abs(ad(1.0)(0) - fred));
    worst = std::max(worst, std::abs(ad(-1.0)(0)));
  }
  return {"fredholm-volterra-consistency", worst <= 1e-12, "max gap " + sci(worst)};
}

CheckResult check_separable() {
  const auto grid = cheb_nodes(8);
  IEProblem problem;
  problem.kind = EquationKind::Fredholm;
  problem.lambda = 0.5;
  problem.f = project_nodes(grid.points);
  problem.integrand = classical_to_spectral(
      [](const Eigen::VectorXd& y, double t, double s) -> Eigen::VectorXd { return t * s * y; }, grid);
  SolverConfig config;
  config.tol = 1e-14;
  config.max_iter = 200;
  const SolveResult r = picard_solve(problem, grid, config);
  const Eigen::VectorXd ts = Eigen::VectorXd::LinSpaced(1001, -1.0, 1.0);
  const double err = (eval_series_grid(r.u, ts).col(0) - 1.5 * ts).cwiseAbs().maxCoeff();
  return {"separable-fredholm", err <= 1e-6,
          "N=8 err " + sci(err) + " vs 1.5t after " + std::to_string(r.report.iterations) + " iterations"};
}

CheckResult check_volterra_exp() {
  const auto grid = cheb_nodes(16);
  IEProblem problem;
  problem.kind = EquationKind::Volterra;
  problem.lambda = 1.0;
  problem.f = ChebCoeffs::Zero(17, 1);
  problem.f(0, 0) = 1.0;
  problem.integrand = classical_to_spectral(
      [](const Eigen::VectorXd& y, double, double) -> Eigen::VectorXd { return y; }, grid);
  SolverConfig config;
  config.tol = 1e-13;
  config.max_iter = 200;
  const SolveResult r = picard_solve(problem, grid, config);
  const Eigen::VectorXd ts = Eigen::VectorXd::LinSpaced(1001, -1.0, 1.0);
  const double err =
      (eval_series_grid(r.u, ts).col(0).array() - (ts.array() + 1.0).exp()).abs().maxCoeff();
  return {"volterra-exponential", err <= 1e-4, "N=16 err " + sci(err) + " vs exp(t+1)"};
}

CheckResult check_nystrom() {
  const MatrixKernel kernel = [](double t, double s) { return Eigen::MatrixXd::Constant(1, 1, t * s); };
  const FreeTerm f = [](double t) { return Eigen::VectorXd::Constant(1, t); };
  const Eigen::VectorXd ts = Eigen::VectorXd::LinSpaced(41, -1.0, 1.0);
  const Trajectory sol = nystrom_solve(EquationKind::Fredholm, 0.5, f, kernel, 1, 200, ts);
  const double fred = (sol.values.col(0) - 1.5 * ts).cwiseAbs().maxCoeff();

  const MatrixKernel one = [](double, double) { return Eigen::MatrixXd::Ones(1, 1); };
  const FreeTerm c1 = [](double) { return Eigen::VectorXd::Ones(1); };
  const Trajectory vol = nystrom_solve(EquationKind::Volterra, 1.0, c1, one, 1, 400, ts);
  const double volt = (vol.values.col(0).array() - (ts.array() + 1.0).exp()).abs().maxCoeff();
  return {"nystrom-oracle", fred <= 1e-4 && volt <= 1e-3,
          "separable err " + sci(fred) + ", exponential err " + sci(volt)};
}

CheckResult check_gradient(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 4, dim = 2;
  const std::vector<int> hidden = {6};
  const auto spec = make_layer_specs(n + 1, dim, hidden);
  MLPParams params = init_params(spec, n + 1, dim, rng());
  const ProblemTemplate problem{EquationKind::Volterra, 0.7};
  const PicardOperator op(problem.kind, cheb_nodes(n));
  SolverConfig config;
  config.tol = 1e-300;
  config.max_iter = 3;

  std::vector<Sample> batch(2);
  for (auto& s : batch) {
    s.f = ChebCoeffs(n + 1, dim);
    for (Eigen::Index i = 0; i < s.f.size(); ++i) s.f.data()[i] = 0.5 * u(rng);
    s.target_times = Eigen::VectorXd::LinSpaced(7, -1.0, 1.0);
    s.targets = Eigen::MatrixXd(7, dim);
    for (Eigen::Index i = 0; i < s.targets.size(); ++i) s.targets.data()[i] = u(rng);
  }
  const LossGrad lg = loss_and_grad(params, problem, batch, op, config);
  const Eigen::VectorXd theta = params.flatten();
  double worst = 0.0;
  const double h = 1e-5;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd tp = theta, tm = theta;
    tp(i) += h;
    tm(i) -= h;
    MLPParams pp = params, pm = params;
    pp.assign(tp);
    pm.assign(tm);
    const double fd = (batch_loss(pp, problem, batch, op, config) -
                       batch_loss(pm, problem, batch, op, config)) / (2.0 * h);
    const double g = lg.grad(i);
    if (std::max(std::abs(g), std::abs(fd)) <= 1e-8) continue;
    worst = std::max(worst, std::abs(g - fd) / std::max(std::abs(g), std::abs(fd)));
  }
  return {"gradient-check", worst < 1e-4,
          std::to_string(theta.size()) + " params, max rel err " + sci(worst)};
}

CheckResult check_adam(std::mt19937_64& rng) {
  const auto spec = make_layer_specs(3, 1, std::vector<int>{4});
  MLPParams params = init_params(spec, 3, 1, rng());
  const Eigen::VectorXd before = params.flatten();
  Eigen::VectorXd grad(before.size());
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (Eigen::Index i = 0; i < grad.size(); ++i) grad(i) = u(rng);
  AdamState state = AdamState::for_params(params, 1e-3);
  adam_step(params, grad, state);
  const Eigen::VectorXd step = params.flatten() - before;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < grad.size(); ++i) {
    const double expected = -1e-3 * grad(i) / (std::abs(grad(i)) + 1e-8);
    worst = std::max(worst, std::abs(step(i) - expected));
  }
  return {"adam-first-step", worst <= 1e-15 && state.step == 1, "max deviation " + sci(worst)};
}

template <typename F>
CheckResult guarded(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {name, false, std::string("threw: ") + e.what()};
  }
}

}  // namespace

std::vector<CheckResult> run_selfcheck(const SelfcheckHooks& hooks, std::uint64_t seed) {
  std::mt19937_64 rng = derived_rng(seed, 20, 0);
  std::vector<CheckResult> out;
  out.push_back(guarded("chebyshev-roundtrip", [&] { return check_roundtrip(rng); }));
  out.push_back(guarded("spectral-integration", [&] { return check_integration(rng, hooks); }));
  out.push_back(guarded("fredholm-volterra-consistency", [&] { return check_consistency(rng, hooks); }));
  out.push_back(guarded("separable-fredholm", [] { return check_separable(); }));
  out.push_back(guarded("volterra-exponential", [] { return check_volterra_exp(); }));
  out.push_back(guarded("nystrom-oracle", [] { return check_nystrom(); }));
  out.push_back(guarded("gradient-check", [&] { return check_gradient(rng); }));
  out.push_back(guarded("adam-first-step", [&] { return check_adam(rng); }));
  return out;
}

bool report_selfcheck(const std::vector<CheckResult>& results, std::ostream& out) {
  bool all = true;
  for (const auto& r : results) {
    out << (r.pass ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
    all = all && r.pass;
  }
  return all;
}

}  // namespace snie
