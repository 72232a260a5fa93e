#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "snie/chebyshev.hpp"
#include "snie/errors.hpp"

using namespace snie;

namespace {

ChebCoeffs random_coeffs(int modes, int dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ChebCoeffs c(modes, dim);
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = u(rng);
  return c;
}

double exp_interp_error(int n) {
  const auto grid = cheb_nodes(n);
  const ChebCoeffs c = project_nodes(grid.points.array().exp().matrix().eval());
  const Eigen::VectorXd ts = Eigen::VectorXd::LinSpaced(2001, -1.0, 1.0);
  return (eval_series_grid(c, ts).col(0).array() - ts.array().exp()).abs().maxCoeff();
}

}  // namespace

TEST_CASE("nodes are descending extrema with exact endpoints") {
  const auto g = cheb_nodes(6);
  CHECK(g.size() == 7);
  CHECK(g.points(0) == 1.0);
  CHECK(g.points(6) == -1.0);
  CHECK(g.points(3) == 0.0);
  for (int k = 0; k <= 6; ++k) CHECK(g.points(k) == doctest::Approx(std::cos(k * M_PI / 6)).epsilon(1e-15));
  for (int k = 0; k < 6; ++k) CHECK(g.points(k) > g.points(k + 1));
  CHECK_THROWS_AS(cheb_nodes(0), InvalidArgument);
}

TEST_CASE("eval_series small cases") {
  ChebCoeffs c(2, 1);
  c << 0.0, 1.0;
  Eigen::VectorXd ts(3);
  ts << -1.0, 0.0, 1.0;
  const auto v = eval_series_grid(c, ts);
  CHECK(v(0, 0) == -1.0);
  CHECK(v(1, 0) == 0.0);
  CHECK(v(2, 0) == 1.0);

  ChebCoeffs one = ChebCoeffs::Zero(4, 1);
  one(0, 0) = 1.0;
  const auto ones = eval_series_grid(one, Eigen::VectorXd::LinSpaced(100, -1.0, 1.0));
  CHECK((ones.array() == 1.0).all());

  CHECK_THROWS_AS(eval_series(c, 1.5), InvalidArgument);
  CHECK_NOTHROW(eval_series(c, 1.0 + 1e-13));
}

TEST_CASE("Clenshaw agrees with direct summation") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n : {0, 1, 5, 17, 33, 64}) {
    const ChebCoeffs c = random_coeffs(n + 1, 3, rng);
    for (int rep = 0; rep < 20; ++rep) {
      const double t = u(rng);
      const Eigen::VectorXd v = eval_series(c, t);
      for (int j = 0; j < 3; ++j) CHECK(std::abs(v(j) - oracle::direct_series(c.col(j), t)) < 1e-12);
    }
  }
}

TEST_CASE("evaluation_matrix reproduces eval_series_grid") {
  std::mt19937_64 rng(3);
  const ChebCoeffs c = random_coeffs(9, 2, rng);
  const Eigen::VectorXd ts = Eigen::VectorXd::LinSpaced(37, -1.0, 1.0);
  CHECK((evaluation_matrix(9, ts) * c - eval_series_grid(c, ts)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("project_nodes examples") {
  const auto g4 = cheb_nodes(4);
  const Eigen::VectorXd vals = 3.0 * (2.0 * g4.points.array().square() - 1.0);
  const ChebCoeffs c = project_nodes(vals);
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(5);
  expected(2) = 3.0;
  CHECK((c.col(0) - expected).cwiseAbs().maxCoeff() < 1e-14);

  const ChebCoeffs k = project_nodes(Eigen::VectorXd::Constant(7, 5.0));
  CHECK(std::abs(k(0, 0) - 5.0) < 1e-14);
  CHECK(k.bottomRows(6).cwiseAbs().maxCoeff() < 1e-14);

  CHECK_THROWS_AS(project_nodes(Eigen::MatrixXd::Ones(5, 1), 6), InvalidArgument);
}

TEST_CASE("project_nodes round trip for random polynomials") {
  std::mt19937_64 rng(5);
  for (int n : {1, 2, 7, 16, 31}) {
    const ChebCoeffs c = random_coeffs(n + 1, 2, rng);
    const auto grid = cheb_nodes(n);
    const ChebCoeffs values = eval_series_grid(c, grid.points);
    const ChebCoeffs back = project_nodes(values);
    CHECK((back - c).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((eval_series_grid(back, grid.points) - values).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("exp coefficients match quadrature coefficients") {
  // a_k = (2/pi) int_0^pi exp(cos th) cos(k th) dth, halved for k = 0.
  const auto grid = cheb_nodes(10);
  const ChebCoeffs c = project_nodes(grid.points.array().exp().matrix().eval());
  for (int k = 0; k <= 6; ++k) {
    double a = 2.0 / M_PI *
               oracle::adaptive_simpson([k](double th) { return std::exp(std::cos(th)) * std::cos(k * th); },
                                        0.0, M_PI);
    if (k == 0) a *= 0.5;
    CHECK(std::abs(c(k, 0) - a) < 1e-9);
  }
  const Eigen::VectorXd ts = Eigen::VectorXd::LinSpaced(50, -1.0, 1.0);
  CHECK((eval_series_grid(c, ts).col(0).array() - ts.array().exp()).abs().maxCoeff() < 1e-8);
}

TEST_CASE("spectral decay of exp interpolation") {
  double prev = INFINITY;
  for (int n : {4, 6, 8, 10}) {
    const double err = exp_interp_error(n);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-8);
}

TEST_CASE("project_mc examples") {
  const auto one = [](double) { return Eigen::VectorXd::Ones(1); };
  for (int n_mc : {1, 7, 1000}) {
    const ChebCoeffs c = project_mc(one, 4, n_mc, 9);
    CHECK(c(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  }
  const auto c1 = [](double s) { return Eigen::VectorXd::Constant(1, s); };
  const ChebCoeffs a = project_mc(c1, 3, 500, 77);
  const ChebCoeffs b = project_mc(c1, 3, 500, 77);
  CHECK(a == b);

  // f = C_1 at n_mc = 10000: mode 1 within 3 empirical standard errors of 1.
  const int n_mc = 10000;
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> th(0.0, M_PI);
  double mean = 0.0, sq = 0.0;
  for (int i = 0; i < n_mc; ++i) {
    const double x = 2.0 * std::pow(std::cos(th(rng)), 2);
    mean += x;
    sq += x * x;
  }
  mean /= n_mc;
  const double se = std::sqrt((sq / n_mc - mean * mean) / n_mc);
  const ChebCoeffs est = project_mc(c1, 2, n_mc, 5);
  CHECK(std::abs(est(1, 0) - 1.0) < 3.0 * se);

  // Orthogonality: C_3 has no component on modes 0..2.
  const auto c3 = [](double s) { return Eigen::VectorXd::Constant(1, 4 * s * s * s - 3 * s); };
  const ChebCoeffs o = project_mc(c3, 2, 20000, 8);
  CHECK(o.cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("project_mc is unbiased for C_1") {
  const auto c1 = [](double s) { return Eigen::VectorXd::Constant(1, s); };
  std::vector<double> xs;
  for (std::uint64_t seed = 0; seed < 100; ++seed) xs.push_back(project_mc(c1, 1, 1000, seed)(1, 0));
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= double(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= double(xs.size() - 1);
  const double se = std::sqrt(var / double(xs.size()));
  CHECK(std::abs(mean - 1.0) < 4.0 * se);
}

TEST_CASE("time map") {
  CHECK(TimeMap(0.0, 1.0).to_cheb(0.5) == 0.0);
  CHECK(TimeMap(-1.0, 1.0).to_cheb(0.3) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(TimeMap(2.0, 6.0).to_cheb(5.0) == 0.5);
  const TimeMap m(2.0, 6.0);
  CHECK(m.to_cheb(2.0) == -1.0);
  CHECK(m.to_cheb(6.0) == 1.0);
  CHECK(m.from_cheb(m.to_cheb(3.7)) == doctest::Approx(3.7).epsilon(1e-15));
  CHECK_THROWS_AS(TimeMap(1.0, 1.0), InvalidArgument);
}
