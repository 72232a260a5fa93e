#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "snie/datagen.hpp"

using namespace snie;

namespace {

IEDatasetParams small_ie(double noise) {
  IEDatasetParams p;
  p.n_samples = 6;
  p.noise_sigma = noise;
  p.seed = 17;
  return p;
}

bool same(const Dataset& a, const Dataset& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.samples[i].times != b.samples[i].times || a.samples[i].values != b.samples[i].values) return false;
  }
  return a.meta.generator == b.meta.generator;
}

}  // namespace

TEST_CASE("Nystrom examples") {
  const MatrixKernel ts = [](double t, double s) { return Eigen::MatrixXd::Constant(1, 1, t * s); };
  const FreeTerm f = [](double t) { return Eigen::VectorXd::Constant(1, t); };
  const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(33, -1.0, 1.0);

  const Trajectory zero = nystrom_solve(EquationKind::Fredholm, 0.0, f, ts, 1, 50, times);
  CHECK((zero.values.col(0) - times).cwiseAbs().maxCoeff() < 1e-14);

  const Trajectory sep = nystrom_solve(EquationKind::Fredholm, 0.5, f, ts, 1, 200, times);
  CHECK((sep.values.col(0) - 1.5 * times).cwiseAbs().maxCoeff() < 1e-4);

  const MatrixKernel one = [](double, double) { return Eigen::MatrixXd::Ones(1, 1); };
  const FreeTerm c1 = [](double) { return Eigen::VectorXd::Ones(1); };
  const Trajectory vol = nystrom_solve(EquationKind::Volterra, 1.0, c1, one, 1, 400, times);
  const auto ode = [](double, const Eigen::VectorXd& y) { return y; };
  for (Eigen::Index i = 0; i < times.size(); i += 8) {
    const double ref = oracle::rk4(ode, Eigen::VectorXd::Ones(1), -1.0, times(i), 2000)(0);
    CHECK(std::abs(vol.values(i, 0) - ref) < 1e-3);
  }

  CHECK_THROWS_AS(nystrom_solve(EquationKind::Fredholm, 0.5, f, ts, 1, 4, times), InvalidArgument);
}

TEST_CASE("Nystrom converges at second order") {
  const MatrixKernel ts = [](double t, double s) { return Eigen::MatrixXd::Constant(1, 1, t * s); };
  const FreeTerm f = [](double t) { return Eigen::VectorXd::Constant(1, t); };
  Eigen::VectorXd times(1);
  times << 1.0;
  double prev = 0.0;
  for (int n : {25, 50, 100, 200}) {
    const double err = std::abs(nystrom_solve(EquationKind::Fredholm, 0.5, f, ts, 1, n, times).values(0, 0) - 1.5);
    if (prev > 0.0) CHECK(std::log2(prev / err) * std::log2(double(n) / (n / 2)) >= 1.9);
    prev = err;
  }
}

TEST_CASE("singular systems are reported") {
  // y = f + lambda int y: singular at lambda = 1/2.
  const MatrixKernel one = [](double, double) { return Eigen::MatrixXd::Ones(1, 1); };
  CHECK_THROWS_AS(NystromSolver(EquationKind::Fredholm, 0.5, one, 1, 40), SingularSystemError);
}

TEST_CASE("barycentric rational interpolation reproduces smooth functions") {
  const Eigen::VectorXd nodes = Eigen::VectorXd::LinSpaced(60, -1.0, 1.0);
  Eigen::MatrixXd vals(60, 1);
  for (int i = 0; i < 60; ++i) vals(i, 0) = std::sin(3 * nodes(i));
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(101, -1.0, 1.0);
  const Eigen::MatrixXd y = barycentric_rational(nodes, vals, x);
  CHECK((y.col(0).array() - (3 * x.array()).sin()).abs().maxCoeff() < 1e-5);
  // cubic polynomials are reproduced exactly by order 3
  for (int i = 0; i < 60; ++i) vals(i, 0) = nodes(i) * nodes(i) * nodes(i) - nodes(i);
  const Eigen::MatrixXd z = barycentric_rational(nodes, vals, x);
  CHECK((z.col(0).array() - (x.array().cube() - x.array())).abs().maxCoeff() < 1e-12);
}

TEST_CASE("IE dataset shape, reproducibility and noise level") {
  const Dataset a = gen_ie_dataset(small_ie(0.05));
  const Dataset b = gen_ie_dataset(small_ie(0.05));
  CHECK(same(a, b));
  CHECK(a.size() == 6);
  CHECK(a.meta.dim == 2);
  CHECK(a.meta.n_points == 100);
  CHECK(a.samples[0].times(0) == 0.0);
  CHECK(a.samples[0].times(99) == 1.0);
  CHECK(a.meta.generator.contains("kernel"));
  CHECK(std::abs(a.meta.generator["lambda"].get<double>()) * a.meta.generator["operator_norm"].get<double>() <=
        0.5 + 1e-12);

  const Dataset clean = gen_ie_dataset(small_ie(0.0));
  double sq = 0.0;
  long count = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sq += (a.samples[i].values - clean.samples[i].values).squaredNorm();
    count += a.samples[i].values.size();
  }
  CHECK(sq / double(count) == doctest::Approx(0.0025).epsilon(0.15));

  IEDatasetParams bad = small_ie(0.0);
  bad.n_samples = 0;
  CHECK_THROWS_AS(gen_ie_dataset(bad), InvalidArgument);
}

TEST_CASE("noise-free IE samples solve the stated equation with a cubic free term") {
  const Dataset ds = gen_ie_dataset(small_ie(0.0));
  const double lambda = ds.meta.generator["lambda"].get<double>();
  const HyperbolicKernel k = HyperbolicKernel::random(2, 17);
  const TimeMap map(ds.meta.t_min, ds.meta.t_max);
  const Trajectory& traj = ds.samples[2];
  const Eigen::VectorXd s = map.to_cheb(traj.times);

  // high-degree Chebyshev least-squares fit of y to integrate against K
  const int deg = 30;
  const Eigen::MatrixXd e = evaluation_matrix(deg + 1, s);
  const Eigen::MatrixXd yc = e.colPivHouseholderQr().solve(traj.values);
  auto y = [&](double x) { return Eigen::VectorXd(eval_series(ChebCoeffs(yc), x)); };

  Eigen::VectorXd probes = Eigen::VectorXd::LinSpaced(12, -0.95, 0.95);
  Eigen::MatrixXd f_est(12, 2);
  for (int i = 0; i < 12; ++i) {
    const double t = probes(i);
    for (int c = 0; c < 2; ++c) {
      const double integral = oracle::adaptive_simpson(
          [&](double x) { return (k(t, x) * y(x))(c); }, -1.0, 1.0, 1e-11);
      f_est(i, c) = y(t)(c) - lambda * integral;
    }
  }
  const Eigen::MatrixXd ec = evaluation_matrix(4, probes);
  const Eigen::MatrixXd cubic = ec.colPivHouseholderQr().solve(f_est);
  CHECK((ec * cubic - f_est).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("delay network: decoupled decay and step halving") {
  DelayNetSpec spec = DelayNetSpec::random(4, 3);
  spec.coupling.setZero();
  spec.stimulus_amplitude = 0.0;
  spec.horizon = 2.0;
  spec.step = 0.001;
  Eigen::VectorXd x0(4);
  x0 << 1.0, -0.5, 0.25, 0.0;
  const Trajectory tr = simulate_delay_net(spec, x0, 5);
  for (Eigen::Index i = 0; i < tr.size(); ++i) {
    const Eigen::VectorXd exact = x0 * std::exp(-tr.times(i));
    CHECK((tr.values.row(i).transpose() - exact).cwiseAbs().maxCoeff() < 5 * spec.step);
  }

  DelayNetSpec ode = DelayNetSpec::random(6, 4);
  ode.delays.setZero();
  ode.horizon = 4.0;
  ode.step = 0.004;
  DelayNetSpec half = ode;
  half.step = 0.002;
  Eigen::VectorXd y0 = Eigen::VectorXd::LinSpaced(6, -1.0, 1.0);
  const Trajectory a = simulate_delay_net(ode, y0, 11);
  const Trajectory b = simulate_delay_net(half, y0, 11);
  const double gap = (a.values - b.values).cwiseAbs().maxCoeff();
  CHECK(gap < 20 * ode.step);
  CHECK(gap > 0.0);
}

TEST_CASE("delay dataset reproducibility and shape") {
  const DelayNetSpec spec = DelayNetSpec::random(80, 1);
  const Dataset a = gen_delay_dataset(spec, 3, 20, 5);
  const Dataset b = gen_delay_dataset(spec, 3, 20, 5);
  CHECK(same(a, b));
  CHECK(a.meta.dim == 80);
  CHECK(a.samples[0].size() == 20);
  CHECK(a.meta.kind == DatasetKind::DelayNet);
}

TEST_CASE("delay network divergence names the sample") {
  DelayNetSpec spec = DelayNetSpec::random(3, 1);
  spec.decay = -50.0;
  try {
    gen_delay_dataset(spec, 4, 5, 0);
    FAIL("expected divergence");
  } catch (const DivergedError& e) {
    CHECK(e.sample() == 0);
    CHECK(std::string(e.what()).find("sample 0") != std::string::npos);
  }
  DelayNetSpec neg = DelayNetSpec::random(3, 1);
  neg.delays(0, 0) = -1.0;
  CHECK_THROWS_AS(neg.validate(), InvalidArgument);
}

TEST_CASE("downsampling") {
  const Dataset ds = gen_ie_dataset(small_ie(0.0));
  const Dataset half = downsample(ds, RegularDownsample{2});
  CHECK(half.samples[0].size() == 50);
  CHECK(half.samples[0].times(1) == ds.samples[0].times(2));

  const Dataset id = downsample(ds, RegularDownsample{1});
  CHECK(id.samples[3].values == ds.samples[3].values);

  const Dataset irr = downsample(ds, IrregularDownsample{0.2, 4});
  for (const auto& t : irr.samples) {
    CHECK(t.size() == 20);
    CHECK(t.times(0) == 0.0);
    CHECK(t.times(19) == 1.0);
    for (Eigen::Index i = 1; i < t.size(); ++i) CHECK(t.times(i) > t.times(i - 1));
  }
  CHECK(downsample(ds, IrregularDownsample{0.3, 9}).samples[1].times ==
        downsample(ds, IrregularDownsample{0.3, 9}).samples[1].times);
  CHECK_THROWS_AS(downsample(ds, IrregularDownsample{0.01, 1}), InvalidArgument);
}

TEST_CASE("downsample parsing") {
  CHECK(std::get<RegularDownsample>(parse_downsample("regular:2")).keep_every == 2);
  const auto irr = std::get<IrregularDownsample>(parse_downsample("irregular:0.3:11"));
  CHECK(irr.fraction == 0.3);
  CHECK(irr.seed == 11);
  CHECK_THROWS_AS(parse_downsample("regular:0"), InvalidArgument);
  CHECK_THROWS_AS(parse_downsample("irregular:1.5"), InvalidArgument);
  CHECK_THROWS_AS(parse_downsample("sometimes"), InvalidArgument);
}

TEST_CASE("split is a seeded partition") {
  IEDatasetParams p = small_ie(0.0);
  p.n_samples = 100;
  p.n_points = 10;
  const Dataset ds = gen_ie_dataset(p);
  const DatasetSplit a = split(ds, {0.8, 0.1, 0.1}, 3);
  const DatasetSplit b = split(ds, {0.8, 0.1, 0.1}, 3);
  CHECK(a.train.size() == 80);
  CHECK(a.val.size() == 10);
  CHECK(a.test.size() == 10);
  CHECK(same(a.test, b.test));
  std::multiset<double> all, parts;
  for (const auto& s : ds.samples) all.insert(s.values(0, 0));
  for (const Dataset* d : {&a.train, &a.val, &a.test}) {
    for (const auto& s : d->samples) parts.insert(s.values(0, 0));
  }
  CHECK(all == parts);
  CHECK_THROWS_AS(split(ds, {0.5, 0.5, 0.1}, 0), InvalidArgument);
  Dataset tiny = ds;
  tiny.samples.resize(3);
  CHECK_THROWS_AS(split(tiny, {0.8, 0.1, 0.1}, 0), InvalidArgument);
}

TEST_CASE("trajectory validation") {
  Trajectory t;
  t.times = Eigen::VectorXd::LinSpaced(3, 0.0, 1.0);
  t.values = Eigen::MatrixXd::Zero(3, 2);
  CHECK_NOTHROW(t.validate());
  t.times(2) = 0.5;
  CHECK_THROWS_AS(t.validate(), SchemaError);
  t.times(2) = 1.0;
  t.values(1, 1) = NAN;
  CHECK_THROWS_AS(t.validate(), SchemaError);
}
