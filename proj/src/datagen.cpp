#include "snie/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "snie/chebyshev.hpp"

namespace snie {

namespace {

constexpr std::uint64_t kKernelStream = 1;
constexpr std::uint64_t kBaseFreeTermStream = 2;
constexpr std::uint64_t kIESampleStream = 3;
constexpr std::uint64_t kDelaySampleStream = 4;
constexpr std::uint64_t kDelaySpecStream = 5;
constexpr double kDivergenceBound = 1e6;

Eigen::VectorXd linspace(double a, double b, int n) {
  Eigen::VectorXd t(n);
  for (int i = 0; i < n; ++i) t(i) = (n == 1) ? a : a + (b - a) * double(i) / double(n - 1);
  t(n - 1) = b;
  return t;
}

Eigen::VectorXd trapezoid_nodes(int n_quad) { return linspace(-1.0, 1.0, n_quad); }

/// Quadrature weight of node j in row i.
double trapezoid_weight(EquationKind kind, int n_quad, int i, int j) {
  const double h = 2.0 / double(n_quad - 1);
  if (kind == EquationKind::Fredholm) return (j == 0 || j == n_quad - 1) ? 0.5 * h : h;
  if (i == 0 || j > i) return 0.0;
  return (j == 0 || j == i) ? 0.5 * h : h;
}

void check_quadrature(int dim, int n_quad) {
  if (dim < 1) throw InvalidArgument("Nystrom: dim must be >= 1");
  if (n_quad < 8) throw InvalidArgument("Nystrom: n_quad must be >= 8");
}

Eigen::MatrixXd checked_kernel(const MatrixKernel& kernel, double t, double s, int dim) {
  Eigen::MatrixXd k = kernel(t, s);
  if (k.rows() != dim || k.cols() != dim) throw InvalidArgument("kernel returned wrong shape");
  if (!k.allFinite()) throw NonFiniteError("kernel returned a non-finite value");
  return k;
}

}  // namespace

void Trajectory::validate() const {
  if (times.size() < 2) throw SchemaError("trajectory needs at least 2 time points");
  if (values.rows() != times.size()) throw SchemaError("trajectory values/time count mismatch");
  if (values.cols() < 1) throw SchemaError("trajectory has no channels");
  for (Eigen::Index i = 1; i < times.size(); ++i) {
    if (!(times(i) > times(i - 1))) throw SchemaError("trajectory times are not strictly increasing");
  }
  if (!times.allFinite() || !values.allFinite()) throw SchemaError("trajectory has non-finite entries");
}

const char* to_string(DatasetKind kind) {
  return kind == DatasetKind::SyntheticIE ? "synthetic-ie" : "delay-net";
}

DatasetKind dataset_kind_from_string(const std::string& name) {
  if (name == "synthetic-ie") return DatasetKind::SyntheticIE;
  if (name == "delay-net") return DatasetKind::DelayNet;
  throw InvalidArgument("unknown dataset kind '" + name + "' (expected synthetic-ie|delay-net)");
}

void Dataset::validate() const {
  if (!(meta.t_max > meta.t_min)) throw SchemaError("meta: t_max must exceed t_min");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    try {
      samples[i].validate();
    } catch (const SchemaError& e) {
      throw SchemaError("samples[" + std::to_string(i) + "]: " + e.what());
    }
    if (samples[i].dim() != meta.dim) {
      throw SchemaError("samples[" + std::to_string(i) + "]: dimension does not match meta.dim");
    }
    if (samples[i].times(0) < meta.t_min || samples[i].times(samples[i].size() - 1) > meta.t_max) {
      throw SchemaError("samples[" + std::to_string(i) + "]: times outside [t_min, t_max]");
    }
  }
}

std::size_t Dataset::bytes() const {
  std::size_t total = 0;
  for (const auto& s : samples) total += std::size_t(s.times.size() + s.values.size()) * sizeof(double);
  return total;
}

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream),
                    std::uint32_t(index), std::uint32_t(index >> 32)};
  return std::mt19937_64(seq);
}

// ---------------------------------------------------------------------------
// Nystrom oracle

double nystrom_operator_norm(EquationKind kind, const MatrixKernel& kernel, int dim, int n_quad) {
  check_quadrature(dim, n_quad);
  const Eigen::VectorXd s = trapezoid_nodes(n_quad);
  double norm = 0.0;
  for (int i = 0; i < n_quad; ++i) {
    Eigen::VectorXd row_sum = Eigen::VectorXd::Zero(dim);
    for (int j = 0; j < n_quad; ++j) {
      const double w = trapezoid_weight(kind, n_quad, i, j);
      if (w == 0.0) continue;
      row_sum += w * checked_kernel(kernel, s(i), s(j), dim).cwiseAbs().rowwise().sum();
    }
    norm = std::max(norm, row_sum.maxCoeff());
  }
  return norm;
}

NystromSolver::NystromSolver(EquationKind kind, double lambda, const MatrixKernel& kernel, int dim,
                             int n_quad)
    : dim_(dim) {
  check_quadrature(dim, n_quad);
  nodes_ = trapezoid_nodes(n_quad);
  const Eigen::Index size = Eigen::Index(n_quad) * dim;
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(size, size);
  for (int i = 0; i < n_quad; ++i) {
    Eigen::VectorXd row_sum = Eigen::VectorXd::Zero(dim);
    for (int j = 0; j < n_quad; ++j) {
      const double w = trapezoid_weight(kind, n_quad, i, j);
      if (w == 0.0) continue;
      const Eigen::MatrixXd k = checked_kernel(kernel, nodes_(i), nodes_(j), dim);
      a.block(Eigen::Index(i) * dim, Eigen::Index(j) * dim, dim, dim) -= lambda * w * k;
      row_sum += w * k.cwiseAbs().rowwise().sum();
    }
    operator_norm_ = std::max(operator_norm_, row_sum.maxCoeff());
  }
  lu_.compute(a);
  const double rcond = lu_.rcond();
  if (!(rcond > 1e-12)) {
    std::ostringstream msg;
    msg << "Nystrom system is singular (rcond=" << rcond << ", lambda=" << lambda << ")";
    throw SingularSystemError(msg.str());
  }
}

Eigen::MatrixXd NystromSolver::solve_nodes(const FreeTerm& f) const {
  const Eigen::Index n = nodes_.size();
  Eigen::VectorXd rhs(n * dim_);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd fi = f(nodes_(i));
    if (fi.size() != dim_) throw InvalidArgument("free term returned wrong dimension");
    rhs.segment(i * dim_, dim_) = fi;
  }
  const Eigen::VectorXd y = lu_.solve(rhs);
  // Row i of the result is the node value y(s_i).
  return Eigen::Map<const Eigen::MatrixXd>(y.data(), dim_, n).transpose();
}

Trajectory NystromSolver::solve(const FreeTerm& f, const Eigen::VectorXd& times) const {
  Trajectory traj;
  traj.times = times;
  traj.values = barycentric_rational(nodes_, solve_nodes(f), times);
  return traj;
}

Trajectory nystrom_solve(EquationKind kind, double lambda, const FreeTerm& f,
                         const MatrixKernel& kernel, int dim, int n_quad,
                         const Eigen::VectorXd& times) {
  return NystromSolver(kind, lambda, kernel, dim, n_quad).solve(f, times);
}

Eigen::MatrixXd barycentric_rational(const Eigen::VectorXd& nodes, const Eigen::MatrixXd& values,
                                     const Eigen::VectorXd& x, int order) {
  const int n = int(nodes.size());
  if (values.rows() != n) throw InvalidArgument("barycentric_rational: value/node count mismatch");
  const int d = std::min(order, n - 1);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < n; ++k) {
    for (int i = std::max(0, k - d); i <= std::min(k, n - 1 - d); ++i) {
      double prod = 1.0;
      for (int j = i; j <= i + d; ++j) {
        if (j != k) prod /= std::abs(nodes(k) - nodes(j));
      }
      w(k) += prod;
    }
    if ((k - d) % 2 != 0) w(k) = -w(k);
  }
  Eigen::MatrixXd out(x.size(), values.cols());
  for (Eigen::Index m = 0; m < x.size(); ++m) {
    Eigen::RowVectorXd num = Eigen::RowVectorXd::Zero(values.cols());
    double den = 0.0;
    bool exact = false;
    for (int k = 0; k < n; ++k) {
      const double diff = x(m) - nodes(k);
      if (diff == 0.0) {
        out.row(m) = values.row(k);
        exact = true;
        break;
      }
      const double c = w(k) / diff;
      num += c * values.row(k);
      den += c;
    }
    if (!exact) out.row(m) = num / den;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Integral-equation dataset

HyperbolicKernel HyperbolicKernel::random(int dim, std::uint64_t seed) {
  if (dim < 1) throw InvalidArgument("kernel dim must be >= 1");
  std::mt19937_64 rng = derived_rng(seed, kKernelStream, 0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  HyperbolicKernel k;
  k.dim = dim;
  for (Eigen::MatrixXd* m : {&k.a, &k.b, &k.c, &k.e, &k.g}) {
    m->resize(dim, dim);
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) (*m)(i, j) = u(rng);
    }
  }
  return k;
}

Eigen::MatrixXd HyperbolicKernel::operator()(double t, double s) const {
  return (a.array() * (b.array() * t + c.array() * s).tanh() +
          e.array() / (g.array() * s).cosh())
      .matrix();
}

namespace {

nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

Dataset gen_ie_dataset(const IEDatasetParams& params) {
  if (params.n_samples < 1) throw InvalidArgument("gen_ie_dataset: n_samples must be >= 1");
  if (params.n_points < 2) throw InvalidArgument("gen_ie_dataset: n_points must be >= 2");
  if (params.dim < 1) throw InvalidArgument("gen_ie_dataset: dim must be >= 1");
  if (!(params.noise_sigma >= 0.0)) throw InvalidArgument("gen_ie_dataset: noise_sigma must be >= 0");
  if (!std::isfinite(params.lambda)) throw InvalidArgument("gen_ie_dataset: lambda must be finite");
  const TimeMap time_map(params.t_min, params.t_max);
  const int dim = params.dim;

  const HyperbolicKernel kernel = HyperbolicKernel::random(dim, params.seed);
  const MatrixKernel kernel_fn = [&kernel](double t, double s) { return kernel(t, s); };

  ChebCoeffs base = ChebCoeffs::Zero(4, dim);
  {
    std::mt19937_64 rng = derived_rng(params.seed, kBaseFreeTermStream, 0);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int j = 0; j < 4; ++j) {
      for (int c = 0; c < dim; ++c) base(j, c) = u(rng);
    }
  }

  const double norm = nystrom_operator_norm(params.kind, kernel_fn, dim, params.n_quad);
  double lambda = params.lambda;
  if (std::abs(lambda) * norm > 0.5) lambda = std::copysign(0.5 / norm, lambda);

  int retries = 0;
  std::unique_ptr<NystromSolver> solver;
  for (;;) {
    try {
      solver = std::make_unique<NystromSolver>(params.kind, lambda, kernel_fn, dim, params.n_quad);
      break;
    } catch (const SingularSystemError&) {
      if (retries == 3) throw;
      ++retries;
      lambda *= 0.5;
    }
  }

  const Eigen::VectorXd times = linspace(params.t_min, params.t_max, params.n_points);
  const Eigen::VectorXd mapped = time_map.to_cheb(times);

  Dataset ds;
  ds.samples.resize(std::size_t(params.n_samples));
  for (int n = 0; n < params.n_samples; ++n) {
    std::mt19937_64 rng = derived_rng(params.seed, kIESampleStream, std::uint64_t(n));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ChebCoeffs f = base;
    for (int c = 0; c < dim; ++c) f(0, c) += params.spread * u(rng);
    for (int j = 1; j < 4; ++j) {
      for (int c = 0; c < dim; ++c) f(j, c) += params.jitter * u(rng);
    }
    const FreeTerm free_term = [&f](double t) { return Eigen::VectorXd(eval_series(f, t)); };
    Trajectory traj = solver->solve(free_term, mapped);
    traj.times = times;
    if (params.noise_sigma > 0.0) {
      std::normal_distribution<double> noise(0.0, params.noise_sigma);
      for (Eigen::Index i = 0; i < traj.values.rows(); ++i) {
        for (Eigen::Index c = 0; c < traj.values.cols(); ++c) traj.values(i, c) += noise(rng);
      }
    }
    ds.samples[std::size_t(n)] = std::move(traj);
  }

  ds.meta.kind = DatasetKind::SyntheticIE;
  ds.meta.dim = dim;
  ds.meta.n_points = params.n_points;
  ds.meta.t_min = params.t_min;
  ds.meta.t_max = params.t_max;
  ds.meta.noise_sigma = params.noise_sigma;
  ds.meta.seed = params.seed;
  auto& g = ds.meta.generator;
  g["equation"] = to_string(params.kind);
  g["lambda_requested"] = params.lambda;
  g["lambda"] = lambda;
  g["lambda_retries"] = retries;
  g["operator_norm"] = norm;
  g["n_quad"] = params.n_quad;
  g["spread"] = params.spread;
  g["jitter"] = params.jitter;
  g["kernel"] = {{"form", "a*tanh(b*t + c*s) + e*sech(g*s)"},
                 {"a", matrix_json(kernel.a)},
                 {"b", matrix_json(kernel.b)},
                 {"c", matrix_json(kernel.c)},
                 {"e", matrix_json(kernel.e)},
                 {"g", matrix_json(kernel.g)}};
  g["free_term_base"] = matrix_json(base);
  return ds;
}

// ---------------------------------------------------------------------------
// Delay network dataset

DelayNetSpec DelayNetSpec::random(int n_nodes, std::uint64_t seed, double gain, double max_delay) {
  if (n_nodes < 1) throw InvalidArgument("delay net needs n_nodes >= 1");
  std::mt19937_64 rng = derived_rng(seed, kDelaySpecStream, 0);
  std::normal_distribution<double> normal(0.0, gain / std::sqrt(double(n_nodes)));
  std::uniform_real_distribution<double> delay(0.0, max_delay);
  std::uniform_real_distribution<double> pattern(-1.0, 1.0);
  DelayNetSpec spec;
  spec.n_nodes = n_nodes;
  spec.coupling.resize(n_nodes, n_nodes);
  spec.delays.resize(n_nodes, n_nodes);
  spec.stimulus_pattern.resize(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    for (int j = 0; j < n_nodes; ++j) spec.coupling(i, j) = normal(rng);
  }
  for (int i = 0; i < n_nodes; ++i) {
    for (int j = 0; j < n_nodes; ++j) spec.delays(i, j) = delay(rng);
  }
  for (int i = 0; i < n_nodes; ++i) spec.stimulus_pattern(i) = pattern(rng);
  spec.seed = seed;
  spec.gain = gain;
  spec.max_delay = max_delay;
  return spec;
}

void DelayNetSpec::validate() const {
  if (n_nodes < 1) throw InvalidArgument("delay net needs n_nodes >= 1");
  if (coupling.rows() != n_nodes || coupling.cols() != n_nodes) {
    throw InvalidArgument("delay net coupling must be n x n");
  }
  if (delays.rows() != n_nodes || delays.cols() != n_nodes) {
    throw InvalidArgument("delay net delays must be n x n");
  }
  if (stimulus_pattern.size() != n_nodes) throw InvalidArgument("stimulus pattern must have n entries");
  if (!coupling.allFinite()) throw InvalidArgument("delay net coupling must be finite");
  if (!delays.allFinite() || delays.minCoeff() < 0.0) {
    throw InvalidArgument("delay net delays must be finite and >= 0");
  }
  if (!(step > 0.0)) throw InvalidArgument("delay net step must be > 0");
  if (!(horizon > 0.0)) throw InvalidArgument("delay net horizon must be > 0");
}

Trajectory simulate_delay_net(const DelayNetSpec& spec, const Eigen::VectorXd& x0, int n_points,
                              long sample_index) {
  spec.validate();
  if (n_points < 2) throw InvalidArgument("delay net needs n_points >= 2");
  const int n = spec.n_nodes;
  if (x0.size() != n) throw InvalidArgument("initial history has wrong dimension");
  const double h = spec.step;
  const long steps = std::lround(spec.horizon / h);

  // Delayed samples x_j(t_k - D_ij) = (1-r) x_j[k-q] + r x_j[k-q-1].
  Eigen::MatrixXi lag(n, n);
  Eigen::MatrixXd frac(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double q = spec.delays(i, j) / h;
      lag(i, j) = int(std::floor(q));
      frac(i, j) = q - std::floor(q);
    }
  }

  Eigen::MatrixXd history(n, steps + 1);  // column k is the state at t = k h
  history.col(0) = x0;
  auto state_at = [&](long k, int j) { return k < 0 ? x0(j) : history(j, k); };

  Eigen::VectorXd drive(n);
  for (long k = 0; k < steps; ++k) {
    const double t = double(k) * h;
    for (int i = 0; i < n; ++i) {
      double sum = 0.0;
      for (int j = 0; j < n; ++j) {
        const long idx = k - lag(i, j);
        const double r = frac(i, j);
        const double delayed = r == 0.0 ? state_at(idx, j)
                                        : (1.0 - r) * state_at(idx, j) + r * state_at(idx - 1, j);
        sum += spec.coupling(i, j) * std::tanh(delayed);
      }
      drive(i) = sum;
    }
    if (t >= spec.stimulus_onset) drive += spec.stimulus_amplitude * spec.stimulus_pattern;
    history.col(k + 1) = history.col(k) + h * (drive - spec.decay * history.col(k));
    if (!history.col(k + 1).allFinite() ||
        history.col(k + 1).cwiseAbs().maxCoeff() > kDivergenceBound) {
      throw DivergedError("delay net diverged in sample " + std::to_string(sample_index) +
                              " at t=" + std::to_string(t + h),
                          sample_index);
    }
  }

  Trajectory traj;
  traj.times = linspace(0.0, spec.horizon, n_points);
  traj.values.resize(n_points, n);
  for (int p = 0; p < n_points; ++p) {
    const long k = std::min(steps, std::lround(traj.times(p) / h));
    traj.values.row(p) = history.col(k).transpose();
  }
  return traj;
}

Dataset gen_delay_dataset(const DelayNetSpec& spec, int n_samples, int n_points,
                          std::uint64_t seed) {
  spec.validate();
  if (n_samples < 1) throw InvalidArgument("gen_delay_dataset: n_samples must be >= 1");
  Dataset ds;
  ds.samples.resize(std::size_t(n_samples));
  for (int s = 0; s < n_samples; ++s) {
    std::mt19937_64 rng = derived_rng(seed, kDelaySampleStream, std::uint64_t(s));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd x0(spec.n_nodes);
    for (int i = 0; i < spec.n_nodes; ++i) x0(i) = u(rng);
    ds.samples[std::size_t(s)] = simulate_delay_net(spec, x0, n_points, s);
  }
  ds.meta.kind = DatasetKind::DelayNet;
  ds.meta.dim = spec.n_nodes;
  ds.meta.n_points = n_points;
  ds.meta.t_min = 0.0;
  ds.meta.t_max = spec.horizon;
  ds.meta.noise_sigma = 0.0;
  ds.meta.seed = seed;
  auto& g = ds.meta.generator;
  g["model"] = "delayed tanh network (simplified stand-in for a neural mass simulator)";
  g["n_nodes"] = spec.n_nodes;
  g["spec_seed"] = spec.seed;
  g["gain"] = spec.gain;
  g["max_delay"] = spec.max_delay;
  g["decay"] = spec.decay;
  g["stimulus_amplitude"] = spec.stimulus_amplitude;
  g["stimulus_onset"] = spec.stimulus_onset;
  g["step"] = spec.step;
  g["horizon"] = spec.horizon;
  g["history"] = "constant per sample, uniform in [-1,1]";
  return ds;
}

// ---------------------------------------------------------------------------
// Downsampling and splits

DownsampleMode parse_downsample(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  try {
    if (parts.size() == 2 && parts[0] == "regular") {
      const int k = std::stoi(parts[1]);
      if (k < 1) throw InvalidArgument("regular downsampling needs k >= 1");
      return RegularDownsample{k};
    }
    if ((parts.size() == 2 || parts.size() == 3) && parts[0] == "irregular") {
      IrregularDownsample mode;
      mode.fraction = std::stod(parts[1]);
      if (parts.size() == 3) mode.seed = std::stoull(parts[2]);
      if (!(mode.fraction > 0.0 && mode.fraction <= 1.0)) {
        throw InvalidArgument("irregular fraction must lie in (0,1]");
      }
      return mode;
    }
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const InvalidArgument*>(&e)) throw;
  }
  throw InvalidArgument("bad downsample spec '" + text +
                        "' (expected regular:K or irregular:P[:SEED])");
}

std::string to_string(const DownsampleMode& mode) {
  if (const auto* r = std::get_if<RegularDownsample>(&mode)) {
    return "regular:" + std::to_string(r->keep_every);
  }
  const auto& irr = std::get<IrregularDownsample>(mode);
  std::ostringstream out;
  out << "irregular:" << irr.fraction << ":" << irr.seed;
  return out.str();
}

namespace {

std::vector<Eigen::Index> kept_indices(Eigen::Index n, const DownsampleMode& mode,
                                       std::size_t sample) {
  std::vector<Eigen::Index> keep;
  if (const auto* r = std::get_if<RegularDownsample>(&mode)) {
    if (r->keep_every < 1) throw InvalidArgument("regular downsampling needs k >= 1");
    for (Eigen::Index i = 0; i < n; i += r->keep_every) keep.push_back(i);
  } else {
    const auto& irr = std::get<IrregularDownsample>(mode);
    const auto target = Eigen::Index(std::ceil(irr.fraction * double(n) - 1e-9));
    if (target < 2) {
      throw InvalidArgument("irregular fraction " + std::to_string(irr.fraction) +
                            " keeps fewer than 2 points");
    }
    std::vector<Eigen::Index> interior(std::size_t(std::max<Eigen::Index>(n - 2, 0)));
    std::iota(interior.begin(), interior.end(), 1);
    std::mt19937_64 rng = derived_rng(irr.seed, 6, sample);
    std::shuffle(interior.begin(), interior.end(), rng);
    interior.resize(std::size_t(std::min<Eigen::Index>(target - 2, Eigen::Index(interior.size()))));
    keep.push_back(0);
    keep.insert(keep.end(), interior.begin(), interior.end());
    keep.push_back(n - 1);
    std::sort(keep.begin(), keep.end());
  }
  if (keep.size() < 2) throw InvalidArgument("downsampling keeps fewer than 2 points");
  return keep;
}

}  // namespace

Dataset downsample(const Dataset& ds, const DownsampleMode& mode) {
  Dataset out;
  out.meta = ds.meta;
  out.samples.reserve(ds.samples.size());
  for (std::size_t s = 0; s < ds.samples.size(); ++s) {
    const Trajectory& traj = ds.samples[s];
    const auto keep = kept_indices(traj.size(), mode, s);
    Trajectory t;
    t.times.resize(Eigen::Index(keep.size()));
    t.values.resize(Eigen::Index(keep.size()), traj.dim());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      t.times(Eigen::Index(i)) = traj.times(keep[i]);
      t.values.row(Eigen::Index(i)) = traj.values.row(keep[i]);
    }
    out.samples.push_back(std::move(t));
  }
  if (!out.samples.empty()) out.meta.n_points = int(out.samples.front().size());
  out.meta.generator["downsample"] = to_string(mode);
  return out;
}

DatasetSplit split(const Dataset& ds, const SplitFractions& fractions, std::uint64_t seed) {
  const double sum = fractions.train + fractions.val + fractions.test;
  if (!(fractions.train > 0.0 && fractions.val > 0.0 && fractions.test > 0.0) ||
      std::abs(sum - 1.0) > 1e-9) {
    throw InvalidArgument("split fractions must be positive and sum to 1");
  }
  const std::size_t n = ds.samples.size();
  const auto n_train = std::size_t(std::llround(fractions.train * double(n)));
  const auto n_val = std::size_t(std::llround(fractions.val * double(n)));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= n) {
    throw InvalidArgument("split of " + std::to_string(n) + " samples leaves an empty part");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng = derived_rng(seed, 7, 0);
  std::shuffle(order.begin(), order.end(), rng);

  DatasetSplit out;
  auto take = [&](Dataset& part, std::size_t begin, std::size_t end) {
    part.meta = ds.meta;
    std::vector<std::size_t> idx(order.begin() + long(begin), order.begin() + long(end));
    std::sort(idx.begin(), idx.end());
    for (std::size_t i : idx) part.samples.push_back(ds.samples[i]);
  };
  take(out.train, 0, n_train);
  take(out.val, n_train, n_train + n_val);
  take(out.test, n_train + n_val, n);
  return out;
}

}  // namespace snie
