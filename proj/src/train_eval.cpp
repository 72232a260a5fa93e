#include "snie/train_eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace snie {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kShuffleStream = 8;
constexpr double kImprovement = 1e-7;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

TimeMap time_map_of(const Dataset& ds) { return TimeMap(ds.meta.t_min, ds.meta.t_max); }

void summarize(Metrics& m) {
  const auto& v = m.per_sample_mse;
  if (v.empty()) return;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  m.test_mse_mean = mean;
  m.test_mse_std = std::sqrt(var / double(v.size()));
}

/// MSE over every point of `target` for the solution built from the init
/// points of `source`. Non-finite solves score +inf.
double score(const MLPParams& model, const PicardOperator& op, const Trajectory& source,
             const Trajectory& target, const TimeMap& time_map, const TrainConfig& config) {
  const Sample sample = make_sample(source, time_map, config);
  try {
    const SolveResult solved = solve_neural(model, config.problem(), sample.f, op, config.solver);
    const Eigen::VectorXd times = time_map.to_cheb(target.times);
    const Eigen::MatrixXd pred = evaluation_matrix(model.n_modes, times) * solved.u;
    return (pred - target.values).squaredNorm() / double(target.values.size());
  } catch (const NonFiniteError&) {
    return std::numeric_limits<double>::infinity();
  }
}

void check_model(const MLPParams& model, const Dataset& ds, const TrainConfig& config) {
  if (model.dim != ds.meta.dim) {
    throw InvalidArgument("model has " + std::to_string(model.dim) + " channels, dataset has " +
                          std::to_string(ds.meta.dim));
  }
  if (model.n_modes != config.n + 1) {
    throw InvalidArgument("model has " + std::to_string(model.n_modes) +
                          " modes, config expects N+1 = " + std::to_string(config.n + 1));
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw InvalidArgument("lr must be > 0");
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (max_epochs < 0) throw InvalidArgument("max_epochs must be >= 0");
  if (patience_epochs < 1) throw InvalidArgument("patience must be >= 1");
  if (!(walltime_cap_s > 0.0)) throw InvalidArgument("walltime cap must be > 0");
  if (n_init_points < 2) throw InvalidArgument("init_points must be >= 2");
  if (free_term_degree < 0) throw InvalidArgument("free_term_degree must be >= 0");
  if (mc_samples < 1) throw InvalidArgument("mc_samples must be >= 1");
  if (n < 1) throw InvalidArgument("N must be >= 1");
  if (threads < 1) throw InvalidArgument("threads must be >= 1");
  for (int h : hidden) {
    if (h < 1) throw InvalidArgument("hidden widths must be >= 1");
  }
  solver.validate();
}

ChebCoeffs make_free_term(const Eigen::VectorXd& mapped_times, const Eigen::MatrixXd& values, int n,
                          int max_degree) {
  const Eigen::Index p = mapped_times.size();
  if (p < 2) throw InvalidArgument("make_free_term needs at least 2 points");
  if (values.rows() != p) throw InvalidArgument("make_free_term: value/time count mismatch");
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      if (mapped_times(i) == mapped_times(j)) throw InvalidArgument("make_free_term: duplicate times");
    }
  }
  const int degree = int(std::min<Eigen::Index>({p - 1, max_degree, n}));
  const Eigen::MatrixXd basis = evaluation_matrix(degree + 1, mapped_times);
  const Eigen::MatrixXd fit = basis.colPivHouseholderQr().solve(values);
  ChebCoeffs f = ChebCoeffs::Zero(n + 1, values.cols());
  f.topRows(degree + 1) = fit;
  return f;
}

ChebCoeffs project_trajectory(const Trajectory& traj, const TimeMap& time_map, int n,
                              int mc_samples, std::uint64_t seed) {
  traj.validate();
  const Eigen::VectorXd x = time_map.to_cheb(traj.times);
  const Eigen::Index m = x.size();
  auto interpolant = [&](double s) -> Eigen::VectorXd {
    if (s <= x(0)) return traj.values.row(0).transpose();
    if (s >= x(m - 1)) return traj.values.row(m - 1).transpose();
    const auto it = std::upper_bound(x.data(), x.data() + m, s);
    const Eigen::Index hi = it - x.data();
    const Eigen::Index lo = hi - 1;
    const double w = (s - x(lo)) / (x(hi) - x(lo));
    return ((1.0 - w) * traj.values.row(lo) + w * traj.values.row(hi)).transpose();
  };
  return project_mc(interpolant, n, mc_samples, seed);
}

std::size_t projection_buffer_bytes(int n, int dim, int mc_samples) {
  return std::size_t(mc_samples) * std::size_t(1 + dim + n + 1) * sizeof(double);
}

Sample make_sample(const Trajectory& traj, const TimeMap& time_map, const TrainConfig& config) {
  const int p = config.n_init_points;
  if (traj.size() < p) {
    throw InvalidArgument("trajectory has " + std::to_string(traj.size()) + " points, fewer than " +
                          std::to_string(p) + " init points");
  }
  Sample sample;
  sample.target_times = time_map.to_cheb(traj.times);
  sample.targets = traj.values;
  sample.f = make_free_term(sample.target_times.head(p), traj.values.topRows(p), config.n,
                            config.free_term_degree);
  return sample;
}

MLPParams init_model(const TrainConfig& config, int dim, std::uint64_t seed) {
  const auto spec = make_layer_specs(config.n + 1, dim, config.hidden);
  return init_params(spec, config.n + 1, dim, seed);
}

ChebCoeffs predict_coefficients(const MLPParams& model, const Trajectory& init_source,
                                const TimeMap& time_map, const TrainConfig& config) {
  const Sample sample = make_sample(init_source, time_map, config);
  const PicardOperator op(config.kind, cheb_nodes(config.n));
  return solve_neural(model, config.problem(), sample.f, op, config.solver).u;
}

Metrics evaluate(const MLPParams& model, const Dataset& ds, const TrainConfig& config) {
  return interpolation_eval(model, ds, RegularDownsample{1}, config);
}

Metrics interpolation_eval(const MLPParams& model, const Dataset& ds_full,
                           const DownsampleMode& mode, const TrainConfig& config) {
  config.validate();
  check_model(model, ds_full, config);
  const auto start = Clock::now();
  const Dataset reduced = downsample(ds_full, mode);
  const TimeMap time_map = time_map_of(ds_full);
  const PicardOperator op(config.kind, cheb_nodes(config.n));
  Metrics m;
  m.n_params = model.total_params();
  for (std::size_t i = 0; i < ds_full.samples.size(); ++i) {
    m.per_sample_mse.push_back(
        score(model, op, reduced.samples[i], ds_full.samples[i], time_map, config));
  }
  summarize(m);
  m.walltime_s = seconds_since(start);
  m.status = "evaluated";
  return m;
}

std::pair<MLPParams, Metrics> train(const MLPParams& model, const Dataset& train_set,
                                    const Dataset& val_set, const TrainConfig& config) {
  config.validate();
  check_model(model, train_set, config);
  check_model(model, val_set, config);
  if (train_set.samples.empty() || val_set.samples.empty()) {
    throw InvalidArgument("train and validation sets must be non-empty");
  }
  if (train_set.meta.t_min != val_set.meta.t_min || train_set.meta.t_max != val_set.meta.t_max) {
    throw InvalidArgument("train and validation sets must share the time range");
  }
  const auto start = Clock::now();
  const TimeMap time_map = time_map_of(train_set);
  const std::size_t n_train = train_set.samples.size();

  std::vector<Sample> samples;
  samples.reserve(n_train);
  for (const auto& traj : train_set.samples) samples.push_back(make_sample(traj, time_map, config));

  Metrics metrics;
  metrics.n_params = model.total_params();

  // Target-side diagnostic: how well N modes represent the observed curves.
  double projection_gap = 0.0;
  for (std::size_t i = 0; i < n_train; ++i) {
    const Trajectory& traj = train_set.samples[i];
    const ChebCoeffs proj =
        project_trajectory(traj, time_map, config.n, config.mc_samples, config.seed + i);
    const Eigen::MatrixXd fitted = evaluation_matrix(config.n + 1, samples[i].target_times) * proj;
    projection_gap += (fitted - traj.values).squaredNorm() / double(traj.values.size());
  }
  metrics.projection_mse = projection_gap / double(n_train);

  const PicardOperator op(config.kind, cheb_nodes(config.n));
  MLPParams params = model;
  MLPParams best = model;
  std::size_t peak_tape = 0;

  metrics.status = "max_epochs";
  if (config.max_epochs > 0) {
    metrics.best_val_mse = evaluate(params, val_set, config).test_mse_mean;
    AdamState adam = AdamState::for_params(params, config.lr);
    std::vector<std::size_t> order(n_train);
    std::vector<Sample> batch;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
      std::iota(order.begin(), order.end(), 0);
      std::mt19937_64 rng = derived_rng(config.seed, kShuffleStream, std::uint64_t(epoch));
      std::shuffle(order.begin(), order.end(), rng);

      double loss_sum = 0.0;
      bool failed = false;
      try {
        for (std::size_t b = 0; b < n_train; b += std::size_t(config.batch_size)) {
          const std::size_t end = std::min(n_train, b + std::size_t(config.batch_size));
          batch.clear();
          for (std::size_t i = b; i < end; ++i) batch.push_back(samples[order[i]]);
          const LossGrad lg =
              loss_and_grad(params, config.problem(), batch, op, config.solver, config.threads);
          adam_step(params, lg.grad, adam);
          if (!params.all_finite()) throw NonFiniteError("parameters became non-finite");
          loss_sum += lg.loss * double(batch.size());
          peak_tape = std::max(peak_tape, lg.peak_tape_bytes);
        }
      } catch (const NonFiniteError&) {
        failed = true;
      }
      if (failed) {
        metrics.status = "nonfinite";
        break;
      }

      EpochRecord rec;
      rec.epoch = epoch;
      rec.train_mse = loss_sum / double(n_train);
      rec.val_mse = evaluate(params, val_set, config).test_mse_mean;
      rec.walltime_s = seconds_since(start);
      metrics.epochs.push_back(rec);

      if (rec.val_mse < metrics.best_val_mse - kImprovement) {
        metrics.best_val_mse = rec.val_mse;
        metrics.best_epoch = epoch;
        best = params;
      } else if (epoch - metrics.best_epoch >= config.patience_epochs) {
        metrics.status = "early_stop";
        break;
      }
      if (rec.walltime_s > config.walltime_cap_s) {
        metrics.status = "walltime";
        break;
      }
    }
  }

  const std::size_t param_bytes = std::size_t(model.total_params()) * sizeof(double);
  // params, best copy, gradient and two Adam moments
  metrics.memory_bytes = 5 * param_bytes + train_set.bytes() + val_set.bytes() +
                         peak_tape * std::size_t(config.threads) +
                         projection_buffer_bytes(config.n, train_set.meta.dim, config.mc_samples);
  metrics.walltime_s = seconds_since(start);
  return {best, metrics};
}

std::vector<BenchmarkRow> benchmark(const std::vector<BenchmarkCase>& cases, const Dataset& data) {
  std::vector<BenchmarkRow> rows;
  for (const auto& c : cases) {
    BenchmarkRow row;
    row.name = c.name;
    row.mc_samples = c.config.mc_samples;
    row.interp_mse_mean = std::numeric_limits<double>::quiet_NaN();
    row.interp_mse_std = std::numeric_limits<double>::quiet_NaN();
    try {
      const DatasetSplit parts = split(data, c.config.split, c.config.seed);
      const MLPParams init = init_model(c.config, data.meta.dim, c.config.seed);
      auto [model, metrics] = train(init, parts.train, parts.val, c.config);
      const Metrics test = evaluate(model, parts.test, c.config);
      row.params = metrics.n_params;
      row.memory_bytes = metrics.memory_bytes;
      row.walltime_s = metrics.walltime_s;
      row.test_mse_mean = test.test_mse_mean;
      row.test_mse_std = test.test_mse_std;
      if (c.interp) {
        auto [interp_model, interp_metrics] = train(init, downsample(parts.train, *c.interp),
                                                    downsample(parts.val, *c.interp), c.config);
        const Metrics interp = interpolation_eval(interp_model, parts.test, *c.interp, c.config);
        row.interp_mse_mean = interp.test_mse_mean;
        row.interp_mse_std = interp.test_mse_std;
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace snie
