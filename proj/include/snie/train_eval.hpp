#pragma once

// Training with validation-based early stopping, evaluation and the
// interpolation / Monte Carlo trade-off experiments.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "snie/chebyshev.hpp"
#include "snie/datagen.hpp"
#include "snie/neural.hpp"

namespace snie {

struct TrainConfig {
  double lr = 1e-3;
  int batch_size = 32;
  int max_epochs = 1000;
  int patience_epochs = 200;
  double walltime_cap_s = 3600.0;
  int n_init_points = 2;
  /// Highest degree of the least-squares free-term fit (capped by p - 1).
  int free_term_degree = 2;
  int mc_samples = 1000;
  std::uint64_t seed = 0;
  SolverConfig solver;
  std::vector<int> hidden = {64, 64};
  int n = 16;  ///< Chebyshev degree N
  EquationKind kind = EquationKind::Fredholm;
  double lambda = 1.0;
  SplitFractions split;
  int threads = 1;

  void validate() const;
  ProblemTemplate problem() const { return {kind, lambda}; }
};

struct EpochRecord {
  int epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
  double walltime_s = 0.0;
};

struct Metrics {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  ///< 0 = initial parameters
  double best_val_mse = 0.0;
  double test_mse_mean = 0.0;
  double test_mse_std = 0.0;
  std::vector<double> per_sample_mse;
  double walltime_s = 0.0;
  std::size_t memory_bytes = 0;
  Eigen::Index n_params = 0;
  /// Mean squared gap between Monte Carlo projections of the training
  /// trajectories and the data (how well N modes can represent the targets).
  double projection_mse = 0.0;
  std::string status;
};

/// Least-squares Chebyshev fit of degree min(p-1, max_degree) to the first p
/// points (times already mapped to [-1,1]), zero-padded to n+1 modes.
ChebCoeffs make_free_term(const Eigen::VectorXd& mapped_times, const Eigen::MatrixXd& values, int n,
                          int max_degree = 2);

/// Projects the piecewise-linear interpolant of a trajectory with project_mc.
ChebCoeffs project_trajectory(const Trajectory& traj, const TimeMap& time_map, int n,
                              int mc_samples, std::uint64_t seed);

/// Bytes held by one project_trajectory call.
std::size_t projection_buffer_bytes(int n, int dim, int mc_samples);

/// Free term from the first p observations and all observations as targets.
Sample make_sample(const Trajectory& traj, const TimeMap& time_map, const TrainConfig& config);

MLPParams init_model(const TrainConfig& config, int dim, std::uint64_t seed);

/// Trains from `model`; returns the best-validation parameters.
std::pair<MLPParams, Metrics> train(const MLPParams& model, const Dataset& train_set,
                                    const Dataset& val_set, const TrainConfig& config);

/// Solves every sample from its init points and scores all observed points.
Metrics evaluate(const MLPParams& model, const Dataset& ds, const TrainConfig& config);

/// Solves from the init points of downsample(ds_full, mode) and scores every
/// time stamp of ds_full.
Metrics interpolation_eval(const MLPParams& model, const Dataset& ds_full,
                           const DownsampleMode& mode, const TrainConfig& config);

/// Solution coefficients for one trajectory's init points.
ChebCoeffs predict_coefficients(const MLPParams& model, const Trajectory& init_source,
                                const TimeMap& time_map, const TrainConfig& config);

struct BenchmarkCase {
  std::string name;
  TrainConfig config;
  std::optional<DownsampleMode> interp;  ///< when set, also train on downsampled data
};

struct BenchmarkRow {
  std::string name;
  Eigen::Index params = 0;
  int mc_samples = 0;
  std::size_t memory_bytes = 0;
  double walltime_s = 0.0;
  double test_mse_mean = 0.0;
  double test_mse_std = 0.0;
  double interp_mse_mean = 0.0;
  double interp_mse_std = 0.0;
  std::string error;  ///< non-empty when the row failed
};

/// Train + evaluate per case on a shared dataset. Failures are recorded per row.
std::vector<BenchmarkRow> benchmark(const std::vector<BenchmarkCase>& cases, const Dataset& data);

}  // namespace snie
