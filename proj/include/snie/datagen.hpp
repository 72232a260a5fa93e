#pragma once

// Synthetic trajectory datasets: integral-equation solutions with hyperbolic
// kernels (solved by a Nystrom oracle) and a delayed tanh network.

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "snie/ie_core.hpp"

namespace snie {

struct Trajectory {
  Eigen::VectorXd times;   ///< strictly increasing, data units
  Eigen::MatrixXd values;  ///< |times| x d

  Eigen::Index size() const { return times.size(); }
  Eigen::Index dim() const { return values.cols(); }
  /// Throws SchemaError naming the violated invariant.
  void validate() const;
};

enum class DatasetKind { SyntheticIE, DelayNet };

const char* to_string(DatasetKind kind);
DatasetKind dataset_kind_from_string(const std::string& name);

struct DatasetMeta {
  DatasetKind kind = DatasetKind::SyntheticIE;
  int dim = 0;
  int n_points = 0;
  double t_min = 0.0;
  double t_max = 1.0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  nlohmann::ordered_json generator = nlohmann::ordered_json::object();
};

struct Dataset {
  std::vector<Trajectory> samples;
  DatasetMeta meta;

  std::size_t size() const { return samples.size(); }
  void validate() const;
  std::size_t bytes() const;
};

/// Point evaluator t -> R^d and matrix kernel (t, s) -> R^{d x d} on [-1,1].
using FreeTerm = std::function<Eigen::VectorXd(double t)>;
using MatrixKernel = std::function<Eigen::MatrixXd(double t, double s)>;

/// Nystrom discretisation of y = f + lambda int K(t,s) y(s) ds with the
/// trapezoid rule on n_quad uniform points of [-1,1] (causal trapezoid rows for
/// Volterra). The system is factored once and reused for every free term.
class NystromSolver {
 public:
  NystromSolver(EquationKind kind, double lambda, const MatrixKernel& kernel, int dim, int n_quad);

  /// Solution at the quadrature nodes, n_quad x d.
  Eigen::MatrixXd solve_nodes(const FreeTerm& f) const;
  /// Solution at arbitrary times in [-1,1] by barycentric rational
  /// (Floater-Hormann) interpolation of the node values.
  Trajectory solve(const FreeTerm& f, const Eigen::VectorXd& times) const;

  const Eigen::VectorXd& nodes() const { return nodes_; }
  /// Infinity norm of the discretised integral operator (without lambda).
  double operator_norm() const { return operator_norm_; }

 private:
  int dim_;
  Eigen::VectorXd nodes_;
  double operator_norm_ = 0.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

/// Infinity norm of the trapezoid-discretised integral operator (lambda = 1).
double nystrom_operator_norm(EquationKind kind, const MatrixKernel& kernel, int dim, int n_quad);

Trajectory nystrom_solve(EquationKind kind, double lambda, const FreeTerm& f,
                         const MatrixKernel& kernel, int dim, int n_quad,
                         const Eigen::VectorXd& times);

/// Floater-Hormann rational interpolation of node values (rows) at x.
Eigen::MatrixXd barycentric_rational(const Eigen::VectorXd& nodes, const Eigen::MatrixXd& values,
                                     const Eigen::VectorXd& x, int order = 3);

struct IEDatasetParams {
  int n_samples = 100;
  int n_points = 100;
  int dim = 2;
  double lambda = 1.0;
  double noise_sigma = 0.05;
  std::uint64_t seed = 0;
  EquationKind kind = EquationKind::Fredholm;
  double t_min = 0.0;
  double t_max = 1.0;
  int n_quad = 200;
  /// Per-sample free terms are f_base + c + jitter: c shifts the constant mode
  /// uniformly in [-spread, spread]; modes 1..3 move uniformly in [-jitter, jitter].
  double spread = 1.0;
  double jitter = 0.02;
};

/// Hyperbolic kernel K_ij(t,s) = a_ij tanh(b_ij t + c_ij s) + e_ij sech(g_ij s)
/// with all coefficients drawn uniformly from [-1,1].
struct HyperbolicKernel {
  int dim = 0;
  Eigen::MatrixXd a, b, c, e, g;

  static HyperbolicKernel random(int dim, std::uint64_t seed);
  Eigen::MatrixXd operator()(double t, double s) const;
};

Dataset gen_ie_dataset(const IEDatasetParams& params);

struct DelayNetSpec {
  int n_nodes = 80;
  Eigen::MatrixXd coupling;  ///< W
  Eigen::MatrixXd delays;    ///< D, time units >= 0
  double decay = 1.0;
  double stimulus_amplitude = 0.5;
  double stimulus_onset = 2.0;
  Eigen::VectorXd stimulus_pattern;  ///< per-node stimulus weight
  double step = 0.01;
  double horizon = 10.0;
  /// Provenance of random(); recorded in dataset metadata.
  std::uint64_t seed = 0;
  double gain = 0.0;
  double max_delay = 0.0;

  /// W ~ N(0, gain^2 / n), D ~ U[0, max_delay], stimulus pattern ~ U[-1,1].
  static DelayNetSpec random(int n_nodes, std::uint64_t seed, double gain = 1.5,
                             double max_delay = 2.0);
  void validate() const;
};

/// Euler integration of
///   x_i' = -decay x_i + sum_j W_ij tanh(x_j(t - D_ij)) + stimulus_i(t)
/// with constant initial history per sample, recorded at n_points equispaced
/// snapshots of [0, horizon].
Dataset gen_delay_dataset(const DelayNetSpec& spec, int n_samples, int n_points,
                          std::uint64_t seed);

/// Trajectory of a single delay-network run from constant history x0.
Trajectory simulate_delay_net(const DelayNetSpec& spec, const Eigen::VectorXd& x0, int n_points,
                              long sample_index = 0);

struct RegularDownsample {
  int keep_every = 1;
};
struct IrregularDownsample {
  double fraction = 1.0;
  std::uint64_t seed = 0;
};
using DownsampleMode = std::variant<RegularDownsample, IrregularDownsample>;

/// Parses "regular:K" or "irregular:P[:SEED]".
DownsampleMode parse_downsample(const std::string& text);
std::string to_string(const DownsampleMode& mode);

/// Regular keeps indices 0, k, 2k, ...; irregular keeps both endpoints plus a
/// seeded uniform subset of ceil(p n) - 2 interior points.
Dataset downsample(const Dataset& ds, const DownsampleMode& mode);

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct DatasetSplit {
  Dataset train, val, test;
};

/// Seeded disjoint partition by sample.
DatasetSplit split(const Dataset& ds, const SplitFractions& fractions, std::uint64_t seed);

/// Per-sample generator stream derived from (seed, stream, index).
std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

}  // namespace snie
