#pragma once

// Spectral-domain integrand network and its training machinery.
//
// The network maps (vec(u), t) -> vec(b): the column-major flattened iterate
// coefficients plus the evaluation time, to the flattened coefficients of the
// integrand expansion at that time. Gradients are computed by replaying the
// unrolled Picard iterations in reverse.

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "snie/chebyshev.hpp"
#include "snie/ie_core.hpp"

namespace snie {

enum class Activation { Tanh, Identity };

struct LayerSpec {
  int in_dim = 0;
  int out_dim = 0;
  Activation activation = Activation::Tanh;

  bool operator==(const LayerSpec&) const = default;
};

struct Layer {
  Eigen::MatrixXd weight;  ///< out x in
  Eigen::VectorXd bias;
  Activation activation = Activation::Tanh;
};

struct MLPParams {
  std::vector<Layer> layers;
  int n_modes = 0;  ///< N + 1
  int dim = 0;

  Eigen::Index total_params() const;
  std::vector<LayerSpec> spec() const;
  int input_width() const { return n_modes * dim + 1; }
  int output_width() const { return n_modes * dim; }

  /// Layer by layer: weights row-major, then bias.
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);
  bool all_finite() const;
};

/// Tanh hidden layers of the given widths followed by an Identity output layer.
std::vector<LayerSpec> make_layer_specs(int n_modes, int dim, std::span<const int> hidden);

/// Glorot-uniform weights, zero biases. Deterministic per seed.
MLPParams init_params(std::span<const LayerSpec> spec, int n_modes, int dim, std::uint64_t seed);
MLPParams zero_params(std::span<const LayerSpec> spec, int n_modes, int dim);

/// Activations X_0..X_L of one batched network call (columns are evaluation times).
struct TapeRecord {
  std::vector<Eigen::MatrixXd> activations;
};

/// Forward intermediates of every network call made while solving one sample,
/// in call order. The Picard solver makes one batched call per iteration.
struct Tape {
  std::vector<TapeRecord> records;

  bool empty() const { return records.empty(); }
  void clear() { records.clear(); }
  std::size_t bytes() const;
};

ChebCoeffs forward(const MLPParams& params, const ChebCoeffs& u, double t, Tape* tape = nullptr);

/// Output column i is vec(b_i) for evaluation time ts(i).
Eigen::MatrixXd forward_batch(const MLPParams& params, const ChebCoeffs& u,
                              const Eigen::VectorXd& ts, Tape* tape = nullptr);

/// Backpropagates d(loss)/d(output) through one recorded call. Accumulates the
/// parameter gradient into `grad` (flatten() layout) and returns
/// d(loss)/d(input), in x columns.
Eigen::MatrixXd backward_batch(const MLPParams& params, const TapeRecord& record,
                               const Eigen::MatrixXd& grad_output, Eigen::VectorXd& grad);

class NeuralIntegrand final : public IntegrandEvaluator {
 public:
  explicit NeuralIntegrand(const MLPParams& params, Tape* tape = nullptr)
      : params_(params), tape_(tape) {}

  ChebCoeffs spectral_integrand(const ChebCoeffs& u, double t) const override;
  std::vector<ChebCoeffs> spectral_integrands(const ChebCoeffs& u,
                                              const Eigen::VectorXd& ts) const override;

 private:
  const MLPParams& params_;
  Tape* tape_;
};

/// Equation settings shared by every sample of a training problem.
struct ProblemTemplate {
  EquationKind kind = EquationKind::Fredholm;
  double lambda = 1.0;
};

/// One training sample: free term plus observations at mapped times in [-1,1].
struct Sample {
  ChebCoeffs f;
  Eigen::VectorXd target_times;
  Eigen::MatrixXd targets;  ///< |target_times| x d
};

/// Solves the neural equation for the free term f.
SolveResult solve_neural(const MLPParams& params, const ProblemTemplate& problem,
                         const ChebCoeffs& f, const PicardOperator& op,
                         const SolverConfig& config, Tape* tape = nullptr);

/// Mean squared error of the solution interpolated at the sample's target times.
double sample_loss(const MLPParams& params, const ProblemTemplate& problem, const Sample& sample,
                   const PicardOperator& op, const SolverConfig& config);

/// Batch-mean loss without taping.
double batch_loss(const MLPParams& params, const ProblemTemplate& problem,
                  std::span<const Sample> batch, const PicardOperator& op,
                  const SolverConfig& config);

/// Reverse replay of a taped solve. `grad_solution` is d(loss)/d(u_K); the
/// result is d(loss)/d(params) in flatten() layout. An empty tape yields zeros.
Eigen::VectorXd reverse_solve(const MLPParams& params, const ProblemTemplate& problem,
                              const PicardOperator& op, const SolverConfig& config,
                              const Tape& tape, const ChebCoeffs& grad_solution);

struct LossGrad {
  double loss = 0.0;
  Eigen::VectorXd grad;
  std::vector<int> iterations;  ///< unrolled solver iterations per sample
  std::size_t peak_tape_bytes = 0;
};

/// Batch-mean MSE and its parameter gradient through the unrolled solver.
/// Samples are processed on up to `threads` workers; the reduction runs in
/// sample order so the result does not depend on the thread count.
/// Throws NonFiniteError carrying the offending sample index.
LossGrad loss_and_grad(const MLPParams& params, const ProblemTemplate& problem,
                       std::span<const Sample> batch, const PicardOperator& op,
                       const SolverConfig& config, int threads = 1);

struct AdamState {
  long step = 0;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_params(const MLPParams& params, double lr = 1e-3);
};

void adam_step(MLPParams& params, const Eigen::VectorXd& grad, AdamState& state);

}  // namespace snie
