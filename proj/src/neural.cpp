#include "snie/neural.hpp"

#include <cmath>
#include <exception>
#include <random>
#include <string>
#include <thread>

namespace snie {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void validate_spec(std::span<const LayerSpec> spec, int n_modes, int dim) {
  if (n_modes < 1 || dim < 1) throw InvalidArgument("network needs n_modes >= 1 and dim >= 1");
  if (spec.empty()) throw InvalidArgument("network spec is empty");
  const int in = n_modes * dim + 1;
  const int out = n_modes * dim;
  if (spec.front().in_dim != in) {
    throw InvalidArgument("first layer input width " + std::to_string(spec.front().in_dim) +
                          " != (N+1)*d+1 = " + std::to_string(in));
  }
  if (spec.back().out_dim != out) {
    throw InvalidArgument("last layer output width " + std::to_string(spec.back().out_dim) +
                          " != (N+1)*d = " + std::to_string(out));
  }
  if (spec.back().activation != Activation::Identity) {
    throw InvalidArgument("last layer must use the identity activation");
  }
  for (std::size_t l = 0; l < spec.size(); ++l) {
    if (spec[l].in_dim < 1 || spec[l].out_dim < 1) throw InvalidArgument("layer widths must be >= 1");
    if (l > 0 && spec[l].in_dim != spec[l - 1].out_dim) {
      throw InvalidArgument("layer " + std::to_string(l) + " input width does not match layer " +
                            std::to_string(l - 1) + " output width");
    }
  }
}

void check_shape(const MLPParams& params, const ChebCoeffs& u) {
  if (u.rows() != params.n_modes || u.cols() != params.dim) {
    throw InvalidArgument("network expects a " + std::to_string(params.n_modes) + "x" +
                          std::to_string(params.dim) + " iterate, got " +
                          std::to_string(u.rows()) + "x" + std::to_string(u.cols()));
  }
}

}  // namespace

Eigen::Index MLPParams::total_params() const {
  Eigen::Index total = 0;
  for (const auto& layer : layers) total += layer.weight.size() + layer.bias.size();
  return total;
}

std::vector<LayerSpec> MLPParams::spec() const {
  std::vector<LayerSpec> out;
  for (const auto& layer : layers) {
    out.push_back({int(layer.weight.cols()), int(layer.weight.rows()), layer.activation});
  }
  return out;
}

Eigen::VectorXd MLPParams::flatten() const {
  Eigen::VectorXd flat(total_params());
  Eigen::Index offset = 0;
  for (const auto& layer : layers) {
    const auto rows = layer.weight.rows();
    const auto cols = layer.weight.cols();
    Eigen::Map<RowMajorMatrix>(flat.data() + offset, rows, cols) = layer.weight;
    offset += rows * cols;
    flat.segment(offset, layer.bias.size()) = layer.bias;
    offset += layer.bias.size();
  }
  return flat;
}

void MLPParams::assign(const Eigen::VectorXd& flat) {
  if (flat.size() != total_params()) {
    throw InvalidArgument("parameter vector has " + std::to_string(flat.size()) +
                          " entries, network has " + std::to_string(total_params()));
  }
  Eigen::Index offset = 0;
  for (auto& layer : layers) {
    const auto rows = layer.weight.rows();
    const auto cols = layer.weight.cols();
    layer.weight = Eigen::Map<const RowMajorMatrix>(flat.data() + offset, rows, cols);
    offset += rows * cols;
    layer.bias = flat.segment(offset, layer.bias.size());
    offset += layer.bias.size();
  }
}

bool MLPParams::all_finite() const {
  for (const auto& layer : layers) {
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
  }
  return true;
}

std::vector<LayerSpec> make_layer_specs(int n_modes, int dim, std::span<const int> hidden) {
  std::vector<LayerSpec> spec;
  int in = n_modes * dim + 1;
  for (int width : hidden) {
    spec.push_back({in, width, Activation::Tanh});
    in = width;
  }
  spec.push_back({in, n_modes * dim, Activation::Identity});
  return spec;
}

MLPParams zero_params(std::span<const LayerSpec> spec, int n_modes, int dim) {
  validate_spec(spec, n_modes, dim);
  MLPParams params;
  params.n_modes = n_modes;
  params.dim = dim;
  for (const auto& s : spec) {
    params.layers.push_back({Eigen::MatrixXd::Zero(s.out_dim, s.in_dim),
                             Eigen::VectorXd::Zero(s.out_dim), s.activation});
  }
  return params;
}

MLPParams init_params(std::span<const LayerSpec> spec, int n_modes, int dim, std::uint64_t seed) {
  MLPParams params = zero_params(spec, n_modes, dim);
  std::mt19937_64 rng(seed);
  for (auto& layer : params.layers) {
    const double bound = std::sqrt(6.0 / double(layer.weight.rows() + layer.weight.cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = dist(rng);
    }
  }
  return params;
}

std::size_t Tape::bytes() const {
  std::size_t total = 0;
  for (const auto& record : records) {
    for (const auto& a : record.activations) total += std::size_t(a.size()) * sizeof(double);
  }
  return total;
}

Eigen::MatrixXd forward_batch(const MLPParams& params, const ChebCoeffs& u,
                              const Eigen::VectorXd& ts, Tape* tape) {
  check_shape(params, u);
  const Eigen::Index flat = u.size();
  Eigen::MatrixXd x(flat + 1, ts.size());
  const Eigen::Map<const Eigen::VectorXd> u_flat(u.data(), flat);
  for (Eigen::Index i = 0; i < ts.size(); ++i) {
    x.col(i).head(flat) = u_flat;
    x(flat, i) = ts(i);
  }
  TapeRecord record;
  for (const auto& layer : params.layers) {
    Eigen::MatrixXd z = layer.weight * x;
    z.colwise() += layer.bias;
    if (layer.activation == Activation::Tanh) z = z.array().tanh().matrix();
    if (tape) record.activations.push_back(std::move(x));
    x = std::move(z);
  }
  if (tape) {
    record.activations.push_back(x);
    tape->records.push_back(std::move(record));
  }
  return x;
}

ChebCoeffs forward(const MLPParams& params, const ChebCoeffs& u, double t, Tape* tape) {
  Eigen::VectorXd ts(1);
  ts(0) = t;
  const Eigen::MatrixXd out = forward_batch(params, u, ts, tape);
  return Eigen::Map<const Eigen::MatrixXd>(out.data(), params.n_modes, params.dim);
}

Eigen::MatrixXd backward_batch(const MLPParams& params, const TapeRecord& record,
                               const Eigen::MatrixXd& grad_output, Eigen::VectorXd& grad) {
  const std::size_t n_layers = params.layers.size();
  if (record.activations.size() != n_layers + 1) {
    throw InvalidArgument("tape record does not match the network depth");
  }
  if (grad.size() != params.total_params()) grad = Eigen::VectorXd::Zero(params.total_params());

  std::vector<Eigen::Index> offsets(n_layers);
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    offsets[l] = offset;
    offset += params.layers[l].weight.size() + params.layers[l].bias.size();
  }

  Eigen::MatrixXd delta = grad_output;
  for (std::size_t l = n_layers; l-- > 0;) {
    const Layer& layer = params.layers[l];
    if (layer.activation == Activation::Tanh) {
      delta.array() *= 1.0 - record.activations[l + 1].array().square();
    }
    const Eigen::MatrixXd& input = record.activations[l];
    const auto rows = layer.weight.rows();
    const auto cols = layer.weight.cols();
    Eigen::Map<RowMajorMatrix>(grad.data() + offsets[l], rows, cols).noalias() +=
        delta * input.transpose();
    grad.segment(offsets[l] + rows * cols, rows) += delta.rowwise().sum();
    delta = layer.weight.transpose() * delta;
  }
  return delta;
}

ChebCoeffs NeuralIntegrand::spectral_integrand(const ChebCoeffs& u, double t) const {
  return forward(params_, u, t, tape_);
}

std::vector<ChebCoeffs> NeuralIntegrand::spectral_integrands(const ChebCoeffs& u,
                                                             const Eigen::VectorXd& ts) const {
  const Eigen::MatrixXd out = forward_batch(params_, u, ts, tape_);
  std::vector<ChebCoeffs> b;
  b.reserve(ts.size());
  for (Eigen::Index i = 0; i < ts.size(); ++i) {
    b.emplace_back(Eigen::Map<const Eigen::MatrixXd>(out.col(i).data(), params_.n_modes, params_.dim));
  }
  return b;
}

SolveResult solve_neural(const MLPParams& params, const ProblemTemplate& problem,
                         const ChebCoeffs& f, const PicardOperator& op,
                         const SolverConfig& config, Tape* tape) {
  IEProblem ie;
  ie.kind = op.kind();
  ie.lambda = problem.lambda;
  ie.f = f;
  ie.integrand = std::make_shared<NeuralIntegrand>(params, tape);
  return picard_solve(ie, op, config);
}

namespace {

struct SampleResult {
  double loss = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
  std::size_t tape_bytes = 0;
};

double mse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& targets) {
  return (pred - targets).squaredNorm() / double(targets.size());
}

void check_sample(const MLPParams& params, const Sample& sample) {
  if (sample.targets.rows() != sample.target_times.size() || sample.targets.cols() != params.dim) {
    throw InvalidArgument("sample targets do not match target times or channel count");
  }
  if (sample.targets.size() == 0) throw InvalidArgument("sample has no targets");
}

SampleResult sample_loss_grad(const MLPParams& params, const ProblemTemplate& problem,
                              const Sample& sample, const PicardOperator& op,
                              const SolverConfig& config) {
  check_sample(params, sample);
  Tape tape;
  const SolveResult solved = solve_neural(params, problem, sample.f, op, config, &tape);
  const Eigen::MatrixXd e = evaluation_matrix(params.n_modes, sample.target_times);
  const Eigen::MatrixXd diff = e * solved.u - sample.targets;

  SampleResult result;
  result.loss = diff.squaredNorm() / double(diff.size());
  result.iterations = solved.report.iterations;
  result.tape_bytes = tape.bytes();
  const ChebCoeffs grad_u = e.transpose() * diff * (2.0 / double(diff.size()));
  result.grad = reverse_solve(params, problem, op, config, tape, grad_u);
  return result;
}

}  // namespace

double sample_loss(const MLPParams& params, const ProblemTemplate& problem, const Sample& sample,
                   const PicardOperator& op, const SolverConfig& config) {
  check_sample(params, sample);
  const SolveResult solved = solve_neural(params, problem, sample.f, op, config);
  return mse(evaluation_matrix(params.n_modes, sample.target_times) * solved.u, sample.targets);
}

double batch_loss(const MLPParams& params, const ProblemTemplate& problem,
                  std::span<const Sample> batch, const PicardOperator& op,
                  const SolverConfig& config) {
  if (batch.empty()) throw InvalidArgument("batch is empty");
  double total = 0.0;
  for (const auto& sample : batch) total += sample_loss(params, problem, sample, op, config);
  return total / double(batch.size());
}

Eigen::VectorXd reverse_solve(const MLPParams& params, const ProblemTemplate& problem,
                              const PicardOperator& op, const SolverConfig& config,
                              const Tape& tape, const ChebCoeffs& grad_solution) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.total_params());
  if (tape.empty()) return grad;

  const double rho = config.relaxation;
  const Eigen::Index modes = params.n_modes;
  const Eigen::Index dim = params.dim;
  const Eigen::Index flat = modes * dim;
  const Eigen::MatrixXd& rows = op.integration_rows();
  const Eigen::MatrixXd& projection = op.projection();
  const Eigen::Index nodes = op.grid().size();

  // Each record is the batched integrand call of one iteration
  //   u_{k+1} = (1-rho) u_k + rho (f + P V(u_k)),  V(i,:) = lambda rows(i,:) B_i(u_k).
  ChebCoeffs g = grad_solution;
  Eigen::MatrixXd grad_out(flat, nodes);
  for (std::size_t k = tape.records.size(); k-- > 0;) {
    const Eigen::MatrixXd grad_v = projection.transpose() * (rho * g);
    for (Eigen::Index i = 0; i < nodes; ++i) {
      Eigen::Map<Eigen::MatrixXd> block(grad_out.col(i).data(), modes, dim);
      block.noalias() = problem.lambda * rows.row(i).transpose() * grad_v.row(i);
    }
    const Eigen::MatrixXd grad_in = backward_batch(params, tape.records[k], grad_out, grad);
    ChebCoeffs g_prev = (1.0 - rho) * g;
    Eigen::VectorXd through_net = grad_in.topRows(flat).rowwise().sum();
    g_prev += Eigen::Map<const Eigen::MatrixXd>(through_net.data(), modes, dim);
    g = std::move(g_prev);
  }
  return grad;
}

LossGrad loss_and_grad(const MLPParams& params, const ProblemTemplate& problem,
                       std::span<const Sample> batch, const PicardOperator& op,
                       const SolverConfig& config, int threads) {
  if (batch.empty()) throw InvalidArgument("batch is empty");
  const std::size_t n = batch.size();
  std::vector<SampleResult> results(n);
  std::vector<std::exception_ptr> errors(n);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        results[i] = sample_loss_grad(params, problem, batch[i], op, config);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), n);
  if (workers <= 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  LossGrad out;
  out.grad = Eigen::VectorXd::Zero(params.total_params());
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (const NumericalError& e) {
        throw NonFiniteError(std::string(e.what()) + " (sample " + std::to_string(i) + ")", long(i));
      }
    }
    if (!std::isfinite(results[i].loss) || !results[i].grad.allFinite()) {
      throw NonFiniteError("non-finite loss or gradient (sample " + std::to_string(i) + ")", long(i));
    }
    out.loss += results[i].loss;
    out.grad += results[i].grad;
    out.iterations.push_back(results[i].iterations);
    out.peak_tape_bytes = std::max(out.peak_tape_bytes, results[i].tape_bytes);
  }
  out.loss /= double(n);
  out.grad /= double(n);
  return out;
}

AdamState AdamState::for_params(const MLPParams& params, double lr) {
  AdamState state;
  state.m = Eigen::VectorXd::Zero(params.total_params());
  state.v = Eigen::VectorXd::Zero(params.total_params());
  state.lr = lr;
  return state;
}

void adam_step(MLPParams& params, const Eigen::VectorXd& grad, AdamState& state) {
  const Eigen::Index n = params.total_params();
  if (grad.size() != n || state.m.size() != n || state.v.size() != n) {
    throw InvalidArgument("adam_step: gradient or moment shape does not match parameters");
  }
  state.step += 1;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(state.beta1, double(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, double(state.step));
  const Eigen::ArrayXd m_hat = state.m.array() / c1;
  const Eigen::ArrayXd v_hat = state.v.array() / c2;
  Eigen::VectorXd flat = params.flatten();
  flat.array() -= state.lr * m_hat / (v_hat.sqrt() + state.eps);
  params.assign(flat);
}

}  // namespace snie
