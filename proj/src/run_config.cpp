#include "snie/run_config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <sstream>

#include "snie/io.hpp"

namespace snie {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

long long parse_ll(const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || errno != 0 || *end != '\0') throw InvalidArgument("expected an integer, got '" + v + "'");
  return x;
}

int parse_int(const std::string& v) {
  const long long x = parse_ll(v);
  if (x < -2147483647LL || x > 2147483647LL) throw InvalidArgument("integer out of range: '" + v + "'");
  return int(x);
}

std::uint64_t parse_u64(const std::string& v) {
  errno = 0;
  char* end = nullptr;
  if (v.empty() || v[0] == '-') throw InvalidArgument("expected a non-negative integer, got '" + v + "'");
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (errno != 0 || *end != '\0') throw InvalidArgument("expected a non-negative integer, got '" + v + "'");
  return std::uint64_t(x);
}

double parse_double(const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || errno != 0 || *end != '\0') throw InvalidArgument("expected a number, got '" + v + "'");
  return x;
}

std::vector<int> parse_int_list(const std::string& v) {
  std::vector<int> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int(trim(item)));
  return out;
}

std::string join_ints(const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + std::to_string(xs[i]);
  return out;
}

#define SNIE_KEY(section, name, help, setter, getter)                                \
  ConfigKey {                                                                       \
    section, name, help, [](RunConfig& c, const std::string& v) { setter; },        \
        [](const RunConfig& c) -> std::string { return getter; }                    \
  }

std::vector<ConfigKey> build_keys() {
  return {
      SNIE_KEY("data", "kind", "dataset kind: synthetic-ie | delay-net",
               (dataset_kind_from_string(v), c.data.kind = v), c.data.kind),
      SNIE_KEY("data", "samples", "number of trajectories", c.data.samples = parse_int(v),
               std::to_string(c.data.samples)),
      SNIE_KEY("data", "points", "time points per trajectory (0: kind default)",
               c.data.points = parse_int(v), std::to_string(c.data.points)),
      SNIE_KEY("data", "dim", "state dimension (synthetic-ie)", c.data.dim = parse_int(v),
               std::to_string(c.data.dim)),
      SNIE_KEY("data", "lambda", "equation lambda for generated data", c.data.lambda = parse_double(v),
               format_double(c.data.lambda)),
      SNIE_KEY("data", "noise", "Gaussian noise sigma", c.data.noise = parse_double(v),
               format_double(c.data.noise)),
      SNIE_KEY("data", "seed", "dataset seed", c.data.seed = parse_u64(v), std::to_string(c.data.seed)),
      SNIE_KEY("data", "equation", "fredholm | volterra (synthetic-ie)",
               (equation_kind_from_string(v), c.data.equation = v), c.data.equation),
      SNIE_KEY("data", "n_quad", "Nystrom quadrature points", c.data.n_quad = parse_int(v),
               std::to_string(c.data.n_quad)),
      SNIE_KEY("data", "spread", "per-sample constant shift of the free term",
               c.data.spread = parse_double(v), format_double(c.data.spread)),
      SNIE_KEY("data", "jitter", "per-sample perturbation of higher free-term modes",
               c.data.jitter = parse_double(v), format_double(c.data.jitter)),
      SNIE_KEY("data", "nodes", "delay-net dimension", c.data.nodes = parse_int(v),
               std::to_string(c.data.nodes)),
      SNIE_KEY("data", "horizon", "delay-net time horizon", c.data.horizon = parse_double(v),
               format_double(c.data.horizon)),
      SNIE_KEY("data", "gain", "delay-net coupling gain", c.data.gain = parse_double(v),
               format_double(c.data.gain)),
      SNIE_KEY("data", "max_delay", "delay-net maximum delay", c.data.max_delay = parse_double(v),
               format_double(c.data.max_delay)),
      SNIE_KEY("data", "step", "delay-net Euler step", c.data.step = parse_double(v),
               format_double(c.data.step)),
      SNIE_KEY("data", "decay", "delay-net decay rate", c.data.decay = parse_double(v),
               format_double(c.data.decay)),
      SNIE_KEY("data", "stimulus", "delay-net stimulus amplitude", c.data.stimulus = parse_double(v),
               format_double(c.data.stimulus)),

      SNIE_KEY("model", "modes", "Chebyshev degree N", c.train.n = parse_int(v), std::to_string(c.train.n)),
      SNIE_KEY("model", "hidden", "hidden widths, comma separated", c.train.hidden = parse_int_list(v),
               join_ints(c.train.hidden)),
      SNIE_KEY("model", "model_equation", "fredholm | volterra",
               c.train.kind = equation_kind_from_string(v), to_string(c.train.kind)),
      SNIE_KEY("model", "model_lambda", "lambda of the learned equation",
               c.train.lambda = parse_double(v), format_double(c.train.lambda)),

      SNIE_KEY("solver", "tol", "fixed-point tolerance", c.train.solver.tol = parse_double(v),
               format_double(c.train.solver.tol)),
      SNIE_KEY("solver", "max_iter", "fixed-point iteration cap", c.train.solver.max_iter = parse_int(v),
               std::to_string(c.train.solver.max_iter)),
      SNIE_KEY("solver", "relaxation", "relaxation factor in (0,1]",
               c.train.solver.relaxation = parse_double(v), format_double(c.train.solver.relaxation)),

      SNIE_KEY("train", "lr", "Adam learning rate", c.train.lr = parse_double(v), format_double(c.train.lr)),
      SNIE_KEY("train", "batch_size", "samples per step", c.train.batch_size = parse_int(v),
               std::to_string(c.train.batch_size)),
      SNIE_KEY("train", "max_epochs", "epoch cap", c.train.max_epochs = parse_int(v),
               std::to_string(c.train.max_epochs)),
      SNIE_KEY("train", "patience", "epochs without validation improvement before stopping",
               c.train.patience_epochs = parse_int(v), std::to_string(c.train.patience_epochs)),
      SNIE_KEY("train", "walltime_cap", "seconds", c.train.walltime_cap_s = parse_double(v),
               format_double(c.train.walltime_cap_s)),
      SNIE_KEY("train", "init_points", "observations used to build the free term",
               c.train.n_init_points = parse_int(v), std::to_string(c.train.n_init_points)),
      SNIE_KEY("train", "free_term_degree", "maximum degree of the free-term fit",
               c.train.free_term_degree = parse_int(v), std::to_string(c.train.free_term_degree)),
      SNIE_KEY("train", "mc_samples", "Monte Carlo projection samples",
               c.train.mc_samples = parse_int(v), std::to_string(c.train.mc_samples)),
      SNIE_KEY("train", "train_seed", "initialisation / split / shuffle seed",
               c.train.seed = parse_u64(v), std::to_string(c.train.seed)),
      SNIE_KEY("train", "split", "train,val,test fractions",
               ([&] {
                 std::stringstream ss(v);
                 std::string a, b, d;
                 std::getline(ss, a, ',');
                 std::getline(ss, b, ',');
                 std::getline(ss, d, ',');
                 std::string rest;
                 if (std::getline(ss, rest)) throw InvalidArgument("split takes three fractions");
                 c.train.split = {parse_double(trim(a)), parse_double(trim(b)), parse_double(trim(d))};
               }()),
               format_double(c.train.split.train) + "," + format_double(c.train.split.val) + "," +
                   format_double(c.train.split.test)),
      SNIE_KEY("train", "threads", "worker threads (0: hardware concurrency)",
               c.train.threads = parse_int(v), std::to_string(c.train.threads)),
  };
}

#undef SNIE_KEY

std::string canonical(std::string name) {
  std::replace(name.begin(), name.end(), '-', '_');
  return name;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = build_keys();
  return keys;
}

const ConfigKey* find_config_key(const std::string& name) {
  const std::string key = canonical(name);
  for (const auto& k : config_keys()) {
    if (k.name == key) return &k;
  }
  return nullptr;
}

void apply_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  const ConfigKey* k = find_config_key(key);
  if (!k) throw InvalidArgument("unknown config key '" + key + "'");
  try {
    k->set(config, trim(value));
  } catch (const InvalidArgument& e) {
    throw InvalidArgument("config key '" + k->name + "': " + e.what());
  }
}

void apply_ini(RunConfig& config, const std::string& text) {
  std::stringstream ss(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string where = "config line " + std::to_string(lineno) + ": ";
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw InvalidArgument(where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "data" && section != "model" && section != "solver" && section != "train") {
        throw InvalidArgument(where + "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidArgument(where + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const ConfigKey* k = find_config_key(key);
    if (!k) throw InvalidArgument(where + "unknown key '" + key + "'");
    if (k->section != section) {
      throw InvalidArgument(where + "key '" + key + "' belongs in [" + k->section + "]");
    }
    try {
      k->set(config, trim(line.substr(eq + 1)));
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(where + "key '" + key + "': " + e.what());
    }
  }
}

void apply_seed_env(RunConfig& config) {
  const char* env = std::getenv("SPECTRAL_NIE_SEED");
  if (!env || !*env) return;
  std::uint64_t seed = 0;
  try {
    seed = parse_u64(trim(env));
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(std::string("SPECTRAL_NIE_SEED: ") + e.what());
  }
  config.data.seed = seed;
  config.train.seed = seed;
}

std::string to_ini(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& k : config_keys()) {
    if (k.section != section) {
      section = k.section;
      out += (out.empty() ? "[" : "\n[") + section + "]\n";
    }
    out += k.name + " = " + k.get(config) + "\n";
  }
  return out;
}

IEDatasetParams ie_params(const DataConfig& d) {
  IEDatasetParams p;
  p.n_samples = d.samples;
  p.n_points = d.points > 0 ? d.points : 100;
  p.dim = d.dim;
  p.lambda = d.lambda;
  p.noise_sigma = d.noise;
  p.seed = d.seed;
  p.kind = equation_kind_from_string(d.equation);
  p.n_quad = d.n_quad;
  p.spread = d.spread;
  p.jitter = d.jitter;
  return p;
}

Dataset generate_dataset(const DataConfig& d) {
  if (d.samples < 1) throw InvalidArgument("samples must be >= 1");
  if (d.points < 0 || d.points == 1) throw InvalidArgument("points must be >= 2");
  if (d.noise < 0.0) throw InvalidArgument("noise must be >= 0");
  if (dataset_kind_from_string(d.kind) == DatasetKind::SyntheticIE) {
    if (d.dim < 1) throw InvalidArgument("dim must be >= 1");
    return gen_ie_dataset(ie_params(d));
  }
  if (d.nodes < 1) throw InvalidArgument("nodes must be >= 1");
  DelayNetSpec spec = DelayNetSpec::random(d.nodes, d.seed, d.gain, d.max_delay);
  spec.decay = d.decay;
  spec.stimulus_amplitude = d.stimulus;
  spec.step = d.step;
  spec.horizon = d.horizon;
  return gen_delay_dataset(spec, d.samples, d.points > 0 ? d.points : 20, d.seed);
}

}  // namespace snie
