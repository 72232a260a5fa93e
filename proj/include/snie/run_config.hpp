#pragma once

// Run configuration: INI file with [data], [model], [solver], [train]
// sections, overridable by SPECTRAL_NIE_SEED and then by `--key value` flags.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "snie/datagen.hpp"
#include "snie/train_eval.hpp"

namespace snie {

struct DataConfig {
  std::string kind = "synthetic-ie";
  int samples = 100;
  int points = 0;  ///< 0: 100 for synthetic-ie, 20 for delay-net
  int dim = 2;
  double lambda = 1.0;
  double noise = 0.05;
  std::uint64_t seed = 0;
  std::string equation = "fredholm";
  int n_quad = 200;
  double spread = 1.0;
  double jitter = 0.02;
  int nodes = 80;
  double horizon = 10.0;
  double gain = 1.5;
  double max_delay = 2.0;
  double step = 0.01;
  double decay = 1.0;
  double stimulus = 0.5;
};

struct RunConfig {
  DataConfig data;
  TrainConfig train;
};

/// One configurable key: section, canonical name, setter and formatter.
struct ConfigKey {
  std::string section;
  std::string name;
  std::string help;
  void (*set)(RunConfig&, const std::string&);
  std::string (*get)(const RunConfig&);
};

const std::vector<ConfigKey>& config_keys();

/// Accepts the canonical name or its hyphenated spelling. Null if unknown.
const ConfigKey* find_config_key(const std::string& name);

/// Applies a single key; throws InvalidArgument for unknown keys or bad values.
void apply_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Parses INI text into `config`. Unknown sections or keys, or a key in the
/// wrong section, throw InvalidArgument with the line number.
void apply_ini(RunConfig& config, const std::string& text);

/// Applies SPECTRAL_NIE_SEED (data and train seeds) if set.
void apply_seed_env(RunConfig& config);

/// Fully resolved config in INI form; apply_ini(to_ini(c)) reproduces c.
std::string to_ini(const RunConfig& config);

IEDatasetParams ie_params(const DataConfig& data);

/// Generates the dataset described by `data`.
Dataset generate_dataset(const DataConfig& data);

}  // namespace snie
