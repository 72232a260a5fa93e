#include "snie/io.hpp"

#include <zlib.h>

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace snie {

namespace {

using json = nlohmann::ordered_json;
using ordered_json = nlohmann::ordered_json;

const json& field(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw SchemaError("missing field '" + where + key + "'");
  }
  return obj.at(key);
}

double number(const json& obj, const std::string& key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number()) throw SchemaError("field '" + where + key + "' must be a number");
  return v.get<double>();
}

long integer(const json& obj, const std::string& key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number_integer()) throw SchemaError("field '" + where + key + "' must be an integer");
  return v.get<long>();
}

std::string text(const json& obj, const std::string& key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_string()) throw SchemaError("field '" + where + key + "' must be a string");
  return v.get<std::string>();
}

const char* activation_name(Activation a) { return a == Activation::Tanh ? "tanh" : "identity"; }

Activation activation_from(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "identity") return Activation::Identity;
  throw SchemaError("unknown activation '" + name + "'");
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << contents;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Dataset

ordered_json dataset_to_json(const Dataset& ds) {
  ordered_json doc;
  auto& meta = doc["meta"];
  meta["kind"] = to_string(ds.meta.kind);
  meta["dim"] = ds.meta.dim;
  meta["n_points"] = ds.meta.n_points;
  meta["t_min"] = ds.meta.t_min;
  meta["t_max"] = ds.meta.t_max;
  meta["noise_sigma"] = ds.meta.noise_sigma;
  meta["seed"] = ds.meta.seed;
  meta["generator"] = ds.meta.generator;
  auto samples = ordered_json::array();
  for (const auto& traj : ds.samples) {
    ordered_json s;
    s["t"] = std::vector<double>(traj.times.data(), traj.times.data() + traj.times.size());
    auto rows = ordered_json::array();
    for (Eigen::Index i = 0; i < traj.values.rows(); ++i) {
      auto row = ordered_json::array();
      for (Eigen::Index c = 0; c < traj.values.cols(); ++c) row.push_back(traj.values(i, c));
      rows.push_back(std::move(row));
    }
    s["y"] = std::move(rows);
    samples.push_back(std::move(s));
  }
  doc["samples"] = std::move(samples);
  return doc;
}

Dataset dataset_from_json(const json& doc) {
  if (!doc.is_object()) throw SchemaError("dataset document must be an object");
  Dataset ds;
  const json& meta = field(doc, "meta", "");
  try {
    ds.meta.kind = dataset_kind_from_string(text(meta, "kind", "meta."));
  } catch (const InvalidArgument& e) {
    throw SchemaError(std::string("field 'meta.kind': ") + e.what());
  }
  ds.meta.dim = int(integer(meta, "dim", "meta."));
  ds.meta.n_points = int(integer(meta, "n_points", "meta."));
  ds.meta.t_min = number(meta, "t_min", "meta.");
  ds.meta.t_max = number(meta, "t_max", "meta.");
  ds.meta.noise_sigma = number(meta, "noise_sigma", "meta.");
  const json& seed = field(meta, "seed", "meta.");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
    throw SchemaError("field 'meta.seed' must be an integer");
  }
  ds.meta.seed = seed.get<std::uint64_t>();
  if (meta.contains("generator")) ds.meta.generator = ordered_json(meta.at("generator"));
  if (ds.meta.dim < 1) throw SchemaError("field 'meta.dim' must be >= 1");

  const json& samples = field(doc, "samples", "");
  if (!samples.is_array()) throw SchemaError("field 'samples' must be an array");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::string where = "samples[" + std::to_string(i) + "].";
    const json& t = field(samples[i], "t", where);
    const json& y = field(samples[i], "y", where);
    if (!t.is_array()) throw SchemaError("field '" + where + "t' must be an array");
    if (!y.is_array() || y.size() != t.size()) {
      throw SchemaError("field '" + where + "y' must be an array with one row per time");
    }
    Trajectory traj;
    traj.times.resize(Eigen::Index(t.size()));
    traj.values.resize(Eigen::Index(t.size()), ds.meta.dim);
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (!t[k].is_number()) throw SchemaError("field '" + where + "t' must hold numbers");
      traj.times(Eigen::Index(k)) = t[k].get<double>();
      const json& row = y[k];
      if (!row.is_array() || row.size() != std::size_t(ds.meta.dim)) {
        throw SchemaError("field '" + where + "y[" + std::to_string(k) + "]' must have " +
                          std::to_string(ds.meta.dim) + " entries");
      }
      for (int c = 0; c < ds.meta.dim; ++c) {
        if (!row[std::size_t(c)].is_number()) {
          throw SchemaError("field '" + where + "y[" + std::to_string(k) + "]' must hold numbers");
        }
        traj.values(Eigen::Index(k), c) = row[std::size_t(c)].get<double>();
      }
    }
    ds.samples.push_back(std::move(traj));
  }
  ds.validate();
  return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  write_text(path, dataset_to_json(ds).dump() + "\n");
}

Dataset read_dataset(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw SchemaError("dataset file '" + path.string() + "' not found");
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw SchemaError("dataset '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return dataset_from_json(doc);
}

// ---------------------------------------------------------------------------
// Checkpoint

ordered_json train_config_to_json(const TrainConfig& c) {
  ordered_json j;
  j["lr"] = c.lr;
  j["batch_size"] = c.batch_size;
  j["max_epochs"] = c.max_epochs;
  j["patience"] = c.patience_epochs;
  j["walltime_cap"] = c.walltime_cap_s;
  j["init_points"] = c.n_init_points;
  j["free_term_degree"] = c.free_term_degree;
  j["mc_samples"] = c.mc_samples;
  j["seed"] = c.seed;
  j["tol"] = c.solver.tol;
  j["max_iter"] = c.solver.max_iter;
  j["relaxation"] = c.solver.relaxation;
  j["hidden"] = c.hidden;
  j["modes"] = c.n;
  j["equation"] = to_string(c.kind);
  j["lambda"] = c.lambda;
  j["split"] = {c.split.train, c.split.val, c.split.test};
  j["threads"] = c.threads;
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  const std::string w = "config.";
  TrainConfig c;
  c.lr = number(j, "lr", w);
  c.batch_size = int(integer(j, "batch_size", w));
  c.max_epochs = int(integer(j, "max_epochs", w));
  c.patience_epochs = int(integer(j, "patience", w));
  c.walltime_cap_s = number(j, "walltime_cap", w);
  c.n_init_points = int(integer(j, "init_points", w));
  c.free_term_degree = int(integer(j, "free_term_degree", w));
  c.mc_samples = int(integer(j, "mc_samples", w));
  c.seed = field(j, "seed", w).get<std::uint64_t>();
  c.solver.tol = number(j, "tol", w);
  c.solver.max_iter = int(integer(j, "max_iter", w));
  c.solver.relaxation = number(j, "relaxation", w);
  c.hidden = field(j, "hidden", w).get<std::vector<int>>();
  c.n = int(integer(j, "modes", w));
  try {
    c.kind = equation_kind_from_string(text(j, "equation", w));
  } catch (const InvalidArgument& e) {
    throw SchemaError(std::string("field 'config.equation': ") + e.what());
  }
  c.lambda = number(j, "lambda", w);
  const auto parts = field(j, "split", w).get<std::vector<double>>();
  if (parts.size() != 3) throw SchemaError("field 'config.split' must have 3 entries");
  c.split = {parts[0], parts[1], parts[2]};
  c.threads = int(integer(j, "threads", w));
  return c;
}

std::uint32_t crc32_bytes(const std::vector<unsigned char>& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, bytes.data(), uInt(bytes.size()));
  return std::uint32_t(crc);
}

std::filesystem::path checkpoint_sidecar(const std::filesystem::path& manifest) {
  std::filesystem::path p = manifest;
  p.replace_extension(".bin");
  return p;
}

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& manifest) {
  const Eigen::VectorXd flat = ckpt.params.flatten();
  std::vector<unsigned char> bytes;
  bytes.reserve(std::size_t(flat.size()) * 8);
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(flat(i));
    for (int b = 0; b < 8; ++b) bytes.push_back((unsigned char)((bits >> (8 * b)) & 0xFFu));
  }
  const std::filesystem::path sidecar = checkpoint_sidecar(manifest);
  {
    std::ofstream out(sidecar, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + sidecar.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  }

  ordered_json doc;
  doc["format"] = "snie-checkpoint-v1";
  doc["params_file"] = sidecar.filename().string();
  doc["n_modes"] = ckpt.params.n_modes;
  doc["N"] = ckpt.params.n_modes - 1;
  doc["dim"] = ckpt.params.dim;
  auto layers = ordered_json::array();
  for (const auto& s : ckpt.params.spec()) {
    layers.push_back({{"in", s.in_dim}, {"out", s.out_dim}, {"activation", activation_name(s.activation)}});
  }
  doc["layers"] = layers;
  doc["total_params"] = ckpt.params.total_params();
  doc["seed"] = ckpt.seed;
  doc["step"] = ckpt.step;
  doc["best_epoch"] = ckpt.best_epoch;
  doc["crc32"] = crc32_bytes(bytes);
  doc["config"] = train_config_to_json(ckpt.config);
  write_text(manifest, doc.dump(2) + "\n");
}

Checkpoint read_checkpoint(const std::filesystem::path& manifest) {
  if (!std::filesystem::exists(manifest)) {
    throw SchemaError("checkpoint '" + manifest.string() + "' not found");
  }
  json doc;
  try {
    doc = json::parse(read_text(manifest));
  } catch (const json::parse_error& e) {
    throw SchemaError("checkpoint manifest is not valid JSON: " + std::string(e.what()));
  }
  Checkpoint ckpt;
  const int n_modes = int(integer(doc, "n_modes", ""));
  const int dim = int(integer(doc, "dim", ""));
  std::vector<LayerSpec> spec;
  const json& layers = field(doc, "layers", "");
  if (!layers.is_array()) throw SchemaError("field 'layers' must be an array");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string w = "layers[" + std::to_string(i) + "].";
    spec.push_back({int(integer(layers[i], "in", w)), int(integer(layers[i], "out", w)),
                    activation_from(text(layers[i], "activation", w))});
  }
  try {
    ckpt.params = zero_params(spec, n_modes, dim);
  } catch (const InvalidArgument& e) {
    throw SchemaError(std::string("checkpoint layer specification: ") + e.what());
  }
  ckpt.seed = field(doc, "seed", "").get<std::uint64_t>();
  ckpt.step = integer(doc, "step", "");
  ckpt.best_epoch = int(integer(doc, "best_epoch", ""));
  ckpt.config = train_config_from_json(field(doc, "config", ""));

  const std::filesystem::path sidecar = manifest.parent_path() / text(doc, "params_file", "");
  std::ifstream in(sidecar, std::ios::binary);
  if (!in) throw SchemaError("checkpoint parameters '" + sidecar.string() + "' not found");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto expected = field(doc, "crc32", "").get<std::uint32_t>();
  if (crc32_bytes(bytes) != expected) {
    throw ChecksumError("checkpoint checksum mismatch for '" + sidecar.string() + "'");
  }
  const Eigen::Index total = ckpt.params.total_params();
  if (bytes.size() != std::size_t(total) * 8) {
    throw ChecksumError("checkpoint parameter file has " + std::to_string(bytes.size()) +
                        " bytes, expected " + std::to_string(total * 8));
  }
  Eigen::VectorXd flat(total);
  for (Eigen::Index i = 0; i < total; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= std::uint64_t(bytes[std::size_t(i) * 8 + std::size_t(b)]) << (8 * b);
    flat(i) = std::bit_cast<double>(bits);
  }
  ckpt.params.assign(flat);
  return ckpt;
}

// ---------------------------------------------------------------------------
// CSV

std::string metrics_csv(const Metrics& metrics) {
  std::string out = "epoch,train_mse,val_mse,walltime_s\n";
  for (const auto& e : metrics.epochs) {
    out += std::to_string(e.epoch) + "," + format_double(e.train_mse) + "," +
           format_double(e.val_mse) + "," + format_double(e.walltime_s) + "\n";
  }
  return out;
}

std::string eval_csv_header() { return "mode,split,n_samples,mse_mean,mse_std\n"; }

std::string eval_csv_row(const std::string& mode, const std::string& split, const Metrics& m) {
  return mode + "," + split + "," + std::to_string(m.per_sample_mse.size()) + "," +
         format_double(m.test_mse_mean) + "," + format_double(m.test_mse_std) + "\n";
}

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows) {
  std::string out =
      "name,params,mc_samples,memory_bytes,walltime_s,test_mse_mean,test_mse_std,"
      "interp_mse_mean,interp_mse_std\n";
  for (const auto& r : rows) {
    out += r.name + "," + std::to_string(r.params) + "," + std::to_string(r.mc_samples) + "," +
           std::to_string(r.memory_bytes) + "," + format_double(r.walltime_s) + "," +
           format_double(r.test_mse_mean) + "," + format_double(r.test_mse_std) + "," +
           format_double(r.interp_mse_mean) + "," + format_double(r.interp_mse_std) + "\n";
  }
  return out;
}

}  // namespace snie
