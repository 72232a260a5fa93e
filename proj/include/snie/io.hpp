#pragma once

// On-disk formats: dataset documents, checkpoints and metric tables.
//
// Dataset: JSON {"meta": {...}, "samples": [{"t": [...], "y": [[...], ...]}]}.
// Checkpoint: JSON manifest plus a sidecar of little-endian float64 values,
// parameters concatenated layer by layer (weights row-major, then bias),
// guarded by a CRC-32 checksum recorded in the manifest.

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "snie/datagen.hpp"
#include "snie/neural.hpp"
#include "snie/train_eval.hpp"

namespace snie {

/// "%.17g": enough digits to round-trip any double.
std::string format_double(double x);

nlohmann::ordered_json dataset_to_json(const Dataset& ds);
/// Throws SchemaError naming the offending field.
Dataset dataset_from_json(const nlohmann::ordered_json& doc);

void write_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

nlohmann::ordered_json train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::ordered_json& doc);

struct Checkpoint {
  MLPParams params;
  TrainConfig config;
  std::uint64_t seed = 0;
  long step = 0;  ///< optimizer steps taken
  int best_epoch = 0;
};

/// Sidecar path for a manifest: same stem, ".bin" extension.
std::filesystem::path checkpoint_sidecar(const std::filesystem::path& manifest);

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& manifest);
/// Throws ChecksumError if the sidecar does not match the manifest.
Checkpoint read_checkpoint(const std::filesystem::path& manifest);

std::uint32_t crc32_bytes(const std::vector<unsigned char>& bytes);

/// Header `epoch,train_mse,val_mse,walltime_s`.
std::string metrics_csv(const Metrics& metrics);
/// Header `mode,split,n_samples,mse_mean,mse_std`.
std::string eval_csv_header();
std::string eval_csv_row(const std::string& mode, const std::string& split, const Metrics& m);
/// Header `name,params,mc_samples,memory_bytes,walltime_s,test_mse_mean,test_mse_std,interp_mse_mean,interp_mse_std`.
std::string benchmark_csv(const std::vector<BenchmarkRow>& rows);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace snie
