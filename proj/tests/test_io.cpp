#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "snie/errors.hpp"
#include "snie/io.hpp"

using namespace snie;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "snie_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

Dataset sample_dataset() {
  IEDatasetParams p;
  p.n_samples = 4;
  p.n_points = 12;
  p.seed = 9;
  return gen_ie_dataset(p);
}

std::string schema_message(const std::string& text) {
  try {
    dataset_from_json(nlohmann::ordered_json::parse(text));
  } catch (const SchemaError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("dataset round trip is exact") {
  const Dataset ds = sample_dataset();
  const fs::path path = scratch("ds.json");
  write_dataset(ds, path);
  const Dataset back = read_dataset(path);
  REQUIRE(back.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.samples[i].times == ds.samples[i].times);
    CHECK(back.samples[i].values == ds.samples[i].values);
  }
  CHECK(back.meta.dim == ds.meta.dim);
  CHECK(back.meta.seed == ds.meta.seed);
  CHECK(back.meta.t_min == ds.meta.t_min);
  CHECK(back.meta.t_max == ds.meta.t_max);
  CHECK(back.meta.generator == ds.meta.generator);

  // writing the read-back copy reproduces the bytes
  const fs::path again = scratch("ds2.json");
  write_dataset(back, again);
  CHECK(read_text(path) == read_text(again));
}

TEST_CASE("format_double round-trips") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) {
    CHECK(std::stod(format_double(x)) == x);
  }
}

TEST_CASE("malformed datasets name the field") {
  CHECK(schema_message(R"({"samples": []})").find("meta") != std::string::npos);
  CHECK(schema_message(R"({"meta": {"kind": "synthetic-ie", "n_points": 2, "t_min": 0, "t_max": 1,
                        "noise_sigma": 0, "seed": 0}, "samples": []})")
            .find("meta.dim") != std::string::npos);
  const std::string bad_row = R"({"meta": {"kind": "synthetic-ie", "dim": 2, "n_points": 2, "t_min": 0,
      "t_max": 1, "noise_sigma": 0, "seed": 0},
      "samples": [{"t": [0, 1], "y": [[1, 2], [3]]}]})";
  CHECK(schema_message(bad_row).find("samples[0].y[1]") != std::string::npos);
  const std::string bad_time = R"({"meta": {"kind": "synthetic-ie", "dim": 1, "n_points": 2, "t_min": 0,
      "t_max": 1, "noise_sigma": 0, "seed": 0},
      "samples": [{"t": [0, "x"], "y": [[1], [3]]}]})";
  CHECK(schema_message(bad_time).find("samples[0].t") != std::string::npos);

  CHECK_THROWS_AS(read_dataset(scratch("does_not_exist.json")), SchemaError);
  write_text(scratch("broken.json"), "{ not json");
  CHECK_THROWS_AS(read_dataset(scratch("broken.json")), SchemaError);
}

TEST_CASE("train config json round trip") {
  TrainConfig c;
  c.lr = 0.0123;
  c.hidden = {7, 5};
  c.n = 11;
  c.kind = EquationKind::Volterra;
  c.lambda = 0.25;
  c.split = {0.6, 0.3, 0.1};
  c.solver.relaxation = 0.5;
  c.threads = 2;
  const TrainConfig b = train_config_from_json(train_config_to_json(c));
  CHECK(train_config_to_json(b).dump() == train_config_to_json(c).dump());
}

TEST_CASE("checkpoint round trip and corruption") {
  TrainConfig c;
  c.n = 5;
  c.hidden = {4};
  Checkpoint ck{init_model(c, 2, 3), c, 3, 42, 7};
  const fs::path manifest = scratch("ckpt.json");
  write_checkpoint(ck, manifest);
  CHECK(checkpoint_sidecar(manifest) == scratch("ckpt.bin"));
  CHECK(fs::file_size(checkpoint_sidecar(manifest)) == std::uintmax_t(ck.params.total_params()) * 8);

  const Checkpoint back = read_checkpoint(manifest);
  CHECK(back.params.flatten() == ck.params.flatten());
  CHECK(back.step == 42);
  CHECK(back.best_epoch == 7);
  CHECK(back.seed == 3);
  CHECK(back.params.n_modes == ck.params.n_modes);
  const auto doc = nlohmann::json::parse(read_text(manifest));
  CHECK(doc["format"] == "snie-checkpoint-v1");
  CHECK(doc["total_params"] == ck.params.total_params());

  // flip one byte in the sidecar
  {
    std::fstream f(checkpoint_sidecar(manifest), std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(3);
    f.put(char(0x5a));
  }
  CHECK_THROWS_AS(read_checkpoint(manifest), ChecksumError);

  // truncated sidecar
  write_checkpoint(ck, manifest);
  fs::resize_file(checkpoint_sidecar(manifest), 16);
  CHECK_THROWS_AS(read_checkpoint(manifest), ChecksumError);
}

TEST_CASE("crc32 reference value") {
  const std::string s = "123456789";
  CHECK(crc32_bytes(std::vector<unsigned char>(s.begin(), s.end())) == 0xCBF43926u);
}

TEST_CASE("csv layouts") {
  Metrics m;
  m.epochs = {{1, 0.5, 0.25, 0.1}, {2, 0.4, 0.2, 0.2}};
  const std::string csv = metrics_csv(m);
  CHECK(csv.rfind("epoch,train_mse,val_mse,walltime_s\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

  CHECK(eval_csv_header() == "mode,split,n_samples,mse_mean,mse_std\n");
  m.per_sample_mse = {0.1, 0.3};
  m.test_mse_mean = 0.2;
  m.test_mse_std = 0.1;
  CHECK(eval_csv_row("regular:1", "test", m) == "regular:1,test,2,0.20000000000000001,0.10000000000000001\n");

  CHECK(benchmark_csv({}) ==
        "name,params,mc_samples,memory_bytes,walltime_s,test_mse_mean,test_mse_std,interp_mse_mean,"
        "interp_mse_std\n");
}
