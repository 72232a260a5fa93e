#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "snie/io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "snie_cli_tests";

/// Runs the CLI with `args`; stdout and stderr go to `log`. Returns the exit code.
int run(const std::string& args, const std::string& log = "last.log") {
  fs::create_directories(kWork);
  const std::string cmd = "cd '" + kWork.string() + "' && env -u SPECTRAL_NIE_SEED '" SNIE_CLI_PATH "' " +
                          args + " > '" + log + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(kWork / p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double csv_mean(const std::string& csv) {
  std::istringstream in(csv);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  std::vector<std::string> cols;
  std::stringstream cells(row);
  for (std::string c; std::getline(cells, c, ',');) cols.push_back(c);
  return std::stod(cols.at(3));
}

const std::string kTrainFlags =
    " --modes 6 --hidden 8 --max-epochs 3 --batch-size 4 --mc-samples 200 --free-term-degree 0 --threads 1";

}  // namespace

TEST_CASE("gen-data is reproducible and records its config") {
  fs::remove_all(kWork);
  REQUIRE(run("gen-data --samples 6 --points 20 --seed 3 --out a.json") == 0);
  REQUIRE(run("gen-data --samples 6 --points 20 --seed 3 --out b.json") == 0);
  CHECK(slurp("a.json") == slurp("b.json"));
  CHECK(slurp("a.json.config.ini").find("samples = 6") != std::string::npos);

  // existing output without --force
  CHECK(run("gen-data --samples 6 --seed 3 --out a.json") == 1);
  CHECK(run("gen-data --samples 6 --points 20 --seed 3 --out a.json --force") == 0);

  const snie::Dataset ds = snie::read_dataset(kWork / "a.json");
  CHECK(ds.size() == 6);
  CHECK(ds.meta.n_points == 20);
}

TEST_CASE("gen-data delay-net and argument errors") {
  REQUIRE(run("gen-data --kind delay-net --nodes 80 --samples 2 --seed 1 --out dn.json") == 0);
  const snie::Dataset dn = snie::read_dataset(kWork / "dn.json");
  CHECK(dn.meta.dim == 80);
  CHECK(dn.meta.n_points == 20);
  CHECK(dn.samples[0].values.rows() == 20);

  CHECK(run("gen-data --samples 0 --out zero.json") == 1);
  CHECK_FALSE(fs::exists(kWork / "zero.json"));
  CHECK(run("gen-data --no-such-flag 3 --out x.json") != 0);

  // config file, then environment, then flags
  std::ofstream(kWork / "run.ini") << "[data]\nsamples = 4\nseed = 5\npoints = 10\n";
  REQUIRE(run("gen-data --config run.ini --out c1.json") == 0);
  CHECK(snie::read_dataset(kWork / "c1.json").meta.seed == 5);
  const std::string env_cmd = "cd '" + kWork.string() + "' && SPECTRAL_NIE_SEED=8 '" SNIE_CLI_PATH
                              "' gen-data --config run.ini --out c2.json > /dev/null 2>&1";
  REQUIRE(std::system(env_cmd.c_str()) == 0);
  CHECK(snie::read_dataset(kWork / "c2.json").meta.seed == 8);
  REQUIRE(run("gen-data --config run.ini --seed 9 --out c3.json") == 0);
  CHECK(snie::read_dataset(kWork / "c3.json").meta.seed == 9);

  std::ofstream(kWork / "bad.ini") << "[data]\nsampels = 4\n";
  CHECK(run("gen-data --config bad.ini --out c4.json") == 1);
}

TEST_CASE("train, eval and interp agree") {
  REQUIRE(run("gen-data --samples 12 --points 30 --seed 2 --out ie.json") == 0);
  CHECK(run("train --data missing.json --out never" + kTrainFlags) != 0);
  CHECK_FALSE(fs::exists(kWork / "never"));

  REQUIRE(run("train --data ie.json --out run" + kTrainFlags, "train.log") == 0);
  for (const char* f : {"checkpoint.json", "checkpoint.bin", "metrics.csv", "config.ini", "summary.json"}) {
    CHECK(fs::exists(kWork / "run" / f));
  }
  const auto summary = nlohmann::json::parse(slurp("run/summary.json"));

  REQUIRE(run("eval --checkpoint run/checkpoint.json --data ie.json") == 0);
  const double eval_mse = csv_mean(slurp("run/eval.csv"));
  CHECK(eval_mse == summary["test_mse_mean"].get<double>());
  CHECK(fs::exists(kWork / "run/eval.csv.config.ini"));

  REQUIRE(run("interp --checkpoint run/checkpoint.json --data ie.json --downsample regular:1") == 0);
  CHECK(csv_mean(slurp("run/interp.csv")) == eval_mse);

  REQUIRE(run("interp --checkpoint run/checkpoint.json --data ie.json --downsample irregular:0.3 "
              "--out irr.csv") == 0);
  CHECK(std::isfinite(csv_mean(slurp("irr.csv"))));

  CHECK(run("interp --checkpoint run/checkpoint.json --data ie.json --downsample sometimes --out z.csv") == 1);

  // model dimension does not match the data
  REQUIRE(run("gen-data --samples 4 --points 30 --dim 3 --seed 2 --out ie3.json") == 0);
  CHECK(run("eval --checkpoint run/checkpoint.json --data ie3.json --out d.csv") == 2);

  // corrupted parameter sidecar
  fs::copy(kWork / "run", kWork / "broken", fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  {
    std::fstream f(kWork / "broken/checkpoint.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(10);
    f.put(char(0x33));
  }
  CHECK(run("eval --checkpoint broken/checkpoint.json --data ie.json --out e.csv") == 2);
  CHECK_FALSE(fs::exists(kWork / "e.csv"));
}

TEST_CASE("benchmark sweeps") {
  REQUIRE(fs::exists(kWork / "ie.json"));
  REQUIRE(run("benchmark --data ie.json --out empty.csv --sweep mc_samples=" + kTrainFlags) == 0);
  CHECK(slurp("empty.csv") ==
        "name,params,mc_samples,memory_bytes,walltime_s,test_mse_mean,test_mse_std,interp_mse_mean,"
        "interp_mse_std\n");
  REQUIRE(run("benchmark --data ie.json --out sweep.csv --sweep mc-samples=100,400" + kTrainFlags) == 0);
  const std::string csv = slurp("sweep.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find("mc-samples=400") != std::string::npos);
}

TEST_CASE("selfcheck lists its checks") {
  CHECK(run("selfcheck", "self.log") == 0);
  const std::string out = slurp("self.log");
  int pass = 0;
  for (std::size_t pos = out.find("PASS "); pos != std::string::npos; pos = out.find("PASS ", pos + 1)) ++pass;
  CHECK(pass >= 6);
  CHECK(out.find("FAIL") == std::string::npos);
}
