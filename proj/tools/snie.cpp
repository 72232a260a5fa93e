// snie: generate datasets, train, evaluate and benchmark spectral neural
// integral equation models.
//
// Exit codes: 0 success, 1 usage, 2 data/schema, 3 numerical failure.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "snie/errors.hpp"
#include "snie/io.hpp"
#include "snie/run_config.hpp"
#include "snie/selfcheck.hpp"
#include "snie/train_eval.hpp"

namespace fs = std::filesystem;
using namespace snie;

namespace {

/// Config-key flags shared by the subcommands that build a RunConfig.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::optional<int> threads;

  void attach(CLI::App* cmd, bool all_keys) {
    cmd->add_option("--config", config_file, "INI file with [data] [model] [solver] [train] sections")
        ->check(CLI::ExistingFile);
    cmd->add_option("--threads", threads, "worker threads (default: hardware concurrency)");
    if (!all_keys) return;
    for (const auto& k : config_keys()) {
      if (k.name == "threads") continue;
      std::string names = "--" + k.name;
      if (k.name.find('_') != std::string::npos) {
        std::string hyphen = k.name;
        std::replace(hyphen.begin(), hyphen.end(), '_', '-');
        names += ",--" + hyphen;
      }
      const std::string key = k.name;
      cmd->add_option_function<std::string>(
             names, [this, key](const std::string& v) { values[key] = v; }, k.help)
          ->group("Config keys [" + k.section + "]");
    }
  }

  /// file < SPECTRAL_NIE_SEED < flags
  RunConfig resolve() const {
    RunConfig config;
    config.train.threads = 0;
    if (!config_file.empty()) apply_ini(config, read_text(config_file));
    apply_seed_env(config);
    for (const auto& [k, v] : values) apply_config_value(config, k, v);
    if (threads) config.train.threads = *threads;
    if (config.train.threads < 0) throw InvalidArgument("threads must be >= 0");
    if (config.train.threads == 0) {
      config.train.threads = int(std::max(1u, std::thread::hardware_concurrency()));
    }
    return config;
  }
};

void refuse_overwrite(const fs::path& path, bool force) {
  if (fs::exists(path) && !force) {
    throw InvalidArgument("'" + path.string() + "' exists; pass --force to overwrite");
  }
}

fs::path sibling_config(const fs::path& out) {
  fs::path p = out;
  p += ".config.ini";
  return p;
}

std::string metrics_summary(const Metrics& m) {
  std::ostringstream ss;
  ss << "mse_mean=" << format_double(m.test_mse_mean) << " mse_std=" << format_double(m.test_mse_std)
     << " n_samples=" << m.per_sample_mse.size();
  return ss.str();
}

void check_dims(const Checkpoint& ckpt, const Dataset& ds) {
  if (ckpt.params.dim != ds.meta.dim) {
    throw SchemaError("checkpoint model has dim " + std::to_string(ckpt.params.dim) +
                      " but the dataset has dim " + std::to_string(ds.meta.dim));
  }
}

const Dataset& pick_split(const DatasetSplit& parts, const Dataset& all, const std::string& name) {
  if (name == "train") return parts.train;
  if (name == "val") return parts.val;
  if (name == "test") return parts.test;
  if (name == "all") return all;
  throw InvalidArgument("split must be train, val, test or all");
}

int cmd_gen_data(const ConfigFlags& flags, const fs::path& out, bool force) {
  const RunConfig config = flags.resolve();
  refuse_overwrite(out, force);
  const Dataset ds = generate_dataset(config.data);
  write_dataset(ds, out);
  write_text(sibling_config(out), to_ini(config));
  std::cout << "wrote " << out.string() << ": kind=" << to_string(ds.meta.kind)
            << " samples=" << ds.size() << " points=" << ds.meta.n_points << " dim=" << ds.meta.dim
            << " t=[" << format_double(ds.meta.t_min) << "," << format_double(ds.meta.t_max)
            << "] noise=" << format_double(ds.meta.noise_sigma) << " seed=" << ds.meta.seed << "\n";
  return 0;
}

int cmd_train(const ConfigFlags& flags, const fs::path& data_path, const fs::path& out_dir,
              const std::string& downsample_text, bool force) {
  const RunConfig config = flags.resolve();
  config.train.validate();
  const fs::path manifest = out_dir / "checkpoint.json";
  refuse_overwrite(manifest, force);
  const Dataset data = read_dataset(data_path);
  std::optional<DownsampleMode> mode;
  if (!downsample_text.empty()) mode = parse_downsample(downsample_text);

  const TrainConfig& tc = config.train;
  const DatasetSplit parts = split(data, tc.split, tc.seed);
  const Dataset train_set = mode ? downsample(parts.train, *mode) : parts.train;
  const Dataset val_set = mode ? downsample(parts.val, *mode) : parts.val;
  const MLPParams init = init_model(tc, data.meta.dim, tc.seed);
  auto [model, metrics] = train(init, train_set, val_set, tc);
  const Metrics test = evaluate(model, parts.test, tc);

  // Outputs are written only once everything above succeeded.
  fs::create_directories(out_dir);
  Checkpoint ckpt;
  ckpt.params = model;
  ckpt.config = tc;
  ckpt.seed = tc.seed;
  ckpt.best_epoch = metrics.best_epoch;
  const long batches = (long(train_set.size()) + tc.batch_size - 1) / tc.batch_size;
  ckpt.step = long(metrics.best_epoch) * batches;
  write_checkpoint(ckpt, manifest);
  write_text(out_dir / "metrics.csv", metrics_csv(metrics));
  std::string ini = to_ini(config);
  ini += "\n# data = " + fs::absolute(data_path).string() + "\n";
  if (mode) ini += "# downsample = " + to_string(*mode) + "\n";
  write_text(out_dir / "config.ini", ini);

  nlohmann::ordered_json summary;
  summary["status"] = metrics.status;
  summary["epochs"] = metrics.epochs.size();
  summary["best_epoch"] = metrics.best_epoch;
  summary["best_val_mse"] = metrics.best_val_mse;
  summary["test_mse_mean"] = test.test_mse_mean;
  summary["test_mse_std"] = test.test_mse_std;
  summary["n_test"] = test.per_sample_mse.size();
  summary["n_params"] = metrics.n_params;
  summary["init_points"] = tc.n_init_points;
  summary["memory_bytes"] = metrics.memory_bytes;
  summary["projection_mse"] = metrics.projection_mse;
  summary["walltime_s"] = metrics.walltime_s;
  write_text(out_dir / "summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_eval(const ConfigFlags& flags, const fs::path& ckpt_path, const fs::path& data_path,
             const std::string& split_name, const std::string& downsample_text, fs::path out,
             bool force) {
  const bool interp = !downsample_text.empty();
  if (out.empty()) out = ckpt_path.parent_path() / (interp ? "interp.csv" : "eval.csv");
  refuse_overwrite(out, force);
  std::optional<DownsampleMode> mode;
  if (interp) mode = parse_downsample(downsample_text);

  Checkpoint ckpt = read_checkpoint(ckpt_path);
  const Dataset data = read_dataset(data_path);
  check_dims(ckpt, data);
  TrainConfig tc = ckpt.config;
  const RunConfig resolved = flags.resolve();
  tc.threads = resolved.train.threads;

  const DatasetSplit parts = split(data, tc.split, tc.seed);
  const Dataset& target = pick_split(parts, data, split_name);
  const Metrics m = interp ? interpolation_eval(ckpt.params, target, *mode, tc)
                           : evaluate(ckpt.params, target, tc);
  const std::string label = interp ? to_string(*mode) : std::string("eval");
  const std::string csv = eval_csv_header() + eval_csv_row(label, split_name, m);
  write_text(out, csv);
  RunConfig echo = resolved;
  echo.train = tc;
  write_text(sibling_config(out), to_ini(echo) + "\n# checkpoint = " +
                                      fs::absolute(ckpt_path).string() + "\n# data = " +
                                      fs::absolute(data_path).string() + "\n");
  std::cout << csv;
  return 0;
}

int cmd_benchmark(const ConfigFlags& flags, const fs::path& data_path, const fs::path& out,
                  const std::string& sweep, const std::string& interp_text, bool force) {
  const RunConfig base = flags.resolve();
  refuse_overwrite(out, force);
  const Dataset data = read_dataset(data_path);
  std::optional<DownsampleMode> interp;
  if (!interp_text.empty()) interp = parse_downsample(interp_text);

  std::vector<BenchmarkCase> cases;
  if (sweep.empty()) {
    base.train.validate();
    cases.push_back({"base", base.train, interp});
  } else {
    const auto eq = sweep.find('=');
    if (eq == std::string::npos) throw InvalidArgument("--sweep expects key=v1,v2,...");
    const std::string key = sweep.substr(0, eq);
    std::stringstream values(sweep.substr(eq + 1));
    std::string v;
    while (std::getline(values, v, ',')) {
      if (v.empty()) continue;
      RunConfig c = base;
      apply_config_value(c, key, v);
      c.train.validate();
      cases.push_back({key + "=" + v, c.train, interp});
    }
  }
  const auto rows = benchmark(cases, data);
  const std::string csv = benchmark_csv(rows);
  write_text(out, csv);
  write_text(sibling_config(out), to_ini(base) + "\n# sweep = " + sweep + "\n");
  std::cout << csv;
  for (const auto& r : rows) {
    if (!r.error.empty()) std::cerr << "row " << r.name << " failed: " << r.error << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral neural integral equations: data generation, training and evaluation"};
  app.require_subcommand(1);
  bool force = false;
  app.add_flag("--force", force, "overwrite existing outputs");

  ConfigFlags gen_flags, train_flags, eval_flags, bench_flags;
  std::string out, data, ckpt, split_name = "test", downsample_text, sweep, interp_text;

  auto* gen = app.add_subcommand("gen-data", "generate a dataset");
  gen_flags.attach(gen, true);
  gen->add_option("--out,-o", out, "dataset path")->required();
  gen->add_flag("--force", force, "overwrite existing outputs");

  auto* tr = app.add_subcommand("train", "train a model");
  train_flags.attach(tr, true);
  tr->add_option("--data", data, "dataset path")->required();
  tr->add_option("--out,-o", out, "output directory")->required();
  tr->add_option("--downsample", downsample_text, "train on regular:K or irregular:P[:SEED] data");
  tr->add_flag("--force", force, "overwrite existing outputs");

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  auto* ip = app.add_subcommand("interp", "evaluate interpolation from downsampled init points");
  for (auto* cmd : {ev, ip}) {
    cmd->add_option("--checkpoint", ckpt, "checkpoint manifest")->required();
    cmd->add_option("--data", data, "dataset path")->required();
    cmd->add_option("--split", split_name, "train | val | test | all (default test)");
    cmd->add_option("--out,-o", out, "CSV path (default next to the checkpoint)");
    cmd->add_flag("--force", force, "overwrite existing outputs");
  }
  eval_flags.attach(ev, false);
  ConfigFlags interp_flags;
  interp_flags.attach(ip, false);
  ip->add_option("--downsample", downsample_text, "regular:K or irregular:P[:SEED]")->required();

  auto* bench = app.add_subcommand("benchmark", "train and evaluate a sweep of configurations");
  bench_flags.attach(bench, true);
  bench->add_option("--data", data, "dataset path")->required();
  bench->add_option("--out,-o", out, "CSV path")->required();
  bench->add_option("--sweep", sweep, "key=v1,v2,... one row per value");
  bench->add_option("--interp", interp_text, "also train on regular:K / irregular:P[:SEED] data");
  bench->add_flag("--force", force, "overwrite existing outputs");

  auto* self = app.add_subcommand("selfcheck", "run the analytic oracle suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*gen) return cmd_gen_data(gen_flags, out, force);
    if (*tr) return cmd_train(train_flags, data, out, downsample_text, force);
    if (*ev) return cmd_eval(eval_flags, ckpt, data, split_name, "", out, force);
    if (*ip) return cmd_eval(interp_flags, ckpt, data, split_name, downsample_text, out, force);
    if (*bench) return cmd_benchmark(bench_flags, data, out, sweep, interp_text, force);
    if (*self) {
      const bool ok = report_selfcheck(run_selfcheck(), std::cout);
      return ok ? 0 : 3;
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
