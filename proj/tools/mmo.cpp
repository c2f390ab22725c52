// SPDX-License-Identifier: Apache-2.0
// mmo: run, validate and oracle-only sweeps from a JSON experiment file.
#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mmo/sim/config.hpp"
#include "mmo/sim/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kConfigError = 2;
constexpr int kNotConverged = 3;

void init_logging() {
  spdlog::set_default_logger(spdlog::stderr_color_mt("mmo"));
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("MMO_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"; only honor it when asked for.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

struct RunArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  int parallel = 1;
  bool strict = false;
};

void print_summary(const std::vector<mmo::sim::RunRecord>& records) {
  for (const auto& p : mmo::sim::summarize(records)) {
    spdlog::info("{} {} snr={} mean={:.6f} (n={})", p.scenario, p.algorithm, p.snr_db, p.mean, p.count);
  }
}

int run(const RunArgs& args, bool oracle_only) {
  const mmo::sim::ExperimentConfig cfg = mmo::sim::load_config(args.config);
  mmo::sim::RunOptions opts;
  opts.seed = args.seed;
  opts.trials = args.trials;
  opts.parallel = args.parallel > 0 ? args.parallel : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (oracle_only) opts.only = std::vector<mmo::sim::Algorithm>{mmo::sim::Algorithm::Oracle};

  std::string out = args.out;
  if (out.empty() && cfg.output) out = *cfg.output;
  if (out.empty()) throw mmo::ConfigError("no output path: pass --out or set \"output\" in the config");

  spdlog::info("{}: {} trials, {} SNR points, {} worker(s)", cfg.name, opts.trials.value_or(cfg.trials),
               cfg.snr_db.size(), opts.parallel);
  const auto records = mmo::sim::run_experiment(cfg, opts);
  mmo::sim::write_csv_atomic(out, records);
  spdlog::info("wrote {} records to {}", records.size(), out);
  print_summary(records);

  const auto stalled = std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.converged; });
  if (stalled > 0) {
    if (args.strict || cfg.strict) {
      spdlog::error("{} of {} solves did not converge", stalled, records.size());
      return kNotConverged;
    }
    spdlog::warn("{} of {} solves did not converge", stalled, records.size());
  }
  return kOk;
}

int validate(const std::string& path) {
  const auto cfg = mmo::sim::load_config(path);
  std::cout << path << ": ok (" << mmo::sim::scenario_name(cfg.scenario) << ", " << cfg.trials << " trials, "
            << cfg.snr_db.size() << " SNR points)\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"Matrix-monotonic transceiver design experiments"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto add_run_options = [&run_args](CLI::App* sub, bool need_out) {
    sub->add_option("--config", run_args.config, "Experiment file")->required();
    auto* out = sub->add_option("--out", run_args.out, "CSV destination");
    if (need_out) out->required();
    sub->add_option("--seed", run_args.seed, "Override the base seed");
    sub->add_option("--trials", run_args.trials, "Override the trial count")->check(CLI::PositiveNumber);
    sub->add_option("--parallel", run_args.parallel, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
    sub->add_flag("--strict", run_args.strict, "Exit with status 3 if any solver stops early");
  };

  auto* run_cmd = app.add_subcommand("run", "Run an experiment and write a CSV");
  add_run_options(run_cmd, true);
  auto* oracle_cmd = app.add_subcommand("oracle", "Run only the projected-gradient oracle");
  add_run_options(oracle_cmd, false);
  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check an experiment file");
  validate_cmd->add_option("--config", validate_path, "Experiment file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run_cmd) return run(run_args, false);
    if (*oracle_cmd) return run(run_args, true);
    if (*validate_cmd) return validate(validate_path);
  } catch (const mmo::ConfigError& e) {
    spdlog::error("{}", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
  return kOk;
}
