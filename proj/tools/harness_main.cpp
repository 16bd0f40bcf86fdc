#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lqc/errors.hpp"
#include "lqc/experiment.hpp"

namespace {

int run_command(const std::string& config_path, const std::string& out_dir,
                std::optional<int> threads_flag,
                std::optional<std::uint64_t> seed_override) {
  lqc::ExperimentConfig config = lqc::load_config(config_path);
  if (seed_override) {
    config.base_seed = *seed_override;
  }
  const int threads = lqc::resolve_thread_count(threads_flag);
  const auto rows = lqc::run_sweep(config, threads);

  std::filesystem::path out = config.output_path;
  if (!out_dir.empty()) {
    out = std::filesystem::path(out_dir) / out.filename();
  }
  lqc::emit_csv(rows, out.string());
  std::cout << "wrote " << rows.size() << " rows to " << out.string() << "\n";
  return 0;
}

int trace_command(const std::string& config_path,
                  const std::string& controller_label, double level,
                  const std::string& out_file) {
  const lqc::ExperimentConfig config = lqc::load_config(config_path);
  const lqc::Rollout rollout =
      lqc::trace_rollout(config, controller_label, level);
  lqc::emit_trace(rollout, out_file);
  std::cout << "wrote " << rollout.states.size() << " steps to " << out_file
            << "\n";
  return 0;
}

int validate_command(const std::string& config_path) {
  lqc::load_config(config_path);
  std::cout << "config OK: " << config_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sweep harness for prediction-augmented LQR controllers"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_arg;
  std::string controller_label;
  double level = 0.0;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;

  CLI::App* run = app.add_subcommand(
      "run", "Run the configured sweep and write the results CSV");
  run->add_option("--config", config_path, "Path to the JSON config file")
      ->required();
  run->add_option("--out", out_arg,
                  "Directory to place the CSV in (its name comes from the "
                  "config's output_path)");
  run->add_option("--threads", threads,
                  "Worker thread count; overrides LQC_THREADS");
  run->add_option("--seed", seed, "Override the config's base_seed");

  CLI::App* trace = app.add_subcommand(
      "trace", "Write one rollout's per-step trajectory CSV");
  trace->add_option("--config", config_path, "Path to the JSON config file")
      ->required();
  trace
      ->add_option("--controller", controller_label,
                   "Controller label as it appears in sweep output, e.g. "
                   "lambda(0.6)")
      ->required();
  trace
      ->add_option("--level", level,
                   "Noise level; must be one of the config's noise_levels")
      ->required();
  trace->add_option("--out", out_arg, "Output CSV file")->required();

  CLI::App* validate = app.add_subcommand(
      "validate", "Parse and validate the config without running anything");
  validate->add_option("--config", config_path, "Path to the JSON config file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(run)) {
      return run_command(config_path, out_arg, threads, seed);
    }
    if (app.got_subcommand(trace)) {
      return trace_command(config_path, controller_label, level, out_arg);
    }
    return validate_command(config_path);
  } catch (const lqc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const lqc::MissingFile& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
