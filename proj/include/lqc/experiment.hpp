#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lqc/scenarios.hpp"
#include "lqc/simulation.hpp"

namespace lqc {

enum class ScenarioKind { kTracking, kEvSynthetic, kEvCsv, kCartPole };

enum class ControllerKind {
  kOffline,     // prediction-following policy fed the true disturbances
  kZero,        // pure state feedback
  kOne,         // follows the predictions completely
  kLambda,      // fixed trust parameter
  kThreshold,   // trust until accumulated error reaches sigma
  kSelfTuning,  // online trust estimate
};

struct ControllerSpec {
  ControllerKind kind = ControllerKind::kZero;
  double lambda = 1.0;   // kLambda
  double sigma = 1e-9;   // kThreshold
  double lambda0 = 0.3;  // kSelfTuning
  bool clamp = false;    // kSelfTuning

  // Stable display name, e.g. "lambda(0.6)"; doubles are printed with %g.
  std::string label() const;
};

enum class SelectionRule {
  kWorst,  // report the repetition with the largest cost
  kMean,   // report mean cost and its sample standard deviation
};

struct ExperimentConfig {
  int schema_version = 1;
  ScenarioKind scenario = ScenarioKind::kTracking;
  int horizon = 200;
  std::string sessions_path;              // kEvCsv
  int ev_chargers = 10;                   // kEvSynthetic / kEvCsv
  std::optional<double> tracking_r_scale; // kTracking
  CartPoleParams cartpole;                // kCartPole
  double cartpole_failure_penalty = 0.0;  // kCartPole
  std::optional<std::vector<double>> initial_state;  // default: origin

  std::vector<ControllerSpec> controllers;
  NoiseModel noise;  // template: param and seed are set per sweep cell
  std::vector<double> noise_levels;
  int mc_repetitions = 5;
  std::uint64_t base_seed = 0;
  SelectionRule selection = SelectionRule::kWorst;
  std::string output_path = "sweep.csv";

  void validate() const;  // throws ConfigError
};

// Parses the versioned JSON config format (see README). Unknown keys are
// rejected so typos surface as ConfigError instead of silent defaults.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// Per-cell RNG seed. Depends only on (base_seed, level, repetition), never
// on the controller or the worker thread, so reruns and different thread
// counts replay identical noise.
std::uint64_t cell_seed(std::uint64_t base_seed, int level_index,
                        int repetition_index);

// Thread-count resolution: explicit flag wins, then the LQC_THREADS
// environment variable, then 1.
int resolve_thread_count(std::optional<int> flag_value);

struct SweepRow {
  std::string scenario;
  std::string controller;
  double noise_level = 0.0;
  double epsilon = 0.0;
  double alg_cost = 0.0;
  double opt_cost = 0.0;
  double cr = 0.0;
  double mu_var_w = 0.0;
  double mu_var_wh = 0.0;
  int repetition_index_selected = 0;
  std::optional<double> lambda_final;   // adaptive controllers only
  std::optional<double> alg_cost_std;   // mean selection only
  std::optional<int> survival_steps;    // cart-pole only
};

// Runs the controller x noise-level sweep, worker pool over (level,
// repetition) cells. Output row order is controllers-major in config
// order. Diverged repetitions surface as +inf costs, never as dropped
// rows; every other failure is rethrown with cell context attached.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config,
                                int threads = 1);

std::string format_csv(const std::vector<SweepRow>& rows);
void emit_csv(const std::vector<SweepRow>& rows, const std::string& path);

// Reruns a single (controller, level) cell at repetition 0 and returns the
// rollout, for per-step trajectory inspection.
Rollout trace_rollout(const ExperimentConfig& config,
                      const std::string& controller_label,
                      double noise_level);

// Per-step table: t, state components, action components, and the trust
// trace when the rollout carries one. The terminal state appears as a
// final line with blank action fields.
std::string format_trace(const Rollout& rollout);
void emit_trace(const Rollout& rollout, const std::string& path);

}  // namespace lqc
