#include "lqc/experiment.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "lqc/controllers.hpp"
#include "lqc/errors.hpp"
#include "lqc/metrics.hpp"

namespace lqc {
namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

std::string fmt_label_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return std::string(buf);
}

void require_allowed_keys(const json& obj,
                          std::initializer_list<std::string_view> allowed,
                          const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const auto& key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
  }
}

template <typename T>
T get_field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) {
    throw ConfigError("missing '" + std::string(key) + "' in " + where);
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad '" + std::string(key) + "' in " + where + ": " +
                      e.what());
  }
}

template <typename T>
T get_field_or(const json& obj, const char* key, T fallback,
               const std::string& where) {
  if (!obj.contains(key)) {
    return fallback;
  }
  return get_field<T>(obj, key, where);
}

ControllerSpec parse_controller(const json& jc, const std::string& where) {
  if (!jc.is_object()) {
    throw ConfigError(where + " must be an object");
  }
  const auto type = get_field<std::string>(jc, "type", where);
  ControllerSpec spec;
  if (type == "offline") {
    require_allowed_keys(jc, {"type"}, where);
    spec.kind = ControllerKind::kOffline;
  } else if (type == "zero") {
    require_allowed_keys(jc, {"type"}, where);
    spec.kind = ControllerKind::kZero;
  } else if (type == "one") {
    require_allowed_keys(jc, {"type"}, where);
    spec.kind = ControllerKind::kOne;
  } else if (type == "lambda") {
    require_allowed_keys(jc, {"type", "lambda"}, where);
    spec.kind = ControllerKind::kLambda;
    spec.lambda = get_field<double>(jc, "lambda", where);
  } else if (type == "threshold") {
    require_allowed_keys(jc, {"type", "sigma"}, where);
    spec.kind = ControllerKind::kThreshold;
    spec.sigma = get_field_or<double>(jc, "sigma", 1e-9, where);
  } else if (type == "self_tuning") {
    require_allowed_keys(jc, {"type", "lambda0", "clamp"}, where);
    spec.kind = ControllerKind::kSelfTuning;
    spec.lambda0 = get_field_or<double>(jc, "lambda0", 0.3, where);
    spec.clamp = get_field_or<bool>(jc, "clamp", false, where);
  } else {
    throw ConfigError("unknown controller type '" + type + "' in " + where);
  }
  return spec;
}

NoiseKind parse_noise_kind(const std::string& kind, const std::string& where) {
  if (kind == "binomial_scaled") return NoiseKind::kBinomialScaled;
  if (kind == "gaussian_iid") return NoiseKind::kGaussianIid;
  if (kind == "gaussian_scaled_w") return NoiseKind::kGaussianScaledW;
  throw ConfigError("unknown noise kind '" + kind + "' in " + where);
}

void parse_scenario(const json& sc, ExperimentConfig& config) {
  const std::string where = "scenario";
  if (!sc.is_object()) {
    throw ConfigError("'scenario' must be an object");
  }
  const auto kind = get_field<std::string>(sc, "kind", where);
  config.horizon = get_field<int>(sc, "horizon", where);
  if (sc.contains("initial_state")) {
    config.initial_state =
        get_field<std::vector<double>>(sc, "initial_state", where);
  }
  if (kind == "tracking") {
    require_allowed_keys(sc, {"kind", "horizon", "r_scale", "initial_state"},
                         where);
    config.scenario = ScenarioKind::kTracking;
    if (sc.contains("r_scale")) {
      config.tracking_r_scale = get_field<double>(sc, "r_scale", where);
    }
  } else if (kind == "ev_synthetic") {
    require_allowed_keys(sc, {"kind", "horizon", "chargers", "initial_state"},
                         where);
    config.scenario = ScenarioKind::kEvSynthetic;
    config.ev_chargers = get_field_or<int>(sc, "chargers", 10, where);
  } else if (kind == "ev_csv") {
    require_allowed_keys(
        sc, {"kind", "horizon", "chargers", "path", "initial_state"}, where);
    config.scenario = ScenarioKind::kEvCsv;
    config.ev_chargers = get_field_or<int>(sc, "chargers", 52, where);
    config.sessions_path = get_field<std::string>(sc, "path", where);
  } else if (kind == "cartpole") {
    require_allowed_keys(sc,
                         {"kind", "horizon", "cart_mass", "pole_mass",
                          "pole_length", "gravity", "dt", "fail_angle",
                          "failure_penalty", "initial_state"},
                         where);
    config.scenario = ScenarioKind::kCartPole;
    config.cartpole.cart_mass =
        get_field_or<double>(sc, "cart_mass", config.cartpole.cart_mass, where);
    config.cartpole.pole_mass =
        get_field_or<double>(sc, "pole_mass", config.cartpole.pole_mass, where);
    config.cartpole.pole_length = get_field_or<double>(
        sc, "pole_length", config.cartpole.pole_length, where);
    config.cartpole.gravity =
        get_field_or<double>(sc, "gravity", config.cartpole.gravity, where);
    config.cartpole.dt = get_field_or<double>(sc, "dt", config.cartpole.dt, where);
    config.cartpole.fail_angle = get_field_or<double>(
        sc, "fail_angle", config.cartpole.fail_angle, where);
    config.cartpole_failure_penalty =
        get_field_or<double>(sc, "failure_penalty", 0.0, where);
  } else {
    throw ConfigError("unknown scenario kind '" + kind + "'");
  }
}

// Everything a sweep needs about the configured plant, built once and
// shared read-only across worker threads.
struct BuiltScenario {
  std::string name;
  SystemMatrices sys;
  std::vector<Eigen::VectorXd> w;
  Eigen::VectorXd x0;
  bool cartpole = false;
  CartPoleParams params;
  double failure_penalty = 0.0;
};

BuiltScenario build_scenario(const ExperimentConfig& config) {
  BuiltScenario built;
  switch (config.scenario) {
    case ScenarioKind::kTracking: {
      auto inst =
          robot_tracking_instance(config.horizon, config.tracking_r_scale);
      built.name = "tracking";
      built.sys = std::move(inst.sys);
      built.w = std::move(inst.w);
      break;
    }
    case ScenarioKind::kEvSynthetic: {
      auto inst = ev_charging_instance(
          config.ev_chargers, config.horizon,
          synthetic_ev_sessions(config.horizon, config.ev_chargers));
      built.name = "ev_synthetic";
      built.sys = std::move(inst.sys);
      built.w = std::move(inst.w);
      break;
    }
    case ScenarioKind::kEvCsv: {
      auto inst = ev_charging_instance(config.ev_chargers, config.horizon,
                                       ingest_ev_csv(config.sessions_path));
      built.name = "ev_csv";
      built.sys = std::move(inst.sys);
      built.w = std::move(inst.w);
      break;
    }
    case ScenarioKind::kCartPole: {
      auto inst = cartpole_instance(config.cartpole, config.horizon);
      built.name = "cartpole";
      built.sys = std::move(inst.sys);
      built.w = std::move(inst.w);
      built.cartpole = true;
      built.params = inst.params;
      built.failure_penalty = config.cartpole_failure_penalty;
      break;
    }
  }
  const int n = built.sys.state_dim();
  if (config.initial_state) {
    if (static_cast<int>(config.initial_state->size()) != n) {
      throw ConfigError("initial_state has " +
                        std::to_string(config.initial_state->size()) +
                        " entries, scenario state dimension is " +
                        std::to_string(n));
    }
    built.x0 = Eigen::Map<const Eigen::VectorXd>(config.initial_state->data(),
                                                 n);
  } else {
    built.x0 = Eigen::VectorXd::Zero(n);
  }
  return built;
}

std::unique_ptr<Policy> make_policy(const ControllerSpec& spec,
                                    const RiccatiSolution& ric,
                                    const std::vector<Eigen::VectorXd>& w_hat) {
  switch (spec.kind) {
    case ControllerKind::kOffline:
    case ControllerKind::kOne:
      return std::make_unique<LambdaConfidentPolicy>(ric, w_hat, 1.0);
    case ControllerKind::kZero:
      return std::make_unique<ZeroConfidentPolicy>(ric);
    case ControllerKind::kLambda:
      return std::make_unique<LambdaConfidentPolicy>(ric, w_hat, spec.lambda);
    case ControllerKind::kThreshold:
      return std::make_unique<ThresholdPolicy>(ric, w_hat, spec.sigma);
    case ControllerKind::kSelfTuning: {
      SelfTuningConfig cfg;
      cfg.lambda0 = spec.lambda0;
      cfg.clamp = spec.clamp;
      return std::make_unique<SelfTuningPolicy>(ric, w_hat, cfg);
    }
  }
  throw ConfigError("unhandled controller kind");
}

struct RepOutcome {
  double alg = 0.0;
  std::optional<double> lambda_final;
  bool diverged = false;
  int survival = 0;
};

struct CellResult {
  double epsilon = 0.0;
  double mu_var_wh = 0.0;
  std::vector<RepOutcome> per_controller;
  std::exception_ptr error;
};

void compute_cell(const ExperimentConfig& config, const BuiltScenario& built,
                  const RiccatiSolution& ric, int level_index,
                  int repetition_index, CellResult& out) {
  NoiseModel noise = config.noise;
  noise.param = config.noise_levels[level_index];
  noise.seed = cell_seed(config.base_seed, level_index, repetition_index);
  const auto w_hat = generate_predictions(built.w, noise);

  out.epsilon = prediction_error(ric, built.w, w_hat);
  out.mu_var_wh = self_variation(w_hat);
  out.per_controller.resize(config.controllers.size());

  for (size_t ci = 0; ci < config.controllers.size(); ++ci) {
    const ControllerSpec& spec = config.controllers[ci];
    RepOutcome& rep = out.per_controller[ci];
    const bool clairvoyant = spec.kind == ControllerKind::kOffline;
    PredictionWindow window(built.w, clairvoyant ? built.w : w_hat);
    const auto policy = make_policy(spec, ric, window.predictions());
    try {
      const Rollout rollout =
          built.cartpole
              ? rollout_cartpole(built.params, built.sys, ric, *policy,
                                 window, built.x0, built.failure_penalty)
              : rollout_linear(built.sys, ric, *policy, window, built.x0);
      rep.alg = rollout.total_cost;
      rep.lambda_final = rollout.lambda_final;
      rep.survival =
          rollout.failed ? *rollout.fail_step : window.horizon();
    } catch (const Diverged& diverged) {
      rep.alg = std::numeric_limits<double>::infinity();
      rep.diverged = true;
      rep.survival = diverged.step();
    } catch (const std::exception& e) {
      throw Error("controller " + spec.label() + ": " + e.what());
    }
  }
}

}  // namespace

std::string ControllerSpec::label() const {
  switch (kind) {
    case ControllerKind::kOffline:
      return "offline";
    case ControllerKind::kZero:
      return "zero";
    case ControllerKind::kOne:
      return "one";
    case ControllerKind::kLambda:
      return "lambda(" + fmt_label_value(lambda) + ")";
    case ControllerKind::kThreshold:
      return "threshold(" + fmt_label_value(sigma) + ")";
    case ControllerKind::kSelfTuning:
      return "self_tuning(" + fmt_label_value(lambda0) +
             (clamp ? ",clamped)" : ")");
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  if (schema_version != 1) {
    throw ConfigError("unsupported schema_version " +
                      std::to_string(schema_version) + ", expected 1");
  }
  const int min_horizon = scenario == ScenarioKind::kTracking ? 2 : 1;
  if (horizon < min_horizon) {
    throw ConfigError("horizon must be at least " +
                      std::to_string(min_horizon) + " for this scenario");
  }
  if (scenario == ScenarioKind::kEvCsv && sessions_path.empty()) {
    throw ConfigError("ev_csv scenario requires a session file path");
  }
  if ((scenario == ScenarioKind::kEvSynthetic ||
       scenario == ScenarioKind::kEvCsv) &&
      ev_chargers < 1) {
    throw ConfigError("need at least one charger");
  }
  if (scenario == ScenarioKind::kTracking && tracking_r_scale &&
      (!std::isfinite(*tracking_r_scale) || *tracking_r_scale < 0.0)) {
    throw ConfigError("r_scale must be a finite nonnegative value");
  }
  if (scenario == ScenarioKind::kCartPole) {
    try {
      cartpole.validate();
    } catch (const BadInput& e) {
      throw ConfigError(std::string("cartpole parameters: ") + e.what());
    }
    if (!std::isfinite(cartpole_failure_penalty) ||
        cartpole_failure_penalty < 0.0) {
      throw ConfigError("failure_penalty must be a finite nonnegative value");
    }
  }
  if (initial_state) {
    for (double v : *initial_state) {
      if (!std::isfinite(v)) {
        throw ConfigError("initial_state entries must be finite");
      }
    }
  }

  if (controllers.empty()) {
    throw ConfigError("need at least one controller");
  }
  std::vector<std::string> labels;
  for (const auto& spec : controllers) {
    if (!std::isfinite(spec.lambda)) {
      throw ConfigError("controller lambda must be finite");
    }
    if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma)) {
      throw ConfigError("controller sigma must be positive and finite");
    }
    if (!std::isfinite(spec.lambda0)) {
      throw ConfigError("controller lambda0 must be finite");
    }
    labels.push_back(spec.label());
  }
  for (size_t i = 0; i < labels.size(); ++i) {
    for (size_t k = i + 1; k < labels.size(); ++k) {
      if (labels[i] == labels[k]) {
        throw ConfigError("duplicate controller label '" + labels[i] + "'");
      }
    }
  }

  if (noise_levels.empty()) {
    throw ConfigError("need at least one noise level");
  }
  for (double level : noise_levels) {
    if (!std::isfinite(level) || level < 0.0) {
      throw ConfigError("noise levels must be finite and nonnegative");
    }
  }
  if (mc_repetitions < 1) {
    throw ConfigError("mc_repetitions must be at least 1");
  }
  if (output_path.empty()) {
    throw ConfigError("output_path must not be empty");
  }
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw ConfigError("config root must be a JSON object");
  }
  require_allowed_keys(j,
                       {"schema_version", "scenario", "controllers", "noise",
                        "noise_levels", "mc_repetitions", "base_seed",
                        "selection", "output_path"},
                       "config");

  ExperimentConfig config;
  config.schema_version = get_field<int>(j, "schema_version", "config");
  parse_scenario(
      j.contains("scenario") ? j.at("scenario") : json(nullptr), config);

  const json& jcontrollers = j.contains("controllers") ? j.at("controllers")
                                                       : json(nullptr);
  if (!jcontrollers.is_array()) {
    throw ConfigError("'controllers' must be an array");
  }
  config.controllers.clear();
  for (size_t i = 0; i < jcontrollers.size(); ++i) {
    config.controllers.push_back(parse_controller(
        jcontrollers[i], "controllers[" + std::to_string(i) + "]"));
  }

  if (j.contains("noise")) {
    const json& jnoise = j.at("noise");
    if (!jnoise.is_object()) {
      throw ConfigError("'noise' must be an object");
    }
    require_allowed_keys(jnoise, {"kind", "broadcast"}, "noise");
    config.noise.kind = parse_noise_kind(
        get_field<std::string>(jnoise, "kind", "noise"), "noise");
    config.noise.broadcast =
        get_field_or<bool>(jnoise, "broadcast", false, "noise");
  }

  config.noise_levels =
      get_field<std::vector<double>>(j, "noise_levels", "config");
  config.mc_repetitions =
      get_field_or<int>(j, "mc_repetitions", 5, "config");
  config.base_seed =
      get_field_or<std::uint64_t>(j, "base_seed", 0, "config");
  const auto selection =
      get_field_or<std::string>(j, "selection", "worst", "config");
  if (selection == "worst") {
    config.selection = SelectionRule::kWorst;
  } else if (selection == "mean") {
    config.selection = SelectionRule::kMean;
  } else {
    throw ConfigError("selection must be 'worst' or 'mean', got '" +
                      selection + "'");
  }
  config.output_path =
      get_field_or<std::string>(j, "output_path", "sweep.csv", "config");

  config.validate();
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream file(path);
  if (!file.is_open()) {
    throw MissingFile("cannot open config file: " + path);
  }
  std::ostringstream text;
  text << file.rdbuf();
  return parse_config(text.str());
}

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t cell_seed(std::uint64_t base_seed, int level_index,
                        int repetition_index) {
  std::uint64_t s = splitmix64(base_seed ^ 0x6C078965A5F374E5ull);
  s = splitmix64(s ^ (static_cast<std::uint64_t>(
                          static_cast<std::uint32_t>(level_index)) +
                      1));
  s = splitmix64(s ^ (static_cast<std::uint64_t>(
                          static_cast<std::uint32_t>(repetition_index)) +
                      1));
  return s;
}

int resolve_thread_count(std::optional<int> flag_value) {
  if (flag_value) {
    if (*flag_value < 1) {
      throw ConfigError("thread count must be at least 1");
    }
    return *flag_value;
  }
  if (const char* env = std::getenv("LQC_THREADS")) {
    int value = 0;
    const std::string text(env);
    const auto [ptr, ec] =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || value < 1) {
      throw ConfigError("LQC_THREADS must be a positive integer, got '" +
                        text + "'");
    }
    return value;
  }
  return 1;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config, int threads) {
  config.validate();
  const BuiltScenario built = build_scenario(config);
  const RiccatiSolution ric = solve_instance_dare(built.sys, config.horizon);
  const Rollout opt = offline_optimal_rollout(ric, built.sys, built.x0,
                                              built.w);
  const double mu_var_w = self_variation(built.w);

  const int levels = static_cast<int>(config.noise_levels.size());
  const int reps = config.mc_repetitions;
  const int cell_count = levels * reps;
  std::vector<CellResult> cells(cell_count);

  std::atomic<int> next{0};
  auto work = [&]() {
    for (int idx = next.fetch_add(1); idx < cell_count;
         idx = next.fetch_add(1)) {
      try {
        compute_cell(config, built, ric, idx / reps, idx % reps, cells[idx]);
      } catch (...) {
        cells[idx].error = std::current_exception();
      }
    }
  };

  const int workers = std::max(1, std::min(threads, cell_count));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) {
      pool.emplace_back(work);
    }
    for (auto& thread : pool) {
      thread.join();
    }
  }

  for (int idx = 0; idx < cell_count; ++idx) {
    if (!cells[idx].error) continue;
    try {
      std::rethrow_exception(cells[idx].error);
    } catch (const std::exception& e) {
      throw Error("noise level " + fmt_label_value(
                      config.noise_levels[idx / reps]) +
                  ", repetition " + std::to_string(idx % reps) + ": " +
                  e.what());
    }
  }

  std::vector<SweepRow> rows;
  rows.reserve(config.controllers.size() * levels);
  for (size_t ci = 0; ci < config.controllers.size(); ++ci) {
    for (int li = 0; li < levels; ++li) {
      int selected = 0;
      double worst = -std::numeric_limits<double>::infinity();
      double sum = 0.0;
      for (int ri = 0; ri < reps; ++ri) {
        const double alg = cells[li * reps + ri].per_controller[ci].alg;
        sum += alg;
        if (alg > worst) {
          worst = alg;
          selected = ri;
        }
      }

      SweepRow row;
      row.scenario = built.name;
      row.controller = config.controllers[ci].label();
      row.noise_level = config.noise_levels[li];
      row.opt_cost = opt.total_cost;
      row.mu_var_w = mu_var_w;
      row.repetition_index_selected = selected;

      const CellResult& cell = cells[li * reps + selected];
      const RepOutcome& outcome = cell.per_controller[ci];
      row.epsilon = cell.epsilon;
      row.mu_var_wh = cell.mu_var_wh;
      row.lambda_final = outcome.lambda_final;
      if (built.cartpole) {
        row.survival_steps = outcome.survival;
      }

      if (config.selection == SelectionRule::kWorst) {
        row.alg_cost = worst;
      } else {
        const double mean = sum / reps;
        double accum = 0.0;
        for (int ri = 0; ri < reps; ++ri) {
          const double d = cells[li * reps + ri].per_controller[ci].alg - mean;
          accum += d * d;
        }
        row.alg_cost = mean;
        row.alg_cost_std = reps > 1 ? std::sqrt(accum / (reps - 1)) : 0.0;
      }
      row.cr = row.alg_cost / row.opt_cost;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string format_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "scenario,controller,noise_level,epsilon,alg_cost,opt_cost,cr,"
      "mu_var_w,mu_var_wh,repetition_index_selected,lambda_final,"
      "alg_cost_std,survival_steps\n";
  for (const auto& row : rows) {
    out += row.scenario;
    out += ',';
    out += row.controller;
    out += ',';
    out += fmt_double(row.noise_level);
    out += ',';
    out += fmt_double(row.epsilon);
    out += ',';
    out += fmt_double(row.alg_cost);
    out += ',';
    out += fmt_double(row.opt_cost);
    out += ',';
    out += fmt_double(row.cr);
    out += ',';
    out += fmt_double(row.mu_var_w);
    out += ',';
    out += fmt_double(row.mu_var_wh);
    out += ',';
    out += std::to_string(row.repetition_index_selected);
    out += ',';
    if (row.lambda_final) out += fmt_double(*row.lambda_final);
    out += ',';
    if (row.alg_cost_std) out += fmt_double(*row.alg_cost_std);
    out += ',';
    if (row.survival_steps) out += std::to_string(*row.survival_steps);
    out += '\n';
  }
  return out;
}

void emit_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out.is_open()) {
    throw Error("cannot open output file for writing: " + path);
  }
  out << format_csv(rows);
  out.flush();
  if (!out.good()) {
    throw Error("failed while writing output file: " + path);
  }
}

Rollout trace_rollout(const ExperimentConfig& config,
                      const std::string& controller_label,
                      double noise_level) {
  config.validate();

  const ControllerSpec* spec = nullptr;
  for (const auto& candidate : config.controllers) {
    if (candidate.label() == controller_label) {
      spec = &candidate;
      break;
    }
  }
  if (spec == nullptr) {
    std::string known;
    for (const auto& candidate : config.controllers) {
      if (!known.empty()) known += ", ";
      known += candidate.label();
    }
    throw ConfigError("no controller labeled '" + controller_label +
                      "' in config (have: " + known + ")");
  }

  int level_index = -1;
  for (size_t li = 0; li < config.noise_levels.size(); ++li) {
    if (config.noise_levels[li] == noise_level) {
      level_index = static_cast<int>(li);
      break;
    }
  }
  if (level_index < 0) {
    throw ConfigError("noise level " + fmt_label_value(noise_level) +
                      " is not in the config's noise_levels");
  }

  const BuiltScenario built = build_scenario(config);
  const RiccatiSolution ric = solve_instance_dare(built.sys, config.horizon);

  NoiseModel noise = config.noise;
  noise.param = config.noise_levels[level_index];
  noise.seed = cell_seed(config.base_seed, level_index, 0);
  const auto w_hat = generate_predictions(built.w, noise);

  const bool clairvoyant = spec->kind == ControllerKind::kOffline;
  PredictionWindow window(built.w, clairvoyant ? built.w : w_hat);
  const auto policy = make_policy(*spec, ric, window.predictions());
  return built.cartpole
             ? rollout_cartpole(built.params, built.sys, ric, *policy, window,
                                built.x0, built.failure_penalty)
             : rollout_linear(built.sys, ric, *policy, window, built.x0);
}

std::string format_trace(const Rollout& rollout) {
  const int steps = static_cast<int>(rollout.actions.size());
  const int state_dim =
      rollout.states.empty() ? 0 : static_cast<int>(rollout.states[0].size());
  const int input_dim = steps > 0 ? static_cast<int>(rollout.actions[0].size())
                                  : 0;
  const bool with_lambda = !rollout.lambdas.empty();

  std::string out = "t";
  for (int i = 0; i < state_dim; ++i) out += ",x" + std::to_string(i);
  for (int j = 0; j < input_dim; ++j) out += ",u" + std::to_string(j);
  if (with_lambda) out += ",lambda";
  out += '\n';

  for (size_t t = 0; t < rollout.states.size(); ++t) {
    out += std::to_string(t);
    for (int i = 0; i < state_dim; ++i) {
      out += ',';
      out += fmt_double(rollout.states[t](i));
    }
    for (int j = 0; j < input_dim; ++j) {
      out += ',';
      if (t < rollout.actions.size()) {
        out += fmt_double(rollout.actions[t](j));
      }
    }
    if (with_lambda) {
      out += ',';
      if (t < rollout.lambdas.size()) {
        out += fmt_double(rollout.lambdas[t]);
      }
    }
    out += '\n';
  }
  return out;
}

void emit_trace(const Rollout& rollout, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out.is_open()) {
    throw Error("cannot open output file for writing: " + path);
  }
  out << format_trace(rollout);
  out.flush();
  if (!out.good()) {
    throw Error("failed while writing output file: " + path);
  }
}

}  // namespace lqc
