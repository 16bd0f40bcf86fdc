#include "lqc/scenarios.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <string_view>

#include "lqc/errors.hpp"

namespace lqc {
namespace {

Eigen::VectorXd reference_point(int t) {
  const double slow = std::numbers::pi * t / 30.0;
  const double fast = std::numbers::pi * t / 5.0;
  Eigen::VectorXd y(2);
  y << 2.0 * std::cos(slow) + std::cos(fast),
      2.0 * std::sin(slow) + std::sin(fast);
  return y;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      return fields;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

int parse_int_field(std::string_view field, int row, int column,
                    const char* name) {
  int value = 0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(row, column,
                     std::string(name) + " is not an integer: '" +
                         std::string(field) + "'");
  }
  return value;
}

double parse_double_field(std::string_view field, int row, int column,
                          const char* name) {
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(row, column,
                     std::string(name) + " is not a number: '" +
                         std::string(field) + "'");
  }
  return value;
}

}  // namespace

TrackingInstance robot_tracking_instance(int horizon,
                                         std::optional<double> r_scale) {
  if (horizon < 2) {
    throw BadInput("tracking horizon must be at least 2");
  }
  double r = r_scale.value_or(1e-2);
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw BadInput("control-cost scale must be a finite nonnegative value");
  }
  if (r == 0.0) {
    r = 1e-9;
  }

  TrackingInstance inst;
  const double dt = 0.2;
  inst.sys.A = Eigen::MatrixXd::Identity(4, 4);
  inst.sys.A(0, 2) = dt;
  inst.sys.A(1, 3) = dt;
  inst.sys.B = Eigen::MatrixXd::Zero(4, 2);
  inst.sys.B(2, 0) = dt;
  inst.sys.B(3, 1) = dt;
  inst.sys.Q = Eigen::Vector4d(1.0, 1.0, 0.0, 0.0).asDiagonal();
  inst.sys.R = r * Eigen::MatrixXd::Identity(2, 2);

  inst.target.reserve(horizon + 1);
  for (int t = 0; t <= horizon; ++t) {
    inst.target.push_back(reference_point(t));
  }
  inst.w.reserve(horizon);
  for (int t = 0; t < horizon; ++t) {
    Eigen::VectorXd w_t = Eigen::VectorXd::Zero(4);
    w_t.head(2) = inst.target[t] - inst.target[t + 1];
    inst.w.push_back(std::move(w_t));
  }
  return inst;
}

EvInstance ev_charging_instance(int chargers, int horizon,
                                const std::vector<EvSession>& sessions) {
  if (chargers < 1) {
    throw BadInput("need at least one charger");
  }
  if (horizon < 1) {
    throw BadInput("horizon must be positive");
  }

  EvInstance inst;
  inst.sys.A = Eigen::MatrixXd::Identity(chargers, chargers);
  inst.sys.B = inst.sys.A;
  inst.sys.Q = inst.sys.A;
  inst.sys.R = 0.1 * inst.sys.A;
  inst.w.assign(horizon, Eigen::VectorXd::Zero(chargers));

  for (const auto& session : sessions) {
    if (session.charger_id < 0 || session.charger_id >= chargers) {
      throw BadInput("charger id " + std::to_string(session.charger_id) +
                     " outside [0, " + std::to_string(chargers) + ")");
    }
    if (session.arrival_slot < 0 || session.arrival_slot >= horizon) {
      throw BadInput("arrival slot " + std::to_string(session.arrival_slot) +
                     " outside [0, " + std::to_string(horizon) + ")");
    }
    if (!(session.energy_kwh > 0.0)) {
      throw BadInput("session energy must be positive");
    }
    inst.w[session.arrival_slot](session.charger_id) -= session.energy_kwh;
  }
  return inst;
}

std::vector<EvSession> synthetic_ev_sessions(int horizon, int chargers,
                                             double energy_kwh) {
  if (chargers < 1) {
    throw BadInput("need at least one charger");
  }
  if (!(energy_kwh > 0.0)) {
    throw BadInput("session energy must be positive");
  }
  std::vector<EvSession> sessions;
  for (int t = 0; t < horizon; t += 5) {
    sessions.push_back({t, (t / 5) % chargers, energy_kwh});
  }
  return sessions;
}

std::vector<EvSession> ingest_ev_csv(const std::string& path) {
  std::ifstream file(path);
  if (!file.is_open()) {
    throw MissingFile("cannot open session file: " + path);
  }

  std::vector<EvSession> sessions;
  std::string line;
  int row = 0;
  while (std::getline(file, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (trim(line).empty()) {
      continue;
    }
    const auto fields = split_fields(line);
    if (row == 1) {
      if (fields.size() != 3 || fields[0] != "arrival_slot" ||
          fields[1] != "charger_id" || fields[2] != "energy_kwh") {
        throw ParseError(
            1, 1, "expected header 'arrival_slot,charger_id,energy_kwh'");
      }
      continue;
    }
    if (fields.size() != 3) {
      throw ParseError(row, static_cast<int>(fields.size()),
                       "expected 3 fields, found " +
                           std::to_string(fields.size()));
    }
    EvSession session;
    session.arrival_slot = parse_int_field(fields[0], row, 1, "arrival_slot");
    session.charger_id = parse_int_field(fields[1], row, 2, "charger_id");
    session.energy_kwh = parse_double_field(fields[2], row, 3, "energy_kwh");
    if (session.arrival_slot < 0) {
      throw ValidationError(row, "arrival_slot must be nonnegative");
    }
    if (session.charger_id < 0) {
      throw ValidationError(row, "charger_id must be nonnegative");
    }
    if (!(session.energy_kwh > 0.0)) {
      throw ValidationError(row, "energy_kwh must be positive");
    }
    sessions.push_back(session);
  }
  if (row == 0) {
    throw ParseError(1, 1, "file is empty, expected a header row");
  }
  return sessions;
}

CartPoleInstance cartpole_instance(const CartPoleParams& params, int horizon) {
  params.validate();
  if (horizon < 1) {
    throw BadInput("horizon must be positive");
  }

  const double total = params.cart_mass + params.pole_mass;
  const double eta =
      params.pole_length * (4.0 / 3.0 - params.pole_mass / total);
  const double force_to_cart = (total * eta + params.pole_mass * params.pole_length) /
                               (total * total * eta);
  const double force_to_pole = -1.0 / (total * eta);

  Eigen::MatrixXd a_c = Eigen::MatrixXd::Zero(4, 4);
  a_c(0, 1) = 1.0;
  a_c(1, 2) = -params.pole_mass * params.pole_length * params.gravity /
              (eta * total);
  a_c(2, 3) = 1.0;
  a_c(3, 2) = params.gravity / eta;
  Eigen::MatrixXd b_c = Eigen::MatrixXd::Zero(4, 1);
  b_c(1, 0) = force_to_cart;
  b_c(3, 0) = force_to_pole;

  CartPoleInstance inst;
  inst.params = params;
  inst.sys.A = Eigen::MatrixXd::Identity(4, 4) + params.dt * a_c;
  inst.sys.B = params.dt * b_c;
  inst.sys.Q = Eigen::MatrixXd::Identity(4, 4);
  inst.sys.R = Eigen::MatrixXd::Constant(1, 1, 1e-3);

  Eigen::VectorXd w_t = Eigen::VectorXd::Zero(4);
  w_t(1) = 60.0 * force_to_cart;
  w_t(3) = 60.0 * force_to_pole;
  inst.w.assign(horizon, w_t);
  return inst;
}

std::vector<Eigen::VectorXd> generate_predictions(
    const std::vector<Eigen::VectorXd>& w, const NoiseModel& noise) {
  if (!(noise.param >= 0.0) || !std::isfinite(noise.param)) {
    throw BadInput("noise parameter must be a finite nonnegative value");
  }
  if (noise.param == 0.0) {
    return w;
  }

  std::mt19937_64 rng(noise.seed);
  std::vector<Eigen::VectorXd> w_hat;
  w_hat.reserve(w.size());

  switch (noise.kind) {
    case NoiseKind::kBinomialScaled: {
      std::binomial_distribution<int> draws(10, 0.5);
      for (const auto& w_t : w) {
        Eigen::VectorXd e(w_t.size());
        if (noise.broadcast) {
          e.setConstant(noise.param * draws(rng));
        } else {
          for (Eigen::Index i = 0; i < e.size(); ++i) {
            e(i) = noise.param * draws(rng);
          }
        }
        w_hat.push_back(w_t + e);
      }
      break;
    }
    case NoiseKind::kGaussianIid: {
      std::normal_distribution<double> draws(0.0, std::sqrt(noise.param));
      for (const auto& w_t : w) {
        Eigen::VectorXd e(w_t.size());
        for (Eigen::Index i = 0; i < e.size(); ++i) {
          e(i) = draws(rng);
        }
        w_hat.push_back(w_t + e);
      }
      break;
    }
    case NoiseKind::kGaussianScaledW: {
      std::normal_distribution<double> draws(0.0, std::sqrt(noise.param));
      for (const auto& w_t : w) {
        const double z = draws(rng);
        w_hat.push_back(w_t + z * w_t);
      }
      break;
    }
  }
  return w_hat;
}

RiccatiSolution solve_instance_dare(const SystemMatrices& sys, int horizon,
                                    double tol, int max_iter) {
  try {
    return solve_dare(sys, horizon, tol, max_iter);
  } catch (const NonConvergence&) {
    SystemMatrices regularized = sys;
    regularized.Q += 1e-9 * Eigen::MatrixXd::Identity(sys.state_dim(),
                                                      sys.state_dim());
    return solve_dare(regularized, horizon, tol, max_iter);
  }
}

}  // namespace lqc
