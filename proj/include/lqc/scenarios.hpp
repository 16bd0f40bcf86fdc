#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lqc/riccati.hpp"
#include "lqc/simulation.hpp"

namespace lqc {

// Planar point-mass tracking. The state is (position - target, velocity),
// so the disturbance sequence carries the target's motion and perfect
// tracking means driving the state to zero.
struct TrackingInstance {
  SystemMatrices sys;
  std::vector<Eigen::VectorXd> w;       // length horizon
  std::vector<Eigen::VectorXd> target;  // reference points, length horizon+1
};

// Builds the tracking instance over the fixed figure-eight-like reference
//
//   y_t = (2 cos(pi t/30) + cos(pi t/5), 2 sin(pi t/30) + sin(pi t/5)).
//
// r_scale overrides the control-cost scale (default 1e-2); a zero override
// is replaced by 1e-9 so R stays invertible. Requires horizon >= 2.
TrackingInstance robot_tracking_instance(
    int horizon, std::optional<double> r_scale = {});

// One charging demand: energy_kwh arrives at charger_id in slot
// arrival_slot and must eventually be delivered.
struct EvSession {
  int arrival_slot = 0;
  int charger_id = 0;
  double energy_kwh = 0.0;
};

struct EvInstance {
  SystemMatrices sys;
  std::vector<Eigen::VectorXd> w;  // length horizon
};

// Fleet-charging instance: state is the per-charger energy backlog,
// x_{t+1} = x_t + u_t + w_t with w carrying -energy at each arrival.
// Sessions outside [0, horizon) x [0, chargers) or with non-positive
// energy are rejected with BadInput.
EvInstance ev_charging_instance(int chargers, int horizon,
                                const std::vector<EvSession>& sessions);

// Deterministic demand stream: one 5 kWh session every fifth slot
// (t = 0, 5, 10, ...), assigned round-robin over the chargers.
std::vector<EvSession> synthetic_ev_sessions(int horizon, int chargers,
                                             double energy_kwh = 5.0);

// Reads sessions from a CSV file with header
// `arrival_slot,charger_id,energy_kwh` (slots 0-based, one session per
// row, blank lines ignored). Throws MissingFile, ParseError with the
// 1-based row and field, or ValidationError for rows violating the
// session invariants.
std::vector<EvSession> ingest_ev_csv(const std::string& path);

struct CartPoleInstance {
  SystemMatrices sys;  // Euler-discretized linearization about upright
  std::vector<Eigen::VectorXd> w;  // constant forcing, length horizon
  CartPoleParams params;
};

// Linearizes the pendulum-on-cart dynamics about the upright equilibrium,
// discretizes with the params' Euler step, and pairs the result with the
// standard constant wind disturbance. Q = I, R = 1e-3.
CartPoleInstance cartpole_instance(const CartPoleParams& params, int horizon);

enum class NoiseKind {
  kBinomialScaled,  // e = param * X per entry, X ~ Binomial(10, 0.5)
  kGaussianIid,     // e ~ N(0, param) per entry (param is the variance)
  kGaussianScaledW  // e_t = Z_t * w_t, scalar Z_t ~ N(0, param)
};

struct NoiseModel {
  NoiseKind kind = NoiseKind::kGaussianIid;
  double param = 0.0;
  std::uint64_t seed = 0;
  // Binomial only: share a single draw across all components of a step
  // instead of drawing per component.
  bool broadcast = false;
};

// Corrupts a disturbance sequence into predictions, w_hat_t = w_t + e_t.
// Deterministic in (w, noise); param == 0 returns the truth unchanged.
std::vector<Eigen::VectorXd> generate_predictions(
    const std::vector<Eigen::VectorXd>& w, const NoiseModel& noise);

// solve_dare with the scenario fallback: when the iteration stalls on a
// semidefinite state cost, retry once with Q + 1e-9 I.
RiccatiSolution solve_instance_dare(const SystemMatrices& sys, int horizon,
                                    double tol = 1e-12,
                                    int max_iter = 100000);

}  // namespace lqc
