#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "lqc/controllers.hpp"
#include "lqc/riccati.hpp"

namespace lqc {

// Holds the prediction sequence (fully visible) and the true disturbances
// (revealed one step at a time). The rollout owns the reveal cursor; a
// controller that asks for a disturbance it has not been shown yet gets a
// CausalityViolation. Optional declared norm bounds are checked up front.
class PredictionWindow {
 public:
  PredictionWindow(std::vector<Eigen::VectorXd> w_true,
                   std::vector<Eigen::VectorXd> w_hat,
                   std::optional<double> w_norm_bound = {},
                   std::optional<double> w_hat_norm_bound = {});

  int horizon() const { return static_cast<int>(w_true_.size()); }
  int state_dim() const {
    return w_true_.empty() ? 0 : static_cast<int>(w_true_[0].size());
  }

  const std::vector<Eigen::VectorXd>& predictions() const { return w_hat_; }
  const Eigen::VectorXd& prediction(int t) const { return w_hat_.at(t); }

  // Causally monitored access: only disturbances already revealed by the
  // rollout may be read.
  const Eigen::VectorXd& observed_disturbance(int t) const;
  int revealed_count() const { return revealed_; }

  // Rollout-side: reveal the next true disturbance and return it.
  const Eigen::VectorXd& reveal_next();

  // Unmonitored access for offline computations (the optimal-cost oracle
  // is explicitly allowed to see the whole future).
  const std::vector<Eigen::VectorXd>& true_sequence() const {
    return w_true_;
  }

 private:
  std::vector<Eigen::VectorXd> w_true_;
  std::vector<Eigen::VectorXd> w_hat_;
  int revealed_ = 0;
};

struct Rollout {
  std::vector<Eigen::VectorXd> states;   // x_0 .. x_T
  std::vector<Eigen::VectorXd> actions;  // u_0 .. u_{T-1}
  std::vector<double> stage_costs;       // x_t'Qx_t + u_t'Ru_t
  double terminal_cost = 0.0;            // x_T'Px_T, or the failure penalty
  double total_cost = 0.0;
  std::vector<double> lambdas;  // per-step trust trace (adaptive policies)
  std::optional<double> lambda_final;
  bool failed = false;  // pole left the allowed cone before the horizon
  std::optional<int> fail_step;
};

// Rolls the controller out against x_{t+1} = A x_t + B u_t + w_t. The
// controller sees w_{t-1} through observe() before acting at step t.
// Throws Diverged with the index of the first non-finite state.
Rollout rollout_linear(const SystemMatrices& sys, const RiccatiSolution& ric,
                       Policy& controller, PredictionWindow& window,
                       const Eigen::VectorXd& x0);

struct CartPoleParams {
  double cart_mass = 10.0;
  double pole_mass = 1.0;
  double pole_length = 10.0;
  double gravity = 9.8;
  double dt = 0.02;
  double fail_angle = 0.20943951023931953;  // pi / 15

  void validate() const;
};

// Same contract as rollout_linear, but the state advances by one explicit
// Euler step of the nonlinear pendulum-on-cart equations plus w_t, while
// the controller still reasons with the linearized model behind `ric`.
// State layout: (y, ydot, theta, thetadot); the input is the scalar force.
// If |theta| leaves the allowed cone the episode stops: the rollout is
// returned with failed set, costs accumulated so far, and failure_penalty
// in place of the quadratic terminal cost.
Rollout rollout_cartpole(const CartPoleParams& params,
                         const SystemMatrices& sys_lin,
                         const RiccatiSolution& ric, Policy& controller,
                         PredictionWindow& window, const Eigen::VectorXd& x0,
                         double failure_penalty = 0.0);

// Cost-minimizing rollout: the prediction-following policy evaluated on
// the true disturbance sequence. Throws DegenerateInstance when the
// optimal cost is not strictly positive (ratios would be undefined).
Rollout offline_optimal_rollout(const RiccatiSolution& ric,
                                const SystemMatrices& sys,
                                const Eigen::VectorXd& x0,
                                const std::vector<Eigen::VectorXd>& w_true);

}  // namespace lqc
