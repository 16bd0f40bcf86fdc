#include "lqc/simulation.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace lqc {
namespace {

void check_uniform_dimensions(const std::vector<Eigen::VectorXd>& seq,
                              const char* label) {
  for (size_t t = 1; t < seq.size(); ++t) {
    if (seq[t].size() != seq[0].size()) {
      throw BadInput(std::string(label) + " vectors differ in dimension");
    }
  }
}

void check_norm_bound(const std::vector<Eigen::VectorXd>& seq, double bound,
                      const char* label) {
  for (size_t t = 0; t < seq.size(); ++t) {
    if (seq[t].norm() > bound) {
      throw BadInput(std::string(label) + "[" + std::to_string(t) +
                     "] exceeds its declared norm bound");
    }
  }
}

double stage_cost(const SystemMatrices& sys, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& u) {
  return x.dot(sys.Q * x) + u.dot(sys.R * u);
}

void record_lambda(Rollout& rollout, const Policy& controller) {
  if (auto lambda = controller.current_lambda()) {
    rollout.lambdas.push_back(*lambda);
  }
}

void finish_policy(Rollout& rollout, Policy& controller,
                   const PredictionWindow& window) {
  const int T = window.horizon();
  if (T > 0) {
    controller.finish(window.observed_disturbance(T - 1));
  }
  rollout.lambda_final = controller.final_lambda();
}

}  // namespace

PredictionWindow::PredictionWindow(std::vector<Eigen::VectorXd> w_true,
                                   std::vector<Eigen::VectorXd> w_hat,
                                   std::optional<double> w_norm_bound,
                                   std::optional<double> w_hat_norm_bound)
    : w_true_(std::move(w_true)), w_hat_(std::move(w_hat)) {
  if (w_true_.size() != w_hat_.size()) {
    throw BadInput("disturbances and predictions must have equal length");
  }
  if (w_true_.empty()) {
    throw BadInput("horizon must be positive");
  }
  check_uniform_dimensions(w_true_, "w");
  check_uniform_dimensions(w_hat_, "w_hat");
  if (w_hat_[0].size() != w_true_[0].size()) {
    throw BadInput("disturbances and predictions differ in dimension");
  }
  if (w_norm_bound) check_norm_bound(w_true_, *w_norm_bound, "w");
  if (w_hat_norm_bound) check_norm_bound(w_hat_, *w_hat_norm_bound, "w_hat");
}

const Eigen::VectorXd& PredictionWindow::observed_disturbance(int t) const {
  if (t < 0 || t >= horizon()) {
    throw BadInput("disturbance index out of range");
  }
  if (t >= revealed_) {
    throw CausalityViolation("read of disturbance " + std::to_string(t) +
                             " with only " + std::to_string(revealed_) +
                             " steps revealed");
  }
  return w_true_[t];
}

const Eigen::VectorXd& PredictionWindow::reveal_next() {
  if (revealed_ >= horizon()) {
    throw BadInput("rollout advanced past the horizon");
  }
  return w_true_[revealed_++];
}

Rollout rollout_linear(const SystemMatrices& sys, const RiccatiSolution& ric,
                       Policy& controller, PredictionWindow& window,
                       const Eigen::VectorXd& x0) {
  const int T = window.horizon();
  if (ric.horizon() != T) {
    throw BadInput("power cache horizon does not match the window");
  }
  if (x0.size() != sys.state_dim() ||
      window.state_dim() != sys.state_dim()) {
    throw BadInput("state dimension mismatch");
  }
  if (window.revealed_count() != 0) {
    throw BadInput("window already partially revealed");
  }

  Rollout rollout;
  rollout.states.reserve(T + 1);
  rollout.actions.reserve(T);
  rollout.stage_costs.reserve(T);
  rollout.states.push_back(x0);
  if (!x0.allFinite()) {
    throw Diverged(0, "initial state is not finite");
  }

  Eigen::VectorXd x = x0;
  for (int t = 0; t < T; ++t) {
    if (t >= 1) {
      controller.observe(t, window.observed_disturbance(t - 1));
    }
    Eigen::VectorXd u = controller.action(x, t);
    record_lambda(rollout, controller);
    rollout.stage_costs.push_back(stage_cost(sys, x, u));
    x = sys.A * x + sys.B * u + window.reveal_next();
    if (!x.allFinite()) {
      throw Diverged(t + 1, "state became non-finite at step " +
                               std::to_string(t + 1));
    }
    rollout.actions.push_back(std::move(u));
    rollout.states.push_back(x);
  }

  rollout.terminal_cost = x.dot(ric.P * x);
  double total = 0.0;
  for (double c : rollout.stage_costs) total += c;
  rollout.total_cost = total + rollout.terminal_cost;
  finish_policy(rollout, controller, window);
  return rollout;
}

void CartPoleParams::validate() const {
  if (!(cart_mass > 0.0) || !(pole_mass > 0.0) || !(pole_length > 0.0) ||
      !(gravity > 0.0) || !(fail_angle > 0.0)) {
    throw BadInput("cart-pole physical parameters must be positive");
  }
  if (!(dt > 0.0) || dt > 0.1) {
    throw BadInput("dt must lie in (0, 0.1]");
  }
}

Rollout rollout_cartpole(const CartPoleParams& params,
                         const SystemMatrices& sys_lin,
                         const RiccatiSolution& ric, Policy& controller,
                         PredictionWindow& window, const Eigen::VectorXd& x0,
                         double failure_penalty) {
  params.validate();
  const int T = window.horizon();
  if (ric.horizon() != T) {
    throw BadInput("power cache horizon does not match the window");
  }
  if (sys_lin.state_dim() != 4 || sys_lin.input_dim() != 1 ||
      x0.size() != 4 || window.state_dim() != 4) {
    throw BadInput("cart-pole expects a 4-state, single-input system");
  }

  const double mc = params.cart_mass;
  const double mp = params.pole_mass;
  const double l = params.pole_length;
  const double g = params.gravity;
  const double total_mass = mc + mp;

  Rollout rollout;
  rollout.states.push_back(x0);
  Eigen::VectorXd x = x0;

  auto fails = [&](const Eigen::VectorXd& state) {
    return std::abs(state(2)) > params.fail_angle;
  };
  if (fails(x)) {
    rollout.failed = true;
    rollout.fail_step = 0;
    rollout.terminal_cost = failure_penalty;
    rollout.total_cost = failure_penalty;
    return rollout;
  }

  for (int t = 0; t < T; ++t) {
    if (t >= 1) {
      controller.observe(t, window.observed_disturbance(t - 1));
    }
    Eigen::VectorXd u = controller.action(x, t);
    record_lambda(rollout, controller);
    rollout.stage_costs.push_back(stage_cost(sys_lin, x, u));

    const double force = u(0);
    const double theta = x(2);
    const double theta_dot = x(3);
    const double sin_t = std::sin(theta);
    const double cos_t = std::cos(theta);
    // Pole and cart accelerations of the frictionless pendulum-on-cart.
    // The pole pivots at the cart, so the force enters the angular channel
    // through the moving support, with the opposite sign to the angle.
    const double support =
        (-force - mp * l * theta_dot * theta_dot * sin_t) / total_mass;
    const double theta_acc =
        (g * sin_t + cos_t * support) /
        (l * (4.0 / 3.0 - mp * cos_t * cos_t / total_mass));
    const double y_acc =
        (force + mp * l * (theta_dot * theta_dot * sin_t -
                           theta_acc * cos_t)) /
        total_mass;

    Eigen::VectorXd next(4);
    next(0) = x(0) + params.dt * x(1);
    next(1) = x(1) + params.dt * y_acc;
    next(2) = x(2) + params.dt * theta_dot;
    next(3) = x(3) + params.dt * theta_acc;
    next += window.reveal_next();

    if (!next.allFinite()) {
      throw Diverged(t + 1, "cart-pole state became non-finite at step " +
                                std::to_string(t + 1));
    }
    rollout.actions.push_back(std::move(u));
    rollout.states.push_back(next);
    x = next;

    if (fails(x)) {
      rollout.failed = true;
      rollout.fail_step = t + 1;
      break;
    }
  }

  double total = 0.0;
  for (double c : rollout.stage_costs) total += c;
  if (rollout.failed) {
    rollout.terminal_cost = failure_penalty;
  } else {
    rollout.terminal_cost = x.dot(ric.P * x);
  }
  rollout.total_cost = total + rollout.terminal_cost;
  if (!rollout.failed) {
    finish_policy(rollout, controller, window);
  }
  return rollout;
}

Rollout offline_optimal_rollout(const RiccatiSolution& ric,
                                const SystemMatrices& sys,
                                const Eigen::VectorXd& x0,
                                const std::vector<Eigen::VectorXd>& w_true) {
  PredictionWindow window(w_true, w_true);
  LambdaConfidentPolicy policy(ric, window.predictions(), 1.0);
  Rollout rollout = rollout_linear(sys, ric, policy, window, x0);
  if (!(rollout.total_cost > 0.0)) {
    throw DegenerateInstance("optimal cost is not strictly positive");
  }
  return rollout;
}

}  // namespace lqc
