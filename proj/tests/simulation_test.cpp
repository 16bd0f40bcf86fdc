#include "lqc/simulation.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "lqc/controllers.hpp"
#include "test_support.hpp"

namespace lqc {
namespace {

using ::lqc::testing::ExpectMatrixNear;
using ::lqc::testing::make_scalar_system;
using ::lqc::testing::random_sequence;
using ::lqc::testing::random_system;
using ::lqc::testing::random_vector;

std::vector<Eigen::VectorXd> zero_sequence(int T, int n) {
  return std::vector<Eigen::VectorXd>(T, Eigen::VectorXd::Zero(n));
}

class FixedActionPolicy : public Policy {
 public:
  explicit FixedActionPolicy(Eigen::VectorXd u) : u_(std::move(u)) {}
  Eigen::VectorXd action(const Eigen::VectorXd&, int) override { return u_; }

 private:
  Eigen::VectorXd u_;
};

TEST(PredictionWindow, ValidatesShapesAndBounds) {
  const auto w = zero_sequence(3, 2);
  auto short_wh = zero_sequence(2, 2);
  EXPECT_THROW(PredictionWindow(w, short_wh), BadInput);
  EXPECT_THROW(PredictionWindow({}, {}), BadInput);

  auto ragged = zero_sequence(3, 2);
  ragged[1] = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(PredictionWindow(w, ragged), BadInput);
  EXPECT_THROW(PredictionWindow(ragged, ragged), BadInput);

  auto big = zero_sequence(3, 2);
  big[2] = Eigen::VectorXd::Constant(2, 5.0);
  EXPECT_THROW(PredictionWindow(big, w, 1.0, {}), BadInput);
  EXPECT_THROW(PredictionWindow(w, big, {}, 1.0), BadInput);
  EXPECT_NO_THROW(PredictionWindow(big, big, 100.0, 100.0));
}

TEST(PredictionWindow, GuardsUnrevealedDisturbances) {
  auto w = zero_sequence(4, 1);
  for (int t = 0; t < 4; ++t) w[t] = Eigen::VectorXd::Constant(1, t + 1.0);
  PredictionWindow window(w, zero_sequence(4, 1));

  EXPECT_EQ(window.revealed_count(), 0);
  EXPECT_THROW(window.observed_disturbance(0), CausalityViolation);
  EXPECT_EQ(window.reveal_next()(0), 1.0);
  EXPECT_EQ(window.observed_disturbance(0)(0), 1.0);
  EXPECT_THROW(window.observed_disturbance(1), CausalityViolation);
  EXPECT_THROW(window.observed_disturbance(-1), BadInput);
  EXPECT_THROW(window.observed_disturbance(4), BadInput);

  window.reveal_next();
  window.reveal_next();
  window.reveal_next();
  EXPECT_EQ(window.revealed_count(), 4);
  EXPECT_THROW(window.reveal_next(), BadInput);
  EXPECT_EQ(window.observed_disturbance(3)(0), 4.0);
}

TEST(RolloutLinear, RestStaysAtRest) {
  const auto sys = make_scalar_system(0.9, 1.0, 1.0, 1.0);
  const auto sol = solve_dare(sys, 6);
  PredictionWindow window(zero_sequence(6, 1), zero_sequence(6, 1));
  ZeroConfidentPolicy policy(sol);
  const auto rollout =
      rollout_linear(sys, sol, policy, window, Eigen::VectorXd::Zero(1));

  EXPECT_EQ(rollout.total_cost, 0.0);
  EXPECT_EQ(rollout.terminal_cost, 0.0);
  ASSERT_EQ(rollout.states.size(), 7u);
  ASSERT_EQ(rollout.actions.size(), 6u);
  for (const auto& x : rollout.states) EXPECT_EQ(x(0), 0.0);
  for (const auto& u : rollout.actions) EXPECT_EQ(u(0), 0.0);
  EXPECT_FALSE(rollout.failed);
}

TEST(RolloutLinear, BookkeepingMatchesRecomputation) {
  std::mt19937_64 rng(4242);
  const int T = 15;
  const auto sys = random_system(rng, 3, 2);
  const auto sol = solve_dare(sys, T);
  const auto w = random_sequence(rng, T, 3);
  const auto wh = random_sequence(rng, T, 3);
  const auto x0 = random_vector(rng, 3);

  PredictionWindow window(w, wh);
  SelfTuningPolicy policy(sol, window.predictions());
  const auto rollout = rollout_linear(sys, sol, policy, window, x0);

  ASSERT_EQ(rollout.states.size(), static_cast<size_t>(T + 1));
  ASSERT_EQ(rollout.actions.size(), static_cast<size_t>(T));
  ASSERT_EQ(rollout.stage_costs.size(), static_cast<size_t>(T));
  ASSERT_EQ(rollout.lambdas.size(), static_cast<size_t>(T));
  EXPECT_EQ(rollout.lambdas[0], 0.3);
  EXPECT_EQ(rollout.lambdas[1], 0.3);
  ASSERT_TRUE(rollout.lambda_final.has_value());

  double total = 0.0;
  for (int t = 0; t < T; ++t) {
    const auto& x = rollout.states[t];
    const auto& u = rollout.actions[t];
    const double stage = x.dot(sys.Q * x) + u.dot(sys.R * u);
    EXPECT_NEAR(rollout.stage_costs[t], stage, 1e-12 * std::abs(stage));
    total += rollout.stage_costs[t];

    const Eigen::VectorXd residual =
        rollout.states[t + 1] - (sys.A * x + sys.B * u + w[t]);
    EXPECT_LE(residual.cwiseAbs().maxCoeff(), 1e-10) << "t=" << t;
  }
  const auto& xT = rollout.states[T];
  EXPECT_NEAR(rollout.terminal_cost, xT.dot(sol.P * xT),
              1e-12 * std::abs(rollout.terminal_cost));
  EXPECT_NEAR(rollout.total_cost, total + rollout.terminal_cost,
              1e-12 * std::abs(rollout.total_cost));

  // Bit-for-bit repeatability on a fresh window and policy.
  PredictionWindow again(w, wh);
  SelfTuningPolicy policy2(sol, again.predictions());
  const auto repeat = rollout_linear(sys, sol, policy2, again, x0);
  EXPECT_EQ(repeat.total_cost, rollout.total_cost);
  EXPECT_EQ(*repeat.lambda_final, *rollout.lambda_final);
  for (int t = 0; t <= T; ++t) {
    ExpectMatrixNear(repeat.states[t], rollout.states[t], 0.0);
  }
}

TEST(RolloutLinear, PerfectPredictionFollowerMatchesOfflineOptimal) {
  std::mt19937_64 rng(97531);
  const int T = 10;
  const auto sys = random_system(rng, 2, 1);
  const auto sol = solve_dare(sys, T);
  const auto w = random_sequence(rng, T, 2);
  const auto x0 = random_vector(rng, 2);

  const auto opt = offline_optimal_rollout(sol, sys, x0, w);

  PredictionWindow window(w, w);
  LambdaConfidentPolicy policy(sol, window.predictions(), 1.0);
  const auto alg = rollout_linear(sys, sol, policy, window, x0);
  EXPECT_EQ(alg.total_cost, opt.total_cost);
  for (int t = 0; t < T; ++t) {
    ExpectMatrixNear(alg.actions[t], opt.actions[t], 0.0);
  }
}

TEST(RolloutLinear, RejectsMismatchedInputs) {
  const auto sys = make_scalar_system(1.0, 1.0, 1.0, 1.0);
  const auto sol = solve_dare(sys, 5);
  ZeroConfidentPolicy policy(sol);

  PredictionWindow short_window(zero_sequence(4, 1), zero_sequence(4, 1));
  EXPECT_THROW(rollout_linear(sys, sol, policy, short_window,
                              Eigen::VectorXd::Zero(1)),
               BadInput);

  PredictionWindow window(zero_sequence(5, 1), zero_sequence(5, 1));
  EXPECT_THROW(
      rollout_linear(sys, sol, policy, window, Eigen::VectorXd::Zero(2)),
      BadInput);

  rollout_linear(sys, sol, policy, window, Eigen::VectorXd::Zero(1));
  EXPECT_THROW(
      rollout_linear(sys, sol, policy, window, Eigen::VectorXd::Zero(1)),
      BadInput);
}

class PeekingPolicy : public Policy {
 public:
  PeekingPolicy(const RiccatiSolution& ric, const PredictionWindow& window,
                int offset)
      : ric_(ric), window_(window), offset_(offset) {}
  Eigen::VectorXd action(const Eigen::VectorXd& x, int t) override {
    if (t + offset_ >= 0) {
      window_.observed_disturbance(t + offset_);
    }
    return zero_confident_action(ric_, x);
  }

 private:
  const RiccatiSolution& ric_;
  const PredictionWindow& window_;
  int offset_;
};

TEST(RolloutLinear, StopsPoliciesFromPeekingAhead) {
  const auto sys = make_scalar_system(0.5, 1.0, 1.0, 1.0);
  const auto sol = solve_dare(sys, 5);
  std::mt19937_64 rng(7);
  const auto w = random_sequence(rng, 5, 1);

  {
    PredictionWindow window(w, w);
    PeekingPolicy cheater(sol, window, 0);
    EXPECT_THROW(
        rollout_linear(sys, sol, cheater, window, Eigen::VectorXd::Ones(1)),
        CausalityViolation);
  }
  {
    PredictionWindow window(w, w);
    PeekingPolicy hindsight(sol, window, -1);
    EXPECT_NO_THROW(rollout_linear(sys, sol, hindsight, window,
                                   Eigen::VectorXd::Ones(1)));
    EXPECT_EQ(window.revealed_count(), 5);
  }
}

TEST(RolloutLinear, ReportsDivergenceStep) {
  const auto sys = make_scalar_system(1.0, 1.0, 1.0, 1.0);
  const auto sol = solve_dare(sys, 5);
  PredictionWindow window(zero_sequence(5, 1), zero_sequence(5, 1));
  FixedActionPolicy huge(Eigen::VectorXd::Constant(1, 1e308));
  try {
    rollout_linear(sys, sol, huge, window, Eigen::VectorXd::Zero(1));
    FAIL() << "expected Diverged";
  } catch (const Diverged& e) {
    EXPECT_EQ(e.step(), 2);
  }
}

SystemMatrices linearized_cartpole(const CartPoleParams& p) {
  const double total = p.cart_mass + p.pole_mass;
  const double eta = p.pole_length * (4.0 / 3.0 - p.pole_mass / total);
  Eigen::MatrixXd a_c = Eigen::MatrixXd::Zero(4, 4);
  a_c(0, 1) = 1.0;
  a_c(1, 2) = -p.pole_mass * p.pole_length * p.gravity / (eta * total);
  a_c(2, 3) = 1.0;
  a_c(3, 2) = p.gravity / eta;
  Eigen::MatrixXd b_c = Eigen::MatrixXd::Zero(4, 1);
  b_c(1, 0) = 1.0 / total + p.pole_mass * p.pole_length / (total * total * eta);
  b_c(3, 0) = -1.0 / (total * eta);

  SystemMatrices sys;
  sys.A = Eigen::MatrixXd::Identity(4, 4) + p.dt * a_c;
  sys.B = p.dt * b_c;
  sys.Q = Eigen::MatrixXd::Identity(4, 4);
  sys.R = Eigen::MatrixXd::Constant(1, 1, 1e-3);
  return sys;
}

TEST(CartPole, ParamsValidation) {
  CartPoleParams ok;
  EXPECT_NO_THROW(ok.validate());

  CartPoleParams p = ok;
  p.dt = 0.0;
  EXPECT_THROW(p.validate(), BadInput);
  p = ok;
  p.dt = 0.5;
  EXPECT_THROW(p.validate(), BadInput);
  p = ok;
  p.pole_mass = -1.0;
  EXPECT_THROW(p.validate(), BadInput);
  p = ok;
  p.fail_angle = 0.0;
  EXPECT_THROW(p.validate(), BadInput);
}

TEST(CartPole, UprightRestStaysPut) {
  CartPoleParams params;
  const auto sys = linearized_cartpole(params);
  const int T = 10;
  const auto sol = solve_dare(sys, T);

  PredictionWindow window(zero_sequence(T, 4), zero_sequence(T, 4));
  ZeroConfidentPolicy policy(sol);
  const auto rollout = rollout_cartpole(params, sys, sol, policy, window,
                                        Eigen::VectorXd::Zero(4));
  EXPECT_FALSE(rollout.failed);
  EXPECT_EQ(rollout.total_cost, 0.0);
  for (const auto& x : rollout.states) {
    EXPECT_EQ(x.cwiseAbs().maxCoeff(), 0.0);
  }
}

Eigen::VectorXd one_nonlinear_step(const CartPoleParams& params,
                                   const SystemMatrices& sys,
                                   const RiccatiSolution& sol,
                                   const Eigen::VectorXd& x0, double force) {
  PredictionWindow window(zero_sequence(1, 4), zero_sequence(1, 4));
  FixedActionPolicy policy(Eigen::VectorXd::Constant(1, force));
  const auto rollout =
      rollout_cartpole(params, sys, sol, policy, window, x0);
  return rollout.states.at(1);
}

// At the upright equilibrium the force enters the dynamics linearly, so a
// pure-force step must match the linearized model to rounding error.
TEST(CartPole, ForceResponseAtUprightMatchesLinearModel) {
  CartPoleParams params;
  const auto sys = linearized_cartpole(params);
  const auto sol = solve_dare(sys, 1);

  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(4);
  const Eigen::VectorXd nonlinear = one_nonlinear_step(params, sys, sol, x0, 0.5);
  const Eigen::VectorXd linear = sys.A * x0 + sys.B * Eigen::VectorXd::Constant(1, 0.5);
  ExpectMatrixNear(nonlinear, linear, 1e-15);
}

// A tilted free step differs from the linear model only at third order in
// the tilt: halving the angle should shrink the gap about eightfold.
TEST(CartPole, LinearizationErrorIsHigherOrderInTilt) {
  CartPoleParams params;
  const auto sys = linearized_cartpole(params);
  const auto sol = solve_dare(sys, 1);

  auto gap = [&](double theta) {
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(4);
    x0(2) = theta;
    const Eigen::VectorXd nonlinear =
        one_nonlinear_step(params, sys, sol, x0, 0.0);
    const Eigen::VectorXd linear = sys.A * x0;
    return (nonlinear - linear).cwiseAbs().maxCoeff();
  };

  const double coarse = gap(0.01);
  const double fine = gap(0.005);
  EXPECT_LT(coarse, 1e-7);
  EXPECT_GT(fine, 0.0);
  EXPECT_NEAR(coarse / fine, 8.0, 1.0);
}

TEST(CartPole, FailureStopsEpisodeAndChargesPenalty) {
  CartPoleParams params;
  const auto sys = linearized_cartpole(params);
  const int T = 50;
  const auto sol = solve_dare(sys, T);
  const double penalty = 123.5;

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(4);
  x0(2) = 0.15;
  x0(3) = 1.0;

  PredictionWindow window(zero_sequence(T, 4), zero_sequence(T, 4));
  FixedActionPolicy idle(Eigen::VectorXd::Zero(1));
  const auto rollout =
      rollout_cartpole(params, sys, sol, idle, window, x0, penalty);

  ASSERT_TRUE(rollout.failed);
  ASSERT_TRUE(rollout.fail_step.has_value());
  EXPECT_GT(*rollout.fail_step, 0);
  EXPECT_LT(*rollout.fail_step, 10);
  EXPECT_EQ(rollout.actions.size(), static_cast<size_t>(*rollout.fail_step));
  EXPECT_EQ(rollout.states.size(), rollout.actions.size() + 1);
  EXPECT_GT(std::abs(rollout.states.back()(2)), params.fail_angle);
  EXPECT_EQ(rollout.terminal_cost, penalty);

  double stages = 0.0;
  for (double c : rollout.stage_costs) stages += c;
  EXPECT_NEAR(rollout.total_cost, stages + penalty,
              1e-12 * rollout.total_cost);
}

TEST(CartPole, AlreadyFallenStartFailsImmediately) {
  CartPoleParams params;
  const auto sys = linearized_cartpole(params);
  const auto sol = solve_dare(sys, 5);

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(4);
  x0(2) = 0.5;
  PredictionWindow window(zero_sequence(5, 4), zero_sequence(5, 4));
  ZeroConfidentPolicy policy(sol);
  const auto rollout =
      rollout_cartpole(params, sys, sol, policy, window, x0, 77.0);
  EXPECT_TRUE(rollout.failed);
  EXPECT_EQ(*rollout.fail_step, 0);
  EXPECT_TRUE(rollout.actions.empty());
  EXPECT_EQ(rollout.total_cost, 77.0);
}

// The linear feedback that the rollouts use should actually balance the
// nonlinear pole from a small tilt, and the constant head wind from a
// persistent disturbance should be survivable too.
TEST(CartPole, FeedbackBalancesSmallTiltOnNonlinearPlant) {
  CartPoleParams params;
  const auto sys = linearized_cartpole(params);
  const int T = 200;
  const auto sol = solve_dare(sys, T);

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(4);
  x0(2) = 0.05;
  PredictionWindow window(zero_sequence(T, 4), zero_sequence(T, 4));
  ZeroConfidentPolicy policy(sol);
  const auto rollout =
      rollout_cartpole(params, sys, sol, policy, window, x0);
  EXPECT_FALSE(rollout.failed);
  EXPECT_LT(std::abs(rollout.states.back()(2)), 0.05);
}

}  // namespace
}  // namespace lqc
