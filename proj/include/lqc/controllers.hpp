#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "lqc/riccati.hpp"

namespace lqc {

// Weighted suffix sum of a disturbance or prediction sequence,
//
//   S_t = sum_{tau=t}^{T-1} (F')^{tau-t} P seq[tau],
//
// evaluated forward through the cached powers. Every feedforward term in
// this module routes through here, so controllers that should agree on a
// step agree bitwise. Requires ric.horizon() >= seq length.
Eigen::VectorXd prediction_suffix(const RiccatiSolution& ric,
                                  const std::vector<Eigen::VectorXd>& seq,
                                  int t);

// u = -Kx: the prediction-free policy.
Eigen::VectorXd zero_confident_action(const RiccatiSolution& ric,
                                      const Eigen::VectorXd& x);

// u = -Minv B' (P A x + S_t): follows the predictions completely.
Eigen::VectorXd one_confident_action(const RiccatiSolution& ric,
                                     const Eigen::VectorXd& x, int t,
                                     const std::vector<Eigen::VectorXd>& w_hat);

// u = -Minv B' (P A x + lambda S_t). Affine in lambda; lambda may be any
// finite real, with [0, 1] the theoretically motivated range.
Eigen::VectorXd lambda_confident_action(
    const RiccatiSolution& ric, const Eigen::VectorXd& x, int t,
    const std::vector<Eigen::VectorXd>& w_hat, double lambda);

// Trust-or-fallback switch: run the prediction-following policy until the
// accumulated prediction-error norm reaches sigma, then fall back to the
// prediction-free one for good.
struct ThresholdState {
  double delta = 0.0;  // sum of ||w_hat_tau - w_tau|| over revealed steps
  double sigma = 1e-9;
  bool tripped = false;
};

// One decision step. last_error_norm must be ||w_hat_{t-1} - w_{t-1}||
// (0 at t = 0); it is folded into delta before the threshold comparison,
// so the freshest revealed error can trip the switch for the current step.
Eigen::VectorXd threshold_step(ThresholdState& state,
                               const RiccatiSolution& ric,
                               const Eigen::VectorXd& x, int t,
                               const std::vector<Eigen::VectorXd>& w_hat,
                               double last_error_norm);

// Running state of the self-tuning policy. For each start index s it keeps
//
//   eta(seq; s, t-1) = sum_{tau=s}^{t-1} (F')^{tau-s} P seq[tau]
//
// for both the revealed disturbances and the predictions, extended by one
// term per revealed step. numerator and denominator are the H-weighted
// cross and self products of those vectors, and their ratio is the trust
// parameter estimate.
struct SelfTuningState {
  int t = 0;  // index of the next step to act at
  double lambda_t = 0.0;
  std::vector<Eigen::VectorXd> eta_w;
  std::vector<Eigen::VectorXd> eta_wh;
  double numerator = 0.0;
  double denominator = 0.0;
};

struct SelfTuningConfig {
  double lambda0 = 0.3;  // used verbatim at t = 0 and t = 1
  bool clamp = false;    // clamp lambda_t into [0, 1]
};

struct SelfTuningDecision {
  double lambda = 0.0;
  Eigen::VectorXd action;
};

// One decision step at time t. For t >= 1, w_observed_prev must point to
// the newly revealed w_{t-1} (BadInput otherwise); the eta recursion is
// advanced before the trust parameter is computed. Steps must be taken in
// order. Per-step work is O(t n^2) via the cached powers.
SelfTuningDecision self_tuning_step(SelfTuningState& state,
                                    const RiccatiSolution& ric,
                                    const Eigen::VectorXd& x, int t,
                                    const std::vector<Eigen::VectorXd>& w_hat,
                                    const Eigen::VectorXd* w_observed_prev,
                                    const SelfTuningConfig& cfg = {});

// Folds the final disturbance w_{T-1} into the state and returns the
// end-of-horizon trust parameter: the exact minimizer of the fixed-lambda
// rollout cost on this instance. Requires state.t == T.
double self_tuning_final_lambda(SelfTuningState& state,
                                const RiccatiSolution& ric,
                                const std::vector<Eigen::VectorXd>& w_hat,
                                const Eigen::VectorXd& w_last,
                                const SelfTuningConfig& cfg = {});

// Rollout-facing controller interface. The harness reveals w_{t-1} through
// observe() before requesting the step-t action, never anything later.
class Policy {
 public:
  virtual ~Policy() = default;

  // Called once per step t >= 1 with the newly revealed w_{t-1}.
  virtual void observe(int /*t*/, const Eigen::VectorXd& /*w_prev*/) {}

  virtual Eigen::VectorXd action(const Eigen::VectorXd& x, int t) = 0;

  // Trust parameter used at the most recent action, for adaptive policies.
  virtual std::optional<double> current_lambda() const { return {}; }

  // Called once after the final step with w_{T-1}.
  virtual void finish(const Eigen::VectorXd& /*w_last*/) {}

  // End-of-horizon trust parameter, available after finish().
  virtual std::optional<double> final_lambda() const { return {}; }
};

class ZeroConfidentPolicy : public Policy {
 public:
  explicit ZeroConfidentPolicy(const RiccatiSolution& ric) : ric_(ric) {}
  Eigen::VectorXd action(const Eigen::VectorXd& x, int /*t*/) override {
    return zero_confident_action(ric_, x);
  }

 private:
  const RiccatiSolution& ric_;
};

// Fixed trust parameter. With lambda = 1 and w_hat = the true disturbances
// this is the offline-optimal policy.
class LambdaConfidentPolicy : public Policy {
 public:
  LambdaConfidentPolicy(const RiccatiSolution& ric,
                        const std::vector<Eigen::VectorXd>& w_hat,
                        double lambda)
      : ric_(ric), w_hat_(w_hat), lambda_(lambda) {}
  Eigen::VectorXd action(const Eigen::VectorXd& x, int t) override {
    return lambda_confident_action(ric_, x, t, w_hat_, lambda_);
  }

 private:
  const RiccatiSolution& ric_;
  const std::vector<Eigen::VectorXd>& w_hat_;
  double lambda_;
};

class ThresholdPolicy : public Policy {
 public:
  ThresholdPolicy(const RiccatiSolution& ric,
                  const std::vector<Eigen::VectorXd>& w_hat, double sigma)
      : ric_(ric), w_hat_(w_hat) {
    state_.sigma = sigma;
  }
  void observe(int t, const Eigen::VectorXd& w_prev) override {
    pending_error_norm_ = (w_hat_.at(t - 1) - w_prev).norm();
  }
  Eigen::VectorXd action(const Eigen::VectorXd& x, int t) override {
    const Eigen::VectorXd u =
        threshold_step(state_, ric_, x, t, w_hat_, pending_error_norm_);
    pending_error_norm_ = 0.0;
    return u;
  }
  const ThresholdState& state() const { return state_; }

 private:
  const RiccatiSolution& ric_;
  const std::vector<Eigen::VectorXd>& w_hat_;
  ThresholdState state_;
  double pending_error_norm_ = 0.0;
};

class SelfTuningPolicy : public Policy {
 public:
  SelfTuningPolicy(const RiccatiSolution& ric,
                   const std::vector<Eigen::VectorXd>& w_hat,
                   const SelfTuningConfig& cfg = {})
      : ric_(ric), w_hat_(w_hat), cfg_(cfg) {}
  void observe(int /*t*/, const Eigen::VectorXd& w_prev) override {
    pending_w_prev_ = w_prev;
  }
  Eigen::VectorXd action(const Eigen::VectorXd& x, int t) override {
    const Eigen::VectorXd* prev =
        pending_w_prev_ ? &*pending_w_prev_ : nullptr;
    auto decision = self_tuning_step(state_, ric_, x, t, w_hat_, prev, cfg_);
    pending_w_prev_.reset();
    return std::move(decision.action);
  }
  std::optional<double> current_lambda() const override {
    return state_.lambda_t;
  }
  void finish(const Eigen::VectorXd& w_last) override {
    final_lambda_ =
        self_tuning_final_lambda(state_, ric_, w_hat_, w_last, cfg_);
  }
  std::optional<double> final_lambda() const override {
    return final_lambda_;
  }
  const SelfTuningState& state() const { return state_; }

 private:
  const RiccatiSolution& ric_;
  const std::vector<Eigen::VectorXd>& w_hat_;
  SelfTuningConfig cfg_;
  SelfTuningState state_;
  std::optional<Eigen::VectorXd> pending_w_prev_;
  std::optional<double> final_lambda_;
};

}  // namespace lqc
