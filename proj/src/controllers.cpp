#include "lqc/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lqc {
namespace {

void check_state_dim(const RiccatiSolution& ric, const Eigen::VectorXd& x) {
  if (x.size() != ric.state_dim()) {
    throw BadInput("state dimension does not match the system");
  }
}

void check_step(const RiccatiSolution& ric,
                const std::vector<Eigen::VectorXd>& seq, int t) {
  const int T = static_cast<int>(seq.size());
  if (t < 0 || t >= T) {
    throw BadInput("step index " + std::to_string(t) +
                   " outside horizon of length " + std::to_string(T));
  }
  if (ric.horizon() < T) {
    throw BadInput("power cache shorter than the sequence horizon");
  }
}

}  // namespace

Eigen::VectorXd prediction_suffix(const RiccatiSolution& ric,
                                  const std::vector<Eigen::VectorXd>& seq,
                                  int t) {
  check_step(ric, seq, t);
  const int n = ric.state_dim();
  Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
  for (int tau = t; tau < static_cast<int>(seq.size()); ++tau) {
    if (seq[tau].size() != n) {
      throw BadInput("disturbance dimension does not match the system");
    }
    s += ric.ft_powers_P[tau - t] * seq[tau];
  }
  return s;
}

Eigen::VectorXd zero_confident_action(const RiccatiSolution& ric,
                                      const Eigen::VectorXd& x) {
  check_state_dim(ric, x);
  return -(ric.K * x);
}

Eigen::VectorXd one_confident_action(
    const RiccatiSolution& ric, const Eigen::VectorXd& x, int t,
    const std::vector<Eigen::VectorXd>& w_hat) {
  return lambda_confident_action(ric, x, t, w_hat, 1.0);
}

Eigen::VectorXd lambda_confident_action(
    const RiccatiSolution& ric, const Eigen::VectorXd& x, int t,
    const std::vector<Eigen::VectorXd>& w_hat, double lambda) {
  check_state_dim(ric, x);
  if (!std::isfinite(lambda)) {
    throw BadInput("lambda must be finite");
  }
  const Eigen::VectorXd s = prediction_suffix(ric, w_hat, t);
  return -(ric.K * x + lambda * (ric.Minv * (ric.B.transpose() * s)));
}

Eigen::VectorXd threshold_step(ThresholdState& state,
                               const RiccatiSolution& ric,
                               const Eigen::VectorXd& x, int t,
                               const std::vector<Eigen::VectorXd>& w_hat,
                               double last_error_norm) {
  if (!(state.sigma > 0.0)) {
    throw BadInput("threshold sigma must be positive");
  }
  if (last_error_norm < 0.0) {
    throw BadInput("error norm cannot be negative");
  }
  state.delta += last_error_norm;
  if (state.delta >= state.sigma) {
    state.tripped = true;
  }
  return state.tripped ? zero_confident_action(ric, x)
                       : one_confident_action(ric, x, t, w_hat);
}

namespace {

// Advance every eta by the newly revealed pair (w_new, w_hat[idx]) so the
// stored vectors cover start indices 0..idx, then refresh the H-weighted
// sums. Work is O(idx * n^2) with the cached powers.
void advance_eta(SelfTuningState& state, const RiccatiSolution& ric,
                 const std::vector<Eigen::VectorXd>& w_hat, int idx,
                 const Eigen::VectorXd& w_new) {
  if (w_new.size() != ric.state_dim()) {
    throw BadInput("observed disturbance dimension does not match");
  }
  if (idx >= static_cast<int>(w_hat.size()) || ric.horizon() < idx + 1) {
    throw BadInput("eta update past the cached horizon");
  }
  const Eigen::VectorXd& wh_new = w_hat[idx];
  for (int s = 0; s < idx; ++s) {
    const Eigen::MatrixXd& power = ric.ft_powers_P[idx - s];
    state.eta_w[s] += power * w_new;
    state.eta_wh[s] += power * wh_new;
  }
  state.eta_w.push_back(ric.ft_powers_P[0] * w_new);
  state.eta_wh.push_back(ric.ft_powers_P[0] * wh_new);

  double num = 0.0;
  double den = 0.0;
  for (size_t s = 0; s < state.eta_wh.size(); ++s) {
    const Eigen::VectorXd h_wh = ric.H * state.eta_wh[s];
    num += state.eta_w[s].dot(h_wh);
    den += state.eta_wh[s].dot(h_wh);
  }
  state.numerator = num;
  state.denominator = den;
}

double current_trust(const SelfTuningState& state, int t,
                     const SelfTuningConfig& cfg) {
  double lambda;
  if (t < 2) {
    lambda = cfg.lambda0;
  } else if (state.denominator > 0.0) {
    lambda = state.numerator / state.denominator;
  } else {
    lambda = 1.0;
  }
  if (cfg.clamp) {
    lambda = std::clamp(lambda, 0.0, 1.0);
  }
  return lambda;
}

}  // namespace

SelfTuningDecision self_tuning_step(SelfTuningState& state,
                                    const RiccatiSolution& ric,
                                    const Eigen::VectorXd& x, int t,
                                    const std::vector<Eigen::VectorXd>& w_hat,
                                    const Eigen::VectorXd* w_observed_prev,
                                    const SelfTuningConfig& cfg) {
  if (t != state.t) {
    throw BadInput("self-tuning steps must be taken in order");
  }
  if (t >= 1) {
    if (w_observed_prev == nullptr) {
      throw BadInput("step " + std::to_string(t) +
                     " requires the previous disturbance");
    }
    advance_eta(state, ric, w_hat, t - 1, *w_observed_prev);
  }

  SelfTuningDecision decision;
  decision.lambda = current_trust(state, t, cfg);
  decision.action = lambda_confident_action(ric, x, t, w_hat, decision.lambda);
  state.lambda_t = decision.lambda;
  state.t = t + 1;
  return decision;
}

double self_tuning_final_lambda(SelfTuningState& state,
                                const RiccatiSolution& ric,
                                const std::vector<Eigen::VectorXd>& w_hat,
                                const Eigen::VectorXd& w_last,
                                const SelfTuningConfig& cfg) {
  const int T = static_cast<int>(w_hat.size());
  if (state.t != T) {
    throw BadInput("final trust parameter requires a completed horizon");
  }
  advance_eta(state, ric, w_hat, T - 1, w_last);
  state.t = T + 1;
  const double lambda = current_trust(state, T, cfg);
  state.lambda_t = lambda;
  return lambda;
}

}  // namespace lqc
