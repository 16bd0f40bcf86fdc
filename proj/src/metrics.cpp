#include "lqc/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace lqc {
namespace {

// sum_t || s_t ||^2 with s_t = P e_t + F' s_{t+1}, s_T = 0.
double weighted_suffix_energy(const RiccatiSolution& ric,
                              const std::vector<Eigen::VectorXd>& e) {
  const int n = ric.state_dim();
  const Eigen::MatrixXd Ft = ric.F.transpose();
  Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
  double total = 0.0;
  for (int t = static_cast<int>(e.size()) - 1; t >= 0; --t) {
    if (e[t].size() != n) {
      throw BadInput("disturbance dimension does not match the system");
    }
    s = ric.P * e[t] + Ft * s;
    total += s.squaredNorm();
  }
  return total;
}

}  // namespace

double prediction_error(const RiccatiSolution& ric,
                        const std::vector<Eigen::VectorXd>& w,
                        const std::vector<Eigen::VectorXd>& w_hat) {
  if (w.size() != w_hat.size()) {
    throw BadInput("w and w_hat must have the same length");
  }
  std::vector<Eigen::VectorXd> e(w.size());
  for (size_t t = 0; t < w.size(); ++t) e[t] = w[t] - w_hat[t];
  return weighted_suffix_energy(ric, e);
}

double w_bar(const RiccatiSolution& ric,
             const std::vector<Eigen::VectorXd>& w_hat) {
  return weighted_suffix_energy(ric, w_hat);
}

double self_variation(const std::vector<Eigen::VectorXd>& seq) {
  const int T = static_cast<int>(seq.size());
  if (T < 2) return 0.0;
  double total = 0.0;
  for (int s = 1; s <= T - 1; ++s) {
    double worst = 0.0;
    for (int tau = 0; tau <= s - 1; ++tau) {
      worst = std::max(worst, (seq[tau] - seq[tau + T - s]).norm());
    }
    total += worst;
  }
  return total;
}

double gap_identity(const RiccatiSolution& ric,
                    const std::vector<Eigen::VectorXd>& psi) {
  double total = 0.0;
  for (const auto& p : psi) {
    if (p.size() != ric.state_dim()) {
      throw BadInput("psi dimension does not match the system");
    }
    total += p.dot(ric.H * p);
  }
  return total;
}

double regret(double alg_cost_adaptive, double alg_cost_best_fixed) {
  return alg_cost_adaptive - alg_cost_best_fixed;
}

double cr_upper_bound(const RiccatiSolution& ric, double lambda,
                      double epsilon, double wbar, double opt, double C) {
  if (!(opt > 0.0)) {
    throw BadInput("opt must be positive");
  }
  if (!(C > 0.0)) {
    throw BadInput("C must be positive");
  }
  const double h_norm = operator_norm(ric.H);
  const double trust_branch =
      lambda * lambda * epsilon / opt + (1.0 - lambda) * (1.0 - lambda) / C;
  const double robust_branch = 1.0 / C + lambda * lambda * wbar / opt;
  return 1.0 + 2.0 * h_norm * std::min(trust_branch, robust_branch);
}

}  // namespace lqc
