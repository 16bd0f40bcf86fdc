#pragma once

#include <Eigen/Dense>
#include <vector>

#include "lqc/riccati.hpp"

namespace lqc {

// Scalar summary of one (instance, controller) evaluation.
struct InstanceMetrics {
  double epsilon = 0.0;    // aggregate prediction error
  double w_bar = 0.0;      // same kernel applied to the predictions alone
  double mu_var_w = 0.0;   // self-variation of the true disturbances
  double mu_var_wh = 0.0;  // self-variation of the predictions
  double opt_cost = 0.0;
  double alg_cost = 0.0;
  double cr = 0.0;  // alg_cost / opt_cost
};

// Aggregate prediction error
//
//   sum_t || sum_{tau=t}^{T-1} (F')^{tau-t} P (w_tau - wh_tau) ||^2
//
// evaluated with the suffix recursion s_t = P e_t + F' s_{t+1}, so the whole
// sum costs O(T n^2). Throws BadInput on length or dimension mismatch.
double prediction_error(const RiccatiSolution& ric,
                        const std::vector<Eigen::VectorXd>& w,
                        const std::vector<Eigen::VectorXd>& w_hat);

// Same weighted suffix energy applied to the predictions themselves; the
// robustness side of the cost bound is stated in terms of this quantity.
double w_bar(const RiccatiSolution& ric,
             const std::vector<Eigen::VectorXd>& w_hat);

// Self-variation of a sequence:
//
//   sum_{s=1}^{T-1} max_{tau=0..s-1} || y_tau - y_{tau+T-s} ||
//
// Zero for constant sequences; returns 0 for T < 2 by convention.
double self_variation(const std::vector<Eigen::VectorXd>& seq);

// Cost gap sum_t psi_t' H psi_t. For any controller of the form
// u_t = -Minv B' (P A x_t + prediction_term - psi_t) this equals
// ALG - OPT exactly, which makes it the main cross-check oracle for the
// rollout machinery.
double gap_identity(const RiccatiSolution& ric,
                    const std::vector<Eigen::VectorXd>& psi);

// ALG of an adaptive policy minus ALG of the best fixed trust parameter.
// Nonnegative up to round-off when the comparator is the true minimizer.
double regret(double alg_cost_adaptive, double alg_cost_best_fixed);

// Worst-case competitive-ratio bound for a fixed trust parameter:
//
//   1 + 2||H|| min{ lambda^2 eps / opt + (1-lambda)^2 / C,
//                   1 / C + lambda^2 wbar / opt }
//
// C is an existence constant supplied by configuration; the bound is used
// for shape checks and plotting, never as a pass/fail quantity. Throws
// BadInput if opt <= 0 or C <= 0.
double cr_upper_bound(const RiccatiSolution& ric, double lambda,
                      double epsilon, double wbar, double opt, double C = 1.0);

}  // namespace lqc
