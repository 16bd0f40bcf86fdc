#pragma once

#include <Eigen/Dense>
#include <vector>

#include "lqc/errors.hpp"

namespace lqc {

// Time-invariant linear system x_{t+1} = A x_t + B u_t + w_t with quadratic
// stage cost x'Qx + u'Ru. A is n x n, B is n x m, Q is n x n PSD, R is m x m
// PD. Symmetry of Q and R is required to 1e-10 in absolute value.
struct SystemMatrices {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }

  // Throws BadInput on dimension mismatch, asymmetry, or indefiniteness.
  // Q must be positive definite when require_q_positive_definite is set and
  // positive semidefinite otherwise; R must always be positive definite.
  void validate(bool require_q_positive_definite = true) const;
};

// Stabilizing solution of the discrete algebraic Riccati equation
//
//   P = Q + A'PA - A'PB (R + B'PB)^{-1} B'PA
//
// together with the quantities every controller in this library consumes:
//
//   K    = (R + B'PB)^{-1} B'PA        (state-feedback gain)
//   F    = A - BK                      (closed loop, spectral radius < 1)
//   H    = B (R + B'PB)^{-1} B'
//   Minv = (R + B'PB)^{-1}
//
// ft_powers_P caches (F')^k P for k = 0..horizon-1, built by the exact
// recursion ft_powers_P[k+1] = F' * ft_powers_P[k].
struct RiccatiSolution {
  Eigen::MatrixXd P;
  Eigen::MatrixXd K;
  Eigen::MatrixXd F;
  Eigen::MatrixXd H;
  Eigen::MatrixXd Minv;
  Eigen::MatrixXd B;  // copied from the system; the feedforward term needs it
  std::vector<Eigen::MatrixXd> ft_powers_P;
  double rho = 0.0;  // spectral radius of F

  int state_dim() const { return static_cast<int>(P.rows()); }
  int horizon() const { return static_cast<int>(ft_powers_P.size()); }
};

// Solves the DARE by fixed-point iteration of the Riccati difference
// equation starting from P_0 = Q:
//
//   P_{k+1} = Q + A'P_k A - A'P_k B (R + B'P_k B)^{-1} B'P_k A
//
// Convergence is declared when successive iterates differ by at most `tol`
// in Frobenius norm. Throws BadInput for malformed systems, NonConvergence
// if max_iter is exhausted, and NotStabilizable if the iteration converges
// but the closed loop A - BK has spectral radius >= 1.
RiccatiSolution solve_dare(const SystemMatrices& sys, int horizon,
                           double tol = 1e-12, int max_iter = 100000);

// Largest eigenvalue modulus. Throws NumericalError if the eigensolver
// fails, BadInput if M is not square.
double spectral_radius(const Eigen::MatrixXd& M);

// Operator norm induced by the Euclidean norm (largest singular value).
double operator_norm(const Eigen::MatrixXd& M);

// Frobenius norm of P - (Q + A'PA - A'PB (R + B'PB)^{-1} B'PA).
double dare_residual(const SystemMatrices& sys, const Eigen::MatrixXd& P);

}  // namespace lqc
