#include "lqc/riccati.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace lqc {
namespace {

constexpr double kSymmetryTol = 1e-10;

bool is_symmetric(const Eigen::MatrixXd& M) {
  return (M - M.transpose()).cwiseAbs().maxCoeff() <= kSymmetryTol;
}

// Definiteness via eigenvalues of the symmetrized matrix. LLT would be
// faster but gives no usable margin for the semidefinite case.
double min_eigenvalue(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigenvalue computation failed");
  }
  return es.eigenvalues().minCoeff();
}

}  // namespace

void SystemMatrices::validate(bool require_q_positive_definite) const {
  const auto n = A.rows();
  const auto m = B.cols();
  if (n == 0 || A.cols() != n) {
    throw BadInput("A must be square and non-empty");
  }
  if (B.rows() != n || m == 0) {
    throw BadInput("B must have as many rows as A and at least one column");
  }
  if (Q.rows() != n || Q.cols() != n) {
    throw BadInput("Q must match the state dimension");
  }
  if (R.rows() != m || R.cols() != m) {
    throw BadInput("R must match the input dimension");
  }
  if (!is_symmetric(Q)) {
    throw BadInput("Q must be symmetric");
  }
  if (!is_symmetric(R)) {
    throw BadInput("R must be symmetric");
  }
  if (require_q_positive_definite) {
    if (min_eigenvalue(Q) <= 0.0) {
      throw BadInput("Q must be positive definite");
    }
  } else if (min_eigenvalue(Q) < -kSymmetryTol) {
    throw BadInput("Q must be positive semidefinite");
  }
  if (min_eigenvalue(R) <= 0.0) {
    throw BadInput("R must be positive definite");
  }
}

double spectral_radius(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols() || M.rows() == 0) {
    throw BadInput("spectral radius requires a non-empty square matrix");
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigenvalue computation failed");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double operator_norm(const Eigen::MatrixXd& M) {
  if (M.size() == 0) {
    throw BadInput("operator norm of an empty matrix");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues()(0);
}

double dare_residual(const SystemMatrices& sys, const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd BtPB = sys.B.transpose() * P * sys.B;
  const Eigen::MatrixXd gain =
      (sys.R + BtPB).ldlt().solve(sys.B.transpose() * P * sys.A);
  const Eigen::MatrixXd next =
      sys.Q + sys.A.transpose() * P * sys.A -
      sys.A.transpose() * P * sys.B * gain;
  return (P - next).norm();
}

RiccatiSolution solve_dare(const SystemMatrices& sys, int horizon, double tol,
                           int max_iter) {
  sys.validate(/*require_q_positive_definite=*/false);
  if (horizon < 0) {
    throw BadInput("horizon must be non-negative");
  }
  if (!(tol > 0.0) || max_iter < 1) {
    throw BadInput("tol must be positive and max_iter at least 1");
  }

  const Eigen::MatrixXd At = sys.A.transpose();
  const Eigen::MatrixXd Bt = sys.B.transpose();

  Eigen::MatrixXd P = sys.Q;
  bool converged = false;
  for (int k = 0; k < max_iter; ++k) {
    const Eigen::MatrixXd PA = P * sys.A;
    const Eigen::MatrixXd PB = P * sys.B;
    const Eigen::MatrixXd M = sys.R + Bt * PB;
    Eigen::MatrixXd next = sys.Q + At * PA - At * PB * M.ldlt().solve(Bt * PA);
    // The update preserves symmetry in exact arithmetic; re-symmetrize to
    // stop rounding drift from accumulating over thousands of iterations.
    next = 0.5 * (next + next.transpose()).eval();
    const double diff = (next - P).norm();
    P = next;
    if (!P.allFinite()) {
      throw NonConvergence("Riccati iteration diverged after " +
                           std::to_string(k + 1) + " iterations");
    }
    if (diff <= tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NonConvergence("Riccati iteration did not meet tol within " +
                         std::to_string(max_iter) + " iterations");
  }

  RiccatiSolution sol;
  sol.P = P;
  const Eigen::MatrixXd M = sys.R + Bt * P * sys.B;
  const auto M_ldlt = M.ldlt();
  sol.Minv = M_ldlt.solve(Eigen::MatrixXd::Identity(M.rows(), M.cols()));
  sol.K = M_ldlt.solve(Bt * P * sys.A);
  sol.F = sys.A - sys.B * sol.K;
  sol.H = sys.B * sol.Minv * Bt;
  sol.B = sys.B;
  sol.rho = spectral_radius(sol.F);
  if (sol.rho >= 1.0) {
    throw NotStabilizable("closed loop has spectral radius " +
                          std::to_string(sol.rho));
  }

  sol.ft_powers_P.reserve(horizon);
  if (horizon > 0) {
    const Eigen::MatrixXd Ft = sol.F.transpose();
    sol.ft_powers_P.push_back(P);
    for (int k = 1; k < horizon; ++k) {
      sol.ft_powers_P.push_back(Ft * sol.ft_powers_P.back());
    }
  }
  return sol;
}

}  // namespace lqc
