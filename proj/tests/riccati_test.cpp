#include "lqc/riccati.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "test_support.hpp"

namespace lqc {
namespace {

using ::lqc::testing::ExpectMatrixNear;
using ::lqc::testing::make_scalar_system;
using ::lqc::testing::random_system;

// A = B = Q = R = 1 has the closed form P = (1 + sqrt(5)) / 2: the DARE
// reduces to P^2 - P - 1 = 0.
TEST(SolveDare, GoldenRatioScalar) {
  const auto sys = make_scalar_system(1.0, 1.0, 1.0, 1.0);
  const auto sol = solve_dare(sys, 4);

  const double p = 0.5 * (1.0 + std::sqrt(5.0));
  EXPECT_NEAR(sol.P(0, 0), p, 1e-10);
  EXPECT_NEAR(sol.K(0, 0), p / (1.0 + p), 1e-10);
  EXPECT_NEAR(sol.F(0, 0), 1.0 - p / (1.0 + p), 1e-10);
  EXPECT_NEAR(sol.Minv(0, 0), 1.0 / (1.0 + p), 1e-10);
  EXPECT_NEAR(sol.H(0, 0), 1.0 / (1.0 + p), 1e-10);
  EXPECT_NEAR(sol.rho, sol.F(0, 0), 1e-12);
  ASSERT_EQ(sol.ft_powers_P.size(), 4u);
  EXPECT_NEAR(sol.ft_powers_P[2](0, 0), sol.F(0, 0) * sol.F(0, 0) * p, 1e-10);
}

// With A = 0 the fixed point is reached in one step: P = Q, K = 0, F = 0.
TEST(SolveDare, ZeroDynamics) {
  SystemMatrices sys;
  sys.A = Eigen::MatrixXd::Zero(3, 3);
  sys.B = Eigen::MatrixXd::Random(3, 2);
  sys.Q = Eigen::Vector3d(1.0, 2.0, 3.0).asDiagonal();
  sys.R = Eigen::MatrixXd::Identity(2, 2);

  const auto sol = solve_dare(sys, 2);
  ExpectMatrixNear(sol.P, sys.Q, 0.0);
  ExpectMatrixNear(sol.K, Eigen::MatrixXd::Zero(2, 3), 0.0);
  EXPECT_EQ(sol.rho, 0.0);
}

TEST(SolveDare, RandomSystemsSolveTheEquation) {
  std::mt19937_64 rng(611953);
  std::uniform_int_distribution<int> n_dist(1, 4);
  std::uniform_int_distribution<int> m_dist(1, 2);
  for (int i = 0; i < 50; ++i) {
    const auto sys = random_system(rng, n_dist(rng), m_dist(rng));
    const auto sol = solve_dare(sys, 1);
    EXPECT_LE(dare_residual(sys, sol.P), 1e-9) << "instance " << i;
    EXPECT_LT(sol.rho, 1.0) << "instance " << i;
    EXPECT_LE((sol.P - sol.P.transpose()).norm(), 1e-9) << "instance " << i;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sol.P,
                                                      Eigen::EigenvaluesOnly);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0) << "instance " << i;
  }
}

// Position-only cost on a double integrator: Q is semidefinite but the
// costed coordinate is driven by the free one, so the stabilizing solution
// still exists and is strictly definite.
TEST(SolveDare, SemidefiniteStateCost) {
  SystemMatrices sys;
  sys.A = Eigen::MatrixXd{{1.0, 0.2}, {0.0, 1.0}};
  sys.B = Eigen::MatrixXd{{0.0}, {0.2}};
  sys.Q = Eigen::Vector2d(1.0, 0.0).asDiagonal();
  sys.R = Eigen::MatrixXd::Constant(1, 1, 0.01);

  const auto sol = solve_dare(sys, 1);
  EXPECT_LE(dare_residual(sys, sol.P), 1e-9);
  EXPECT_LT(sol.rho, 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sol.P,
                                                    Eigen::EigenvaluesOnly);
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(SolveDare, CachedPowersMatchDirectProducts) {
  std::mt19937_64 rng(74701);
  const auto sys = random_system(rng, 3, 2);
  const auto sol = solve_dare(sys, 21);
  ASSERT_EQ(sol.ft_powers_P.size(), 21u);

  Eigen::MatrixXd ft_k = Eigen::MatrixXd::Identity(3, 3);
  for (int k = 0; k <= 20; ++k) {
    ExpectMatrixNear(sol.ft_powers_P[k], ft_k * sol.P, 1e-10);
    ft_k = sol.F.transpose() * ft_k;
  }
}

TEST(SolveDare, HorizonZeroLeavesCacheEmpty) {
  const auto sol = solve_dare(make_scalar_system(1.0, 1.0, 1.0, 1.0), 0);
  EXPECT_TRUE(sol.ft_powers_P.empty());
}

// Gelfand's formula: ||F^k||^{1/k} approaches the spectral radius, so at
// k = 100 the two should agree loosely. Catches a wrong eigensolver call.
TEST(SpectralRadius, ConsistentWithGelfandFormula) {
  std::mt19937_64 rng(35118);
  for (int i = 0; i < 5; ++i) {
    const auto sys = random_system(rng, 3, 1);
    const auto sol = solve_dare(sys, 1);
    Eigen::MatrixXd Fk = Eigen::MatrixXd::Identity(3, 3);
    for (int k = 0; k < 100; ++k) Fk = sol.F * Fk;
    const double gelfand = std::pow(operator_norm(Fk), 1.0 / 100.0);
    EXPECT_NEAR(gelfand, sol.rho, 0.05) << "instance " << i;
  }
}

TEST(SpectralRadius, KnownValues) {
  EXPECT_NEAR(spectral_radius(Eigen::Vector2d(0.5, -0.25).asDiagonal()), 0.5,
              1e-12);
  // Scaled rotation: complex eigenvalue pair of modulus 0.9.
  Eigen::MatrixXd rot{{0.0, -0.9}, {0.9, 0.0}};
  EXPECT_NEAR(spectral_radius(rot), 0.9, 1e-12);
  EXPECT_THROW(spectral_radius(Eigen::MatrixXd::Zero(2, 3)), BadInput);
}

TEST(OperatorNorm, MatchesLargestSingularValue) {
  Eigen::MatrixXd M{{3.0, 0.0}, {0.0, -4.0}};
  EXPECT_NEAR(operator_norm(M), 4.0, 1e-12);
}

TEST(SolveDare, ReportsNonConvergenceForUncontrollableUnstableSystem) {
  SystemMatrices sys;
  sys.A = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  sys.B = Eigen::MatrixXd::Zero(2, 1);
  sys.Q = Eigen::MatrixXd::Identity(2, 2);
  sys.R = Eigen::MatrixXd::Identity(1, 1);
  EXPECT_THROW(solve_dare(sys, 1), NonConvergence);
}

TEST(SolveDare, ReportsNonConvergenceWhenIterationBudgetTooSmall) {
  EXPECT_THROW(solve_dare(make_scalar_system(1.0, 1.0, 1.0, 1.0), 1, 1e-12, 3),
               NonConvergence);
}

// An unstable mode that is both uncontrollable and invisible to Q: the
// iteration converges (the mode never enters the cost) but no stabilizing
// gain exists.
TEST(SolveDare, ReportsNotStabilizable) {
  SystemMatrices sys;
  sys.A = Eigen::Vector2d(2.0, 0.5).asDiagonal();
  sys.B = Eigen::MatrixXd{{0.0}, {1.0}};
  sys.Q = Eigen::Vector2d(0.0, 1.0).asDiagonal();
  sys.R = Eigen::MatrixXd::Identity(1, 1);
  EXPECT_THROW(solve_dare(sys, 1), NotStabilizable);
}

TEST(SolveDare, RejectsBadInput) {
  auto sys = make_scalar_system(1.0, 1.0, 1.0, 1.0);
  EXPECT_THROW(solve_dare(sys, -1), BadInput);
  EXPECT_THROW(solve_dare(sys, 1, 0.0), BadInput);
  EXPECT_THROW(solve_dare(sys, 1, 1e-12, 0), BadInput);

  auto bad_r = sys;
  bad_r.R(0, 0) = 0.0;
  EXPECT_THROW(solve_dare(bad_r, 1), BadInput);

  auto neg_q = sys;
  neg_q.Q(0, 0) = -1.0;
  EXPECT_THROW(solve_dare(neg_q, 1), BadInput);

  SystemMatrices asym;
  asym.A = Eigen::MatrixXd::Identity(2, 2);
  asym.B = Eigen::MatrixXd::Identity(2, 2);
  asym.Q = Eigen::MatrixXd{{1.0, 0.5}, {0.0, 1.0}};
  asym.R = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_THROW(solve_dare(asym, 1), BadInput);

  SystemMatrices mismatched;
  mismatched.A = Eigen::MatrixXd::Identity(2, 2);
  mismatched.B = Eigen::MatrixXd::Identity(3, 1);
  mismatched.Q = Eigen::MatrixXd::Identity(2, 2);
  mismatched.R = Eigen::MatrixXd::Identity(1, 1);
  EXPECT_THROW(solve_dare(mismatched, 1), BadInput);
}

TEST(SystemMatrices, StrictValidationRejectsSemidefiniteQ) {
  SystemMatrices sys;
  sys.A = Eigen::MatrixXd::Identity(2, 2);
  sys.B = Eigen::MatrixXd::Identity(2, 2);
  sys.Q = Eigen::Vector2d(1.0, 0.0).asDiagonal();
  sys.R = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_THROW(sys.validate(true), BadInput);
  EXPECT_NO_THROW(sys.validate(false));
}

}  // namespace
}  // namespace lqc
