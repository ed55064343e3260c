#include "gainlab/matcore.hpp"

#include <cmath>
#include <complex>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "test_systems.hpp"

namespace gainlab {
namespace {

using testing::random_hurwitz;

TEST(MatExpTest, ZeroMatrixGivesIdentity) {
  EXPECT_TRUE(mat_exp(Matrix::Zero(2, 2), 5.0).isApprox(Matrix::Identity(2, 2), 0.0));
}

TEST(MatExpTest, NilpotentSeriesTerminates) {
  Matrix A(2, 2);
  A << 0, 1, 0, 0;
  Matrix expected(2, 2);
  expected << 1, 1, 0, 1;
  EXPECT_LE((mat_exp(A, 1.0) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MatExpTest, DiagonalScalarExponentials) {
  Matrix A = Matrix::Zero(2, 2);
  A.diagonal() << -1, -2;
  const Matrix E = mat_exp(A, 1.0);
  EXPECT_NEAR(E(0, 0), 0.3678794412, 1e-10);
  EXPECT_NEAR(E(1, 1), 0.1353352832, 1e-10);
  EXPECT_EQ(E(0, 1), 0.0);
}

TEST(MatExpTest, AgreesWithEigenMatrixFunctions) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index n = 1 + trial % 6;
    const Matrix A = testing::uniform_matrix(rng, n, n, -3.0, 3.0);
    const double t = 0.1 + 0.1 * trial;
    const Matrix oracle = (A * t).exp();
    const double bound = 1e-12 * std::exp((A * t).norm());
    EXPECT_LE((mat_exp(A, t) - oracle).norm(), bound) << "trial " << trial;
  }
}

TEST(MatExpTest, RotationGenerator) {
  Matrix A(2, 2);
  A << 0, -1, 1, 0;
  const double t = 2.5;
  Matrix expected(2, 2);
  expected << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  EXPECT_LE((mat_exp(A, t) - expected).norm(), 1e-14);
}

TEST(MatExpTest, RejectsNonSquareAndOverflow) {
  EXPECT_THROW(mat_exp(Matrix::Zero(2, 3)), std::invalid_argument);
  EXPECT_THROW(mat_exp(Matrix::Constant(1, 1, 1000.0), 1.0), OverflowError);
  EXPECT_THROW(mat_exp(Matrix::Zero(1, 1), std::nan("")), std::invalid_argument);
}

TEST(MatExpTest, SemigroupAndDerivative) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> time(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 1 + trial % 5;
    Matrix A = random_hurwitz(rng, n);
    A *= 2.0 / std::max(2.0, A.norm());
    const double t = time(rng), s = time(rng);
    EXPECT_LE((mat_exp(A, t + s) - mat_exp(A, t) * mat_exp(A, s)).norm(), 1e-10);
    const double h = 1e-5;
    const Matrix fd = (mat_exp(A, h) - Matrix::Identity(n, n)) / h;
    EXPECT_LE((fd - A).norm(), 2.0 * A.squaredNorm() * h);
  }
}

TEST(HoldStepTest, MatchesClosedFormForScalar) {
  const HoldStep step = hold_step(Matrix::Constant(1, 1, -2.0), Matrix::Ones(1, 1), 0.3);
  EXPECT_NEAR(step.Phi(0, 0), std::exp(-0.6), 1e-15);
  EXPECT_NEAR(step.Gamma(0, 0), (1.0 - std::exp(-0.6)) / 2.0, 1e-15);
}

TEST(LyapunovTest, ScalarAndIdentity) {
  EXPECT_NEAR(lyapunov_solve(Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1))(0, 0), 0.5,
              1e-15);
  const Matrix P = lyapunov_solve(-Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  EXPECT_LE((P - 0.5 * Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(LyapunovTest, ResidualOnRandomHurwitz) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix A = random_hurwitz(rng, 3);
    Matrix Q = testing::uniform_matrix(rng, 3, 3, -1.0, 1.0);
    Q = Q * Q.transpose() + Matrix::Identity(3, 3);
    const Matrix P = lyapunov_solve(A, Q);
    const double residual = (A.transpose() * P + P * A + Q).norm();
    EXPECT_LE(residual, 1e-10 * (A.norm() * P.norm() + Q.norm()));
    EXPECT_LE((P - P.transpose()).norm(), 1e-14 * P.norm());
  }
}

TEST(LyapunovTest, SingularForImaginaryEigenvalues) {
  Matrix A(2, 2);
  A << 0, 1, -1, 0;
  EXPECT_THROW(lyapunov_solve(A, Matrix::Identity(2, 2)), SingularError);
  EXPECT_THROW(lyapunov_solve(A, Matrix::Identity(3, 3)), std::invalid_argument);
  Matrix Q(2, 2);
  Q << 1, 2, 0, 1;
  EXPECT_THROW(lyapunov_solve(-Matrix::Identity(2, 2), Q), std::invalid_argument);
}

TEST(CertificateTest, ScalarAndDiagonal) {
  const StabilityCertificate c1 = stability_certificate(Matrix::Constant(1, 1, -1.0));
  EXPECT_NEAR(c1.M, 1.0, 1e-15);
  EXPECT_NEAR(c1.sigma, 1.0, 1e-15);

  Matrix A = Matrix::Zero(2, 2);
  A.diagonal() << -1, -2;
  const StabilityCertificate c2 = stability_certificate(A);
  EXPECT_NEAR(c2.P(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(c2.P(1, 1), 0.25, 1e-15);
  EXPECT_NEAR(c2.M, std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(c2.sigma, 1.0, 1e-14);
}

TEST(CertificateTest, EnvelopeHoldsOnRandomMatrices) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 1 + trial % 5;
    const Matrix A = random_hurwitz(rng, n);
    const StabilityCertificate c = stability_certificate(A);
    EXPECT_GE(c.M, 1.0);
    EXPECT_GT(c.sigma, 0.0);
    const Matrix residual = A.transpose() * c.P + c.P * A + Matrix::Identity(n, n);
    EXPECT_LE(residual.norm(), 1e-10 * c.P.norm());
    EXPECT_TRUE(certificate_holds(A, c));
    for (int k = 0; k < 50; ++k) {
      const double t = 10.0 / c.sigma * k / 49.0;
      const double norm = Eigen::JacobiSVD<Matrix>(mat_exp(A, t)).singularValues()(0);
      EXPECT_LE(norm, c.M * std::exp(-c.sigma * t) * (1.0 + 1e-8));
    }
  }
}

TEST(CertificateTest, RejectsNonHurwitz) {
  EXPECT_THROW(stability_certificate(Matrix::Constant(1, 1, 0.5)), NotHurwitzError);
}

TEST(HurwitzTest, Examples) {
  EXPECT_TRUE(is_hurwitz(Matrix::Constant(1, 1, -1.0)));
  Matrix A(2, 2);
  A << 0, 1, -2, -1;
  EXPECT_TRUE(is_hurwitz(A));
  A << 0, 1, -1, 0;
  EXPECT_FALSE(is_hurwitz(A));
  EXPECT_FALSE(is_hurwitz(Matrix::Identity(2, 2)));
}

// Quadratic formula oracle over every 2x2 integer matrix with entries in [-3, 3].
TEST(HurwitzTest, AgreesWithQuadraticFormulaOnIntegerMatrices) {
  int checked = 0;
  for (int a = -3; a <= 3; ++a)
    for (int b = -3; b <= 3; ++b)
      for (int c = -3; c <= 3; ++c)
        for (int d = -3; d <= 3; ++d) {
          Matrix A(2, 2);
          A << a, b, c, d;
          const double tr = a + d;
          const double det = static_cast<double>(a) * d - static_cast<double>(b) * c;
          const std::complex<double> root = std::sqrt(std::complex<double>(tr * tr - 4 * det));
          const double max_re = std::max(((tr + root) / 2.0).real(), ((tr - root) / 2.0).real());
          EXPECT_EQ(is_hurwitz(A), max_re < 0.0) << A;
          ++checked;
        }
  EXPECT_EQ(checked, 2401);
}

TEST(PositiveDefiniteTest, Basic) {
  EXPECT_TRUE(is_positive_definite(Matrix::Identity(3, 3)));
  Matrix P(2, 2);
  P << 1, 2, 2, 1;
  EXPECT_FALSE(is_positive_definite(P));
  EXPECT_FALSE(is_positive_definite(Matrix::Zero(2, 2)));
}

TEST(SymmetricEigenTest, MatchesSelfAdjointSolver) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 1 + trial % 6;
    Matrix S = testing::uniform_matrix(rng, n, n, -2.0, 2.0);
    S = 0.5 * (S + S.transpose()).eval();
    const SymmetricEigen eig = symmetric_eigen(S);
    const Vector oracle = Eigen::SelfAdjointEigenSolver<Matrix>(S).eigenvalues();
    EXPECT_LE((eig.values - oracle).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, S.norm()));
    EXPECT_LE((eig.vectors.transpose() * eig.vectors - Matrix::Identity(n, n)).norm(), 1e-12);
    EXPECT_LE((S * eig.vectors - eig.vectors * eig.values.asDiagonal()).norm(),
              1e-11 * std::max(1.0, S.norm()));
  }
}

TEST(InducedNormTest, Examples) {
  Matrix M(2, 2);
  M << 3, 0, 0, -4;
  EXPECT_NEAR(induced_norm(M), 4.0, 1e-14);
  EXPECT_NEAR(induced_norm(Matrix::Ones(1, 2)), std::sqrt(2.0), 1e-14);
}

TEST(StateSpaceSystemTest, Validation) {
  EXPECT_THROW(StateSpaceSystem(Matrix::Zero(2, 3), Matrix::Ones(2, 1), Matrix::Ones(1, 2)),
               std::invalid_argument);
  EXPECT_THROW(StateSpaceSystem(-Matrix::Identity(2, 2), Matrix::Ones(3, 1), Matrix::Ones(1, 2)),
               std::invalid_argument);
  EXPECT_THROW(StateSpaceSystem(-Matrix::Identity(2, 2), Matrix::Ones(2, 1), Matrix::Ones(1, 3)),
               std::invalid_argument);
  Matrix bad = -Matrix::Identity(2, 2);
  bad(0, 1) = std::nan("");
  EXPECT_THROW(StateSpaceSystem(bad, Matrix::Ones(2, 1), Matrix::Ones(1, 2)),
               std::invalid_argument);
  Matrix osc(2, 2);
  osc << 0, 1, -1, 0;
  try {
    StateSpaceSystem(osc, Matrix::Ones(2, 1), Matrix::Ones(1, 2));
    FAIL() << "expected NotHurwitzError";
  } catch (const NotHurwitzError& e) {
    EXPECT_NE(std::string(e.what()).find("A is not Hurwitz"), std::string::npos);
  }
  const StateSpaceSystem sys = testing::diagonal_system();
  EXPECT_EQ(sys.n(), 2);
  EXPECT_EQ(sys.m(), 1);
  EXPECT_EQ(sys.p(), 2);
  EXPECT_FALSE(sys.is_siso());
}

TEST(StructureFlagsTest, MetzlerExample) {
  const StructureFlags f = structure_flags(testing::metzler_system());
  EXPECT_TRUE(f.metzler);
  EXPECT_TRUE(f.nonnegative_B);
  EXPECT_TRUE(f.nonnegative_C);
  ASSERT_TRUE(f.assumption_H.has_value());
  // eigenvalues of [[-2, 1], [1, -2]] are -1 and -3
  EXPECT_NEAR(f.assumption_H->lambdas(0), 1.0, 1e-12);
  EXPECT_NEAR(f.assumption_H->lambdas(1), 3.0, 1e-12);
  const Matrix& Q = f.assumption_H->Q;
  const Matrix A = testing::metzler_system().A();
  EXPECT_LE((Q * Q.transpose() - Matrix::Identity(2, 2)).norm(), 1e-10);
  EXPECT_LE((A + Q.transpose() * f.assumption_H->lambdas.asDiagonal() * Q).norm(),
            1e-8 * A.norm());
}

TEST(StructureFlagsTest, DiagonalAndNonSymmetric) {
  const StructureFlags f = structure_flags(testing::diagonal_system());
  ASSERT_TRUE(f.assumption_H.has_value());
  EXPECT_LE((f.assumption_H->Q.cwiseAbs() - Matrix::Identity(2, 2)).norm(), 1e-14);

  Matrix A(2, 2);
  A << -1, 5, 0, -1;
  const StructureFlags g =
      structure_flags(StateSpaceSystem(A, Matrix::Ones(2, 1), Matrix::Ones(1, 2)));
  EXPECT_FALSE(g.assumption_H.has_value());
  EXPECT_TRUE(g.metzler);
}

TEST(StructureFlagsTest, ToleranceAbsorbsRoundingNoise) {
  Matrix A(2, 2), B(2, 1), C(1, 2);
  A << -2, -1e-14, 1, -2;
  B << 1, -1e-15;
  C << 1, 0;
  const StateSpaceSystem sys(A, B, C);
  EXPECT_FALSE(structure_flags(sys).metzler);
  EXPECT_FALSE(structure_flags(sys).nonnegative_B);
  EXPECT_TRUE(structure_flags(sys, 1e-12).metzler);
  EXPECT_TRUE(structure_flags(sys, 1e-12).nonnegative_B);
}

}  // namespace
}  // namespace gainlab
