#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace gainlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a matrix that must be Hurwitz is not.
class NotHurwitzError : public Error {
 public:
  using Error::Error;
};

/// Raised when A'P + PA = -Q has no unique solution.
class SingularError : public Error {
 public:
  using Error::Error;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

void require_finite(const Matrix& M, std::string_view what);

/// Decay certificate ||exp(At)|| <= M exp(-sigma t) obtained from the
/// solution P of A'P + PA = -I.
struct StabilityCertificate {
  Matrix P;
  double M = 1.0;
  double sigma = 0.0;

  double envelope(double t) const;
};

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // columns are the matching unit eigenvectors
};

/// A = Q' (-diag(lambdas)) Q with Q orthogonal and lambdas > 0.
struct AssumptionH {
  Matrix Q;
  Vector lambdas;
};

struct StructureFlags {
  bool metzler = false;
  bool nonnegative_B = false;
  bool nonnegative_C = false;
  std::optional<AssumptionH> assumption_H;
};

/// exp(A t) by scaling and squaring with the degree-13 diagonal Pade
/// approximant.
Matrix mat_exp(const Matrix& A, double t = 1.0);

/// Exact propagation over `tau` under a held input:
/// x(tau) = Phi x(0) + Gamma u, with Phi = exp(A tau) and
/// Gamma = integral of exp(A s) B over [0, tau]. Both blocks come from one
/// exponential of [[A, B], [0, 0]] tau.
struct HoldStep {
  Matrix Phi;
  Matrix Gamma;
};

HoldStep hold_step(const Matrix& A, const Matrix& B, double tau);

/// Solves A'P + PA = -Q through the Kronecker form
/// (I (x) A' + A' (x) I) vec(P) = -vec(Q). Throws SingularError when
/// A has eigenvalue pairs summing to zero.
Matrix lyapunov_solve(const Matrix& A, const Matrix& Q);

StabilityCertificate stability_certificate(const Matrix& A);

bool is_hurwitz(const Matrix& A);

/// Cholesky test with pivot floor 1e-12 * trace(P).
bool is_positive_definite(const Matrix& P);

/// Cyclic Jacobi rotations; stops once the off-diagonal Frobenius norm
/// falls below off_tol * ||S||_F.
SymmetricEigen symmetric_eigen(const Matrix& S, double off_tol = 1e-12);

/// Largest singular value.
double induced_norm(const Matrix& M);

/// Checks ||exp(At)|| <= M exp(-sigma t) (1 + rel_slack) on `samples`
/// evenly spaced times in [0, 10 / sigma].
bool certificate_holds(const Matrix& A, const StabilityCertificate& cert,
                       int samples = 50, double rel_slack = 1e-8);

/// dx/dt = Ax + Bu, y = Cx with A Hurwitz. The constructor rejects
/// inconsistent dimensions, non-finite entries and non-Hurwitz A.
class StateSpaceSystem {
 public:
  StateSpaceSystem(Matrix A, Matrix B, Matrix C);

  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }
  const Matrix& C() const { return C_; }
  Eigen::Index n() const { return A_.rows(); }
  Eigen::Index m() const { return B_.cols(); }
  Eigen::Index p() const { return C_.rows(); }
  bool is_siso() const { return m() == 1 && p() == 1; }

  const StabilityCertificate& certificate() const { return certificate_; }

 private:
  Matrix A_;
  Matrix B_;
  Matrix C_;
  StabilityCertificate certificate_;
};

/// Sign structure and Assumption (H). Entries within `tol` of zero count as
/// nonnegative; (H) is reported iff A is symmetric within `tol` and negative
/// definite.
StructureFlags structure_flags(const StateSpaceSystem& sys, double tol = 0.0);

}  // namespace gainlab
