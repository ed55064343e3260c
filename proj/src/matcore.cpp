#include "gainlab/matcore.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

namespace gainlab {

namespace {

// Pade(13, 13) coefficients and the 1-norm threshold below which the
// approximant is accurate to double precision (Higham, 2005).
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0,  129060195264000.0,   10559470521600.0,
    670442572800.0,      33522128640.0,       1323241920.0,
    40840800.0,          960960.0,            16380.0,
    182.0,               1.0};
constexpr double kTheta13 = 5.371920351148152;

double one_norm(const Matrix& M) {
  return M.cwiseAbs().colwise().sum().maxCoeff();
}

void require_square(const Matrix& A, std::string_view what) {
  if (A.rows() != A.cols() || A.rows() == 0) {
    std::ostringstream msg;
    msg << what << " must be a non-empty square matrix (got " << A.rows()
        << "x" << A.cols() << ")";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

void require_finite(const Matrix& M, std::string_view what) {
  if (!M.allFinite()) {
    throw std::invalid_argument(std::string(what) +
                                " contains non-finite entries");
  }
}

double StabilityCertificate::envelope(double t) const {
  return M * std::exp(-sigma * t);
}

Matrix mat_exp(const Matrix& A, double t) {
  require_square(A, "mat_exp argument");
  if (!std::isfinite(t)) throw std::invalid_argument("mat_exp: t must be finite");
  const Eigen::Index n = A.rows();
  Matrix X = A * t;
  require_finite(X, "mat_exp argument");

  const double norm = one_norm(X);
  if (norm == 0.0) return Matrix::Identity(n, n);
  int squarings = 0;
  if (norm > kTheta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / kTheta13)));
    X /= std::ldexp(1.0, squarings);
  }

  const Matrix I = Matrix::Identity(n, n);
  const Matrix X2 = X * X;
  const Matrix X4 = X2 * X2;
  const Matrix X6 = X4 * X2;
  const auto& b = kPade13;
  const Matrix U = X * (X6 * (b[13] * X6 + b[11] * X4 + b[9] * X2) +
                        b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * I);
  const Matrix V = X6 * (b[12] * X6 + b[10] * X4 + b[8] * X2) + b[6] * X6 +
                   b[4] * X4 + b[2] * X2 + b[0] * I;
  Matrix E = (V - U).partialPivLu().solve(V + U);
  for (int k = 0; k < squarings; ++k) E = E * E;

  if (!E.allFinite()) {
    std::ostringstream msg;
    msg << "mat_exp overflow: ||A t||_1 = " << norm;
    throw OverflowError(msg.str());
  }
  return E;
}

HoldStep hold_step(const Matrix& A, const Matrix& B, double tau) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = A;
  aug.topRightCorner(n, m) = B;
  const Matrix E = mat_exp(aug, tau);
  return {E.topLeftCorner(n, n), E.topRightCorner(n, m)};
}

Matrix lyapunov_solve(const Matrix& A, const Matrix& Q) {
  require_square(A, "lyapunov_solve: A");
  require_square(Q, "lyapunov_solve: Q");
  if (A.rows() != Q.rows()) {
    throw std::invalid_argument("lyapunov_solve: A and Q differ in size");
  }
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, Q.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("lyapunov_solve: Q must be symmetric");
  }
  require_finite(A, "lyapunov_solve: A");
  require_finite(Q, "lyapunov_solve: Q");

  const Eigen::Index n = A.rows();
  const Eigen::Index nn = n * n;
  const Matrix At = A.transpose();
  // vec is column-major: vec(A'P) = (I (x) A') vec(P), vec(PA) = (A' (x) I) vec(P).
  Matrix L = Matrix::Zero(nn, nn);
  for (Eigen::Index j = 0; j < n; ++j) {
    L.block(j * n, j * n, n, n) += At;
    for (Eigen::Index k = 0; k < n; ++k) {
      L.block(j * n, k * n, n, n).diagonal().array() += At(j, k);
    }
  }
  Eigen::FullPivLU<Matrix> lu(L);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    throw SingularError("Lyapunov equation is not solvable (A has eigenvalues "
                        "summing to zero)");
  }
  const Vector rhs = -Eigen::Map<const Vector>(Q.data(), nn);
  const Vector vecP = lu.solve(rhs);
  Matrix P = Eigen::Map<const Matrix>(vecP.data(), n, n);
  P = 0.5 * (P + P.transpose());

  const double residual = (At * P + P * A + Q).norm();
  const double scale = A.norm() * P.norm() + Q.norm();
  if (!P.allFinite() || residual > 1e-10 * scale) {
    std::ostringstream msg;
    msg << "Lyapunov equation is not solvable (residual " << residual
        << " exceeds 1e-10 * " << scale << ")";
    throw SingularError(msg.str());
  }
  return P;
}

bool is_positive_definite(const Matrix& P) {
  const Eigen::Index n = P.rows();
  if (n == 0 || P.cols() != n) return false;
  const double trace = P.trace();
  if (!(trace > 0.0)) return false;
  const double floor = 1e-12 * trace;
  Matrix L = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double d = P(i, i) - L.row(i).head(i).squaredNorm();
    if (!(d > floor)) return false;
    L(i, i) = std::sqrt(d);
    for (Eigen::Index r = i + 1; r < n; ++r) {
      L(r, i) = (P(r, i) - L.row(r).head(i).dot(L.row(i).head(i))) / L(i, i);
    }
  }
  return true;
}

bool is_hurwitz(const Matrix& A) {
  if (A.rows() != A.cols() || A.rows() == 0 || !A.allFinite()) return false;
  try {
    const Matrix P = lyapunov_solve(A, Matrix::Identity(A.rows(), A.rows()));
    return is_positive_definite(P);
  } catch (const SingularError&) {
    return false;
  }
}

SymmetricEigen symmetric_eigen(const Matrix& S, double off_tol) {
  require_square(S, "symmetric_eigen argument");
  const Eigen::Index n = S.rows();
  Matrix a = 0.5 * (S + S.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double scale = a.norm();

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < 100 && off_norm() > off_tol * scale; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });
  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

double induced_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  if (M.rows() == 1 || M.cols() == 1) return M.norm();
  const Matrix G = M.cols() <= M.rows() ? Matrix(M.transpose() * M)
                                        : Matrix(M * M.transpose());
  return std::sqrt(std::max(0.0, symmetric_eigen(G).values.maxCoeff()));
}

StabilityCertificate stability_certificate(const Matrix& A) {
  require_square(A, "stability_certificate argument");
  Matrix P;
  try {
    P = lyapunov_solve(A, Matrix::Identity(A.rows(), A.rows()));
  } catch (const SingularError&) {
    throw NotHurwitzError("A is not Hurwitz (Lyapunov equation singular)");
  }
  if (!is_positive_definite(P)) {
    throw NotHurwitzError(
        "A is not Hurwitz (Lyapunov solution is not positive definite)");
  }
  const Vector eig = symmetric_eigen(P).values;
  const double lmin = eig.minCoeff();
  const double lmax = eig.maxCoeff();
  StabilityCertificate cert;
  cert.P = std::move(P);
  cert.M = std::max(1.0, std::sqrt(lmax / lmin));
  cert.sigma = 1.0 / (2.0 * lmax);
  return cert;
}

bool certificate_holds(const Matrix& A, const StabilityCertificate& cert,
                       int samples, double rel_slack) {
  const double t_max = 10.0 / cert.sigma;
  for (int k = 0; k < samples; ++k) {
    const double t = t_max * k / std::max(1, samples - 1);
    if (induced_norm(mat_exp(A, t)) > cert.envelope(t) * (1.0 + rel_slack)) {
      return false;
    }
  }
  return true;
}

StateSpaceSystem::StateSpaceSystem(Matrix A, Matrix B, Matrix C)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)) {
  require_square(A_, "A");
  if (B_.rows() != A_.rows() || B_.cols() == 0) {
    throw std::invalid_argument("B must have as many rows as A and at least "
                                "one column");
  }
  if (C_.cols() != A_.rows() || C_.rows() == 0) {
    throw std::invalid_argument("C must have as many columns as A and at "
                                "least one row");
  }
  require_finite(A_, "A");
  require_finite(B_, "B");
  require_finite(C_, "C");
  certificate_ = stability_certificate(A_);
}

StructureFlags structure_flags(const StateSpaceSystem& sys, double tol) {
  const Matrix& A = sys.A();
  StructureFlags flags;
  flags.metzler = true;
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      if (i != j && A(i, j) < -tol) flags.metzler = false;
  flags.nonnegative_B = (sys.B().array() >= -tol).all();
  flags.nonnegative_C = (sys.C().array() >= -tol).all();

  if ((A - A.transpose()).cwiseAbs().maxCoeff() <= tol) {
    const SymmetricEigen eig = symmetric_eigen(A);
    if (eig.values.maxCoeff() < 0.0) {
      // A = V diag(values) V'  =>  Q = V', lambdas = -values.
      flags.assumption_H = AssumptionH{eig.vectors.transpose(), -eig.values};
      // ascending lambdas
      const Eigen::Index n = A.rows();
      AssumptionH& h = *flags.assumption_H;
      Matrix Q(n, n);
      Vector l(n);
      for (Eigen::Index k = 0; k < n; ++k) {
        Q.row(k) = h.Q.row(n - 1 - k);
        l(k) = h.lambdas(n - 1 - k);
      }
      h.Q = std::move(Q);
      h.lambdas = std::move(l);
    }
  }
  return flags;
}

}  // namespace gainlab
