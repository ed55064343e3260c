#pragma once

#include <random>

#include <Eigen/Eigenvalues>

#include "gainlab/matcore.hpp"

namespace gainlab::testing {

inline StateSpaceSystem scalar_system() {
  return StateSpaceSystem(Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1),
                          Matrix::Ones(1, 1));
}

// A = -diag(1, 2), B = (1, 1)', C = I.
inline StateSpaceSystem diagonal_system() {
  Matrix A = Matrix::Zero(2, 2);
  A.diagonal() << -1.0, -2.0;
  return StateSpaceSystem(A, Matrix::Ones(2, 1), Matrix::Identity(2, 2));
}

inline StateSpaceSystem metzler_system() {
  Matrix A(2, 2), B(2, 1), C(1, 2);
  A << -2, 1, 1, -2;
  B << 1, 0;
  C << 1, 0;
  return StateSpaceSystem(A, B, C);
}

inline StateSpaceSystem oscillator_system() {
  Matrix A(2, 2), B(2, 1), C(1, 2);
  A << 0, 1, -1, -1;
  B << 0, 1;
  C << 1, 0;
  return StateSpaceSystem(A, B, C);
}

inline double spectral_abscissa(const Matrix& A) {
  return Eigen::EigenSolver<Matrix>(A, false).eigenvalues().real().maxCoeff();
}

inline Matrix uniform_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c,
                             double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix M(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) M(i, j) = dist(rng);
  return M;
}

// Entries in [-2, 2], shifted so the spectral abscissa is at most -margin.
inline Matrix random_hurwitz(std::mt19937_64& rng, Eigen::Index n, double margin = 0.2) {
  Matrix A = uniform_matrix(rng, n, n, -2.0, 2.0);
  const double alpha = spectral_abscissa(A);
  if (alpha > -margin) A -= (alpha + margin) * Matrix::Identity(n, n);
  return A;
}

inline StateSpaceSystem random_siso(std::mt19937_64& rng, Eigen::Index n) {
  Matrix A = random_hurwitz(rng, n);
  return StateSpaceSystem(A, uniform_matrix(rng, n, 1, -2.0, 2.0),
                          uniform_matrix(rng, 1, n, -2.0, 2.0));
}

}  // namespace gainlab::testing
