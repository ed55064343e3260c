#pragma once

#include <cmath>
#include <functional>
#include <type_traits>
#include <vector>

#include "gainlab/matcore.hpp"

namespace gainlab {

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

template <class F, class V>
V simpson_recurse(const F& f, double a, double b, const V& fa, const V& fm,
                  const V& fb, const V& whole, double tol, double min_width,
                  int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const V flm = f(lm);
  const V frm = f(rm);
  const V left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const V right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const V delta = left + right - whole;
  if (depth <= 0 || (b - a) <= 2.0 * min_width ||
      magnitude(delta) <= 15.0 * tol) {
    return V(left + right + delta / 15.0);
  }
  return V(simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, min_width,
                           depth - 1) +
           simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, min_width,
                           depth - 1));
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance
/// `abs_tol`. The interval is first cut into `panels` equal pieces sharing
/// the tolerance by length; no piece is refined below `min_width`.
/// Works for scalar (double) and Vector-valued integrands.
template <class F>
auto adaptive_simpson(const F& f, double a, double b, double abs_tol,
                      double min_width, int panels = 1) {
  using V = std::decay_t<decltype(f(a))>;
  const int count = panels < 1 ? 1 : panels;
  const double width = (b - a) / count;
  V total = f(a) * 0.0;
  if (!(b > a)) return total;
  double x0 = a;
  V f0 = f(a);
  for (int k = 1; k <= count; ++k) {
    const double x1 = (k == count) ? b : a + k * width;
    const double xm = 0.5 * (x0 + x1);
    const V fm = f(xm);
    const V f1 = f(x1);
    const V whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
    total = V(total + detail::simpson_recurse(f, x0, x1, f0, fm, f1, whole,
                                              abs_tol / count, min_width, 50));
    x0 = x1;
    f0 = f1;
  }
  return total;
}

/// Samples s -> L exp(A s) R at s = t0 + k h, k = 0..count, by repeated
/// multiplication with exp(A h).
std::vector<Matrix> sample_kernel(const Matrix& A, const Matrix& L,
                                  const Matrix& R, double t0, double h,
                                  int count);

/// Sign convention of the bang-bang law: sgn(0) = +1.
inline int sgn(double v) { return v >= 0.0 ? 1 : -1; }

/// Sign changes of the scalar kernel s -> l exp(A s) r on [t0, t1]:
/// detected on a dense grid (at least `min_samples` points, and no coarser
/// than 0.25 / ||A||) and refined by bisection to `root_tol`.
std::vector<double> kernel_sign_changes(const Matrix& A, const Matrix& l,
                                        const Matrix& r, double t0, double t1,
                                        int min_samples = 4096,
                                        double root_tol = 1e-12);

/// Integral of the induced norm of L exp(A s) R over [t0, t1]. Scalar kernels
/// are split at their sign changes so every Simpson panel sees a smooth
/// integrand.
double integrate_kernel_norm(const Matrix& A, const Matrix& L, const Matrix& R,
                             double t0, double t1, double abs_tol);

/// Horizon T* with scale * M exp(-sigma T*) / sigma <= budget.
double tail_horizon(const StabilityCertificate& cert, double scale,
                    double budget);

}  // namespace gainlab
