#include "gainlab/quadrature.hpp"

#include <algorithm>

namespace gainlab {

namespace {

constexpr int kMaxSamples = 2'000'000;

double kernel_value(const Matrix& A, const Matrix& l, const Matrix& r,
                    double s) {
  return (l * mat_exp(A, s) * r)(0, 0);
}

int grid_count(const Matrix& A, double span, int min_samples) {
  const double a_norm = std::max(induced_norm(A), 1e-12);
  const double by_norm = std::ceil(span * a_norm / 0.25);
  const double count = std::max<double>(min_samples, by_norm);
  return static_cast<int>(std::min<double>(count, kMaxSamples));
}

}  // namespace

std::vector<Matrix> sample_kernel(const Matrix& A, const Matrix& L,
                                  const Matrix& R, double t0, double h,
                                  int count) {
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(count) + 1);
  const Matrix step = mat_exp(A, h);
  Matrix X = mat_exp(A, t0) * R;
  for (int k = 0; k <= count; ++k) {
    out.push_back(L * X);
    X = step * X;
  }
  return out;
}

std::vector<double> kernel_sign_changes(const Matrix& A, const Matrix& l,
                                        const Matrix& r, double t0, double t1,
                                        int min_samples, double root_tol) {
  std::vector<double> roots;
  if (!(t1 > t0)) return roots;
  const int count = grid_count(A, t1 - t0, min_samples);
  const double h = (t1 - t0) / count;
  const std::vector<Matrix> g = sample_kernel(A, l, r, t0, h, count);
  for (int k = 0; k < count; ++k) {
    const int s0 = sgn(g[k](0, 0));
    if (s0 == sgn(g[k + 1](0, 0))) continue;
    double lo = t0 + k * h;
    double hi = (k + 1 == count) ? t1 : t0 + (k + 1) * h;
    while (hi - lo > root_tol) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (sgn(kernel_value(A, l, r, mid)) == s0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    roots.push_back(0.5 * (lo + hi));
  }
  return roots;
}

double integrate_kernel_norm(const Matrix& A, const Matrix& L, const Matrix& R,
                             double t0, double t1, double abs_tol) {
  if (!(t1 > t0)) return 0.0;
  if (L.norm() == 0.0 || R.norm() == 0.0) return 0.0;
  const double min_width = 1e-6 * (t1 - t0);

  std::vector<double> cuts{t0};
  if (L.rows() == 1 && R.cols() == 1) {
    const std::vector<double> roots = kernel_sign_changes(A, L, R, t0, t1);
    cuts.insert(cuts.end(), roots.begin(), roots.end());
  }
  cuts.push_back(t1);

  // Short panels where the kernel can oscillate, so the first Simpson
  // estimate cannot alias a sign change away.
  const double a_norm = std::max(induced_norm(A), 1e-12);
  const double panel_width = std::max(1.0 / a_norm, 1e-3 * (t1 - t0));

  const auto integrand = [&](double s) {
    return induced_norm(L * mat_exp(A, s) * R);
  };
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = cuts[k + 1];
    if (!(b > a)) continue;
    const double share = abs_tol * (b - a) / (t1 - t0);
    const int panels = static_cast<int>(
        std::clamp(std::ceil((b - a) / panel_width), 1.0, 4096.0));
    total += adaptive_simpson(integrand, a, b, share, min_width, panels);
  }
  return total;
}

double tail_horizon(const StabilityCertificate& cert, double scale,
                    double budget) {
  if (scale <= 0.0) return 0.0;
  const double ratio = scale * cert.M / (cert.sigma * budget);
  return ratio > 1.0 ? std::log(ratio) / cert.sigma : 0.0;
}

}  // namespace gainlab
