#include "gainlab/gains.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "gainlab/quadrature.hpp"

namespace gainlab {

namespace {

void require_single_input(const StateSpaceSystem& sys, const char* op) {
  if (sys.m() != 1) {
    throw std::invalid_argument(std::string(op) +
                                " requires a single-input system (m = 1)");
  }
}

double grid_tail_horizon(const StateSpaceSystem& sys, double budget) {
  return tail_horizon(sys.certificate(),
                      induced_norm(sys.C()) * induced_norm(sys.B()), budget);
}

Vector unit(Eigen::Index size, Eigen::Index k) {
  Vector e = Vector::Zero(size);
  e(k) = 1.0;
  return e;
}

// State reached at T under the input maximizing d'C x(T):
// u(T - r) = w(r) / |w(r)| with w(r) = B' exp(A'r) C'd.
Vector ascent_response(const StateSpaceSystem& sys, const Vector& d, double T,
                       double tol) {
  const Matrix& A = sys.A();
  const Matrix& B = sys.B();
  const Matrix l = d.transpose() * sys.C();
  if (sys.m() == 1) {
    std::vector<double> cuts{0.0};
    const std::vector<double> roots = kernel_sign_changes(A, l, B, 0.0, T);
    cuts.insert(cuts.end(), roots.begin(), roots.end());
    cuts.push_back(T);
    Vector x = Vector::Zero(sys.n());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double a = cuts[k];
      const double b = cuts[k + 1];
      if (!(b > a)) continue;
      const double mid = 0.5 * (a + b);
      const int sign = sgn((l * mat_exp(A, mid) * B)(0, 0));
      const HoldStep piece = hold_step(A, B, b - a);
      x += sign * (mat_exp(A, a) * piece.Gamma).col(0);
    }
    return x;
  }
  const auto integrand = [&](double r) -> Vector {
    const Matrix E = mat_exp(A, r);
    const Vector w = (l * E * B).transpose();
    const double norm = w.norm();
    if (norm == 0.0) return Vector::Zero(sys.n());
    return E * B * (w / norm);
  };
  const double panel = std::max(1.0 / std::max(induced_norm(A), 1e-12), T / 4096);
  const int panels = static_cast<int>(std::ceil(T / panel));
  return adaptive_simpson(integrand, 0.0, T, tol, 1e-6 * T, panels);
}

GainEstimate periodic_estimate_from_curve(
    const std::vector<std::pair<double, double>>& curve, double tol) {
  GainEstimate est;
  est.kind = GainKind::kEstimate;
  est.method = "periodic";
  est.tolerance = tol;
  double best_T = 0.0;
  for (const auto& [T, W] : curve) {
    if (W > est.value) {
      est.value = W;
      best_T = T;
    }
  }
  std::ostringstream note;
  note.precision(17);
  note << "grid sup of W(T) attained at T = " << best_T
       << "; the sup over all T > 0 is not certified; W(T) tends to the "
          "l1-impulse value as T grows";
  est.note = note.str();
  return est;
}

}  // namespace

std::string to_string(GainKind kind) {
  switch (kind) {
    case GainKind::kExact: return "exact";
    case GainKind::kLower: return "lower";
    case GainKind::kUpper: return "upper";
    case GainKind::kEstimate: return "estimate";
  }
  return "estimate";
}

std::string to_string(PositivityCertificate tag) {
  switch (tag) {
    case PositivityCertificate::kNone: return "none";
    case PositivityCertificate::kMetzlerNonneg: return "metzler-nonneg";
    case PositivityCertificate::kAssumptionH: return "assumption-h";
    case PositivityCertificate::kGridVerified: return "grid-verified";
  }
  return "none";
}

double BangBangInput::value(double s) const {
  if (initial_sign == 0 || s < 0.0 || s > horizon) return 0.0;
  const auto flips = std::upper_bound(switch_times.begin(), switch_times.end(), s) -
                     switch_times.begin();
  return (flips % 2 == 0) ? initial_sign : -initial_sign;
}

GainEstimate l1_impulse_gain(const StateSpaceSystem& sys, double tol) {
  require_single_input(sys, "l1_impulse_gain");
  if (!(tol > 0.0)) throw std::invalid_argument("l1_impulse_gain: tol must be positive");
  const double horizon = grid_tail_horizon(sys, 0.5 * tol);
  GainEstimate est;
  est.value = integrate_kernel_norm(sys.A(), sys.C(), sys.B(), 0.0, horizon,
                                    0.5 * tol);
  est.method = "l1-impulse";
  est.tolerance = tol;
  if (sys.p() == 1) {
    est.kind = GainKind::kExact;
  } else {
    est.kind = GainKind::kUpper;
    est.note = "p > 1: the impulse-response L1 norm bounds the gain from "
               "above; exactness holds for single-output systems only";
  }
  return est;
}

PositivityCertificate positivity_certificate(const StateSpaceSystem& sys,
                                             int grid_n) {
  require_single_input(sys, "positivity_certificate");
  const StructureFlags flags = structure_flags(sys);
  const Eigen::Index n = sys.n();
  if (flags.assumption_H && sys.C().rows() == n &&
      sys.C() == Matrix::Identity(n, n)) {
    return PositivityCertificate::kAssumptionH;
  }
  if (flags.metzler && flags.nonnegative_B && flags.nonnegative_C) {
    return PositivityCertificate::kMetzlerNonneg;
  }
  if (grid_n < 2) return PositivityCertificate::kNone;

  const double horizon = std::max(grid_tail_horizon(sys, 1e-9), 1.0);
  const double h = horizon / (grid_n - 1);
  const std::vector<Matrix> g =
      sample_kernel(sys.A(), sys.C(), sys.B(), 0.0, h, grid_n - 1);
  for (int i = 0; i < grid_n; ++i) {
    for (int j = i; j < grid_n; ++j) {
      if (g[i].col(0).dot(g[j].col(0)) < -1e-12) {
        return PositivityCertificate::kNone;
      }
    }
  }
  return PositivityCertificate::kGridVerified;
}

GainEstimate dc_gain(const StateSpaceSystem& sys, int positivity_grid) {
  const Matrix X = sys.C() * sys.A().partialPivLu().solve(sys.B());
  GainEstimate est;
  est.method = "dc";
  if (sys.m() == 1) {
    est.value = X.norm();
    const PositivityCertificate tag = positivity_certificate(sys, positivity_grid);
    if (tag != PositivityCertificate::kNone) {
      est.kind = GainKind::kExact;
      est.note = "positivity certificate: " + to_string(tag);
      if (tag == PositivityCertificate::kGridVerified) {
        est.note += " (sampled kernel sign check, not a proof)";
      }
    } else {
      est.kind = GainKind::kLower;
    }
  } else {
    est.value = induced_norm(X);
    est.kind = GainKind::kLower;
    est.note = "m > 1: induced 2-norm of C A^-1 B, attained by a constant input";
  }
  est.tolerance = 1e-12 * std::max(1.0, est.value);
  return est;
}

VResult v_of_t(const StateSpaceSystem& sys, double T, const VOptions& options) {
  if (!(T > 0.0)) throw std::invalid_argument("v_of_t: T must be positive");
  VResult out;
  if (sys.is_siso() && !options.force_ascent) {
    out.value = integrate_kernel_norm(sys.A(), sys.C(), sys.B(), 0.0, T,
                                      options.tol);
    out.direction = Vector::Ones(1);
    out.kind = GainKind::kExact;
    return out;
  }

  const Eigen::Index p = sys.p();
  std::vector<Vector> starts;
  for (Eigen::Index k = 0; k < p; ++k) starts.push_back(unit(p, k));
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  for (int r = 0; r < options.restarts; ++r) {
    Vector d(p);
    for (Eigen::Index k = 0; k < p; ++k) d(k) = normal(rng);
    if (d.norm() > 0.0) starts.push_back(d.normalized());
  }

  out.value = 0.0;
  out.direction = unit(p, 0);
  for (Vector d : starts) {
    for (int it = 0; it < options.max_iterations; ++it) {
      const Vector y = sys.C() * ascent_response(sys, d, T, options.tol);
      const double value = y.norm();
      if (value > out.value) {
        out.value = value;
        out.direction = y / value;
      }
      if (value == 0.0) break;
      const Vector next = y / value;
      const bool converged = (next - d).norm() < options.tol;
      d = next;
      if (converged) break;
    }
  }
  out.kind = (p == 1) ? GainKind::kExact : GainKind::kLower;
  return out;
}

VCurve v_curve(const StateSpaceSystem& sys, std::vector<double> horizons,
               const VOptions& options) {
  std::sort(horizons.begin(), horizons.end());
  if (horizons.empty() || !(horizons.front() > 0.0)) {
    throw std::invalid_argument("v_curve: horizons must be positive");
  }
  VCurve curve;
  curve.horizons = horizons;
  if (sys.is_siso() && !options.force_ascent) {
    const double span = horizons.back();
    double prev = 0.0;
    double acc = 0.0;
    for (double T : horizons) {
      acc += integrate_kernel_norm(sys.A(), sys.C(), sys.B(), prev, T,
                                   options.tol * (T - prev) / span);
      prev = T;
      curve.values.push_back(acc);
      curve.directions.push_back(Vector::Ones(1));
    }
    return curve;
  }
  for (double T : horizons) {
    const VResult r = v_of_t(sys, T, options);
    curve.values.push_back(r.value);
    curve.directions.push_back(r.direction);
  }
  return curve;
}

BangBangInput bang_bang_switches(const StateSpaceSystem& sys, double T,
                                 int samples) {
  if (!sys.is_siso()) {
    throw std::invalid_argument("bang_bang_switches requires a SISO system");
  }
  if (!(T > 0.0)) throw std::invalid_argument("bang_bang_switches: T must be positive");
  BangBangInput out;
  out.horizon = T;

  const Matrix& A = sys.A();
  const double scale = induced_norm(sys.C()) * induced_norm(sys.B());
  const int count = std::max(samples, 2);
  const std::vector<Matrix> g =
      sample_kernel(A, sys.C(), sys.B(), 0.0, T / count, count);
  double peak = 0.0;
  for (const Matrix& v : g) peak = std::max(peak, std::abs(v(0, 0)));
  if (peak <= 1e-13 * scale || scale == 0.0) {
    out.initial_sign = 0;
    return out;
  }

  // Roots in r = T - s, where the kernel is C exp(A r) B.
  const std::vector<double> roots =
      kernel_sign_changes(A, sys.C(), sys.B(), 0.0, T, count);
  for (auto it = roots.rbegin(); it != roots.rend(); ++it) {
    const double s = T - *it;
    if (s > 0.0 && s < T) out.switch_times.push_back(s);
  }
  const double first_end = out.switch_times.empty() ? T : out.switch_times.front();
  const double r_mid = T - 0.5 * first_end;
  out.initial_sign = sgn((sys.C() * mat_exp(A, r_mid) * sys.B())(0, 0));
  return out;
}

double psi(const StateSpaceSystem& sys, double omega) {
  require_single_input(sys, "psi");
  const Matrix& A = sys.A();
  const Eigen::Index n = sys.n();
  const Matrix shifted = A * A + omega * omega * Matrix::Identity(n, n);
  const Vector xi = shifted.partialPivLu().solve(sys.B()).col(0);
  const Vector c_xi = sys.C() * xi;
  const Vector ca_xi = sys.C() * (A * xi);
  const double a = omega * omega * c_xi.squaredNorm();
  const double b = ca_xi.squaredNorm();
  const double cross = ca_xi.dot(c_xi);
  const double inner = a + b + std::sqrt((a - b) * (a - b) +
                                         4.0 * omega * omega * cross * cross);
  return std::sqrt(0.5 * std::max(0.0, inner));
}

std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi >= lo) || points < 1) {
    throw std::invalid_argument("log_grid: need 0 < lo <= hi and points >= 1");
  }
  std::vector<double> out;
  if (points == 1) return {lo};
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int k = 0; k < points; ++k) {
    out.push_back(k + 1 == points ? hi : std::exp(a + (b - a) * k / (points - 1)));
  }
  return out;
}

GainEstimate psi_lower_bound(const StateSpaceSystem& sys,
                             const std::vector<double>& omegas, bool refine) {
  require_single_input(sys, "psi_lower_bound");
  if (omegas.empty()) throw std::invalid_argument("psi_lower_bound: no frequencies");
  for (double w : omegas) {
    if (!(w > 0.0)) throw std::invalid_argument("psi_lower_bound: omega must be positive");
  }
  std::vector<double> grid = omegas;
  std::sort(grid.begin(), grid.end());
  std::size_t best = 0;
  double best_value = -1.0;
  double best_omega = grid.front();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double v = psi(sys, grid[k]);
    if (v > best_value) {
      best_value = v;
      best = k;
      best_omega = grid[k];
    }
  }
  if (refine && grid.size() > 1) {
    // Golden-section search in log(omega) on the bracket around the argmax.
    double lo = std::log(grid[best == 0 ? 0 : best - 1]);
    double hi = std::log(grid[std::min(best + 1, grid.size() - 1)]);
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - ratio * (hi - lo);
    double x2 = lo + ratio * (hi - lo);
    double f1 = psi(sys, std::exp(x1));
    double f2 = psi(sys, std::exp(x2));
    for (int it = 0; it < 20; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + ratio * (hi - lo);
        f2 = psi(sys, std::exp(x2));
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - ratio * (hi - lo);
        f1 = psi(sys, std::exp(x1));
      }
    }
    for (auto [x, f] : {std::pair{x1, f1}, std::pair{x2, f2}}) {
      if (f > best_value) {
        best_value = f;
        best_omega = std::exp(x);
      }
    }
  }
  GainEstimate est;
  est.value = best_value;
  est.kind = GainKind::kLower;
  est.method = "sinusoid";
  est.tolerance = 1e-12 * std::max(1.0, best_value);
  std::ostringstream note;
  note.precision(17);
  note << "sup attained near omega = " << best_omega;
  est.note = note.str();
  return est;
}

GainEstimate onb_upper_bound(const StateSpaceSystem& sys, int random_bases,
                             double tol, std::uint64_t seed) {
  require_single_input(sys, "onb_upper_bound");
  if (!(tol > 0.0)) throw std::invalid_argument("onb_upper_bound: tol must be positive");
  const Eigen::Index p = sys.p();
  const double per_term = tol / static_cast<double>(p);

  const auto evaluate = [&](const Matrix& basis) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) {
      const Matrix row = basis.col(i).transpose() * sys.C();
      const double horizon = tail_horizon(
          sys.certificate(), induced_norm(row) * induced_norm(sys.B()),
          0.5 * per_term);
      const double term = integrate_kernel_norm(sys.A(), row, sys.B(), 0.0,
                                                horizon, 0.5 * per_term);
      sum += term * term;
    }
    return std::sqrt(sum);
  };

  double best = evaluate(Matrix::Identity(p, p));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int k = 0; k < random_bases && p > 1; ++k) {
    Matrix G(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index j = 0; j < p; ++j) G(i, j) = normal(rng);
    const Matrix Q = Eigen::HouseholderQR<Matrix>(G).householderQ();
    best = std::min(best, evaluate(Q));
  }
  GainEstimate est;
  est.value = best;
  est.kind = GainKind::kUpper;
  est.method = "onb";
  est.tolerance = tol;
  return est;
}

double periodic_bound(const StateSpaceSystem& sys, double T, double tol) {
  if (!(T > 0.0)) throw std::invalid_argument("periodic_bound: T must be positive");
  const Eigen::Index n = sys.n();
  const Matrix shifted = mat_exp(sys.A(), T) - Matrix::Identity(n, n);
  // C (e^{AT} - I)^{-1}, via the transposed system.
  const Matrix Cw =
      shifted.transpose().partialPivLu().solve(sys.C().transpose()).transpose();
  return integrate_kernel_norm(sys.A(), Cw, sys.B(), 0.0, T, tol);
}

std::vector<double> default_periodic_grid(const StabilityCertificate& cert) {
  std::vector<double> grid;
  for (int k = -2; k <= 6; ++k) grid.push_back(std::ldexp(1.0, k) / cert.sigma);
  return grid;
}

GainEstimate periodic_upper_estimate(const StateSpaceSystem& sys,
                                     const std::vector<double>& T_grid,
                                     double tol) {
  require_single_input(sys, "periodic_upper_estimate");
  const std::vector<double> grid =
      T_grid.empty() ? default_periodic_grid(sys.certificate()) : T_grid;
  std::vector<std::pair<double, double>> curve;
  for (double T : grid) curve.emplace_back(T, periodic_bound(sys, T, tol));
  return periodic_estimate_from_curve(curve, tol);
}

Theorem41Result theorem41_bound(const Theorem41Input& input) {
  if (input.certificates.empty()) {
    throw std::invalid_argument("theorem41_bound: empty certificate list");
  }
  for (const DecayPair& c : input.certificates) {
    if (!(c.M >= 1.0) || !(c.sigma > 0.0)) {
      throw std::invalid_argument("theorem41_bound: need M >= 1 and sigma > 0");
    }
  }
  const auto& ts = input.b_times;
  const auto& bs = input.b_values;
  if (ts.empty() || ts.size() != bs.size()) {
    throw std::invalid_argument("theorem41_bound: b samples are empty or ragged");
  }
  if (ts.front() != 0.0) {
    throw std::invalid_argument("theorem41_bound: b samples must start at t = 0");
  }
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (!std::isfinite(bs[k]) || bs[k] < 0.0) {
      throw std::invalid_argument("theorem41_bound: b values must be finite and >= 0");
    }
    if (k > 0 && !(ts[k] > ts[k - 1])) {
      throw std::invalid_argument("theorem41_bound: sample times must increase");
    }
    if (k > 0 && bs[k] < bs[k - 1]) {
      throw std::invalid_argument("theorem41_bound: b samples must be non-decreasing");
    }
  }
  for (double T : input.T_grid) {
    if (!(T > 0.0)) throw std::invalid_argument("theorem41_bound: T must be positive");
  }

  // b is the right-continuous step function through the samples.
  const auto b_at = [&](double t) {
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    return bs[static_cast<std::size_t>(it - ts.begin()) - 1];
  };

  Theorem41Result out;
  out.sup_b = bs.back();
  for (const DecayPair& c : input.certificates) {
    for (double T : input.T_grid) {
      Theorem41Cell cell{c, T, 0.0};
      if (!(T > std::log(c.M) / c.sigma)) {
        out.skipped.push_back(cell);
        continue;
      }
      const double lambda = c.M * std::exp(-c.sigma * T);
      const double bT = b_at(T);
      double sup = 0.0;
      // On [t_k, t_{k+1}) the decay factor peaks at t_k and b equals b_k.
      for (std::size_t k = 0; k < ts.size() && ts[k] < T; ++k) {
        sup = std::max(sup, c.M * std::exp(-c.sigma * ts[k]) * bT / (1.0 - lambda) +
                                bs[k]);
      }
      cell.value = sup;
      out.cells.push_back(cell);
      if (!out.best_cell || sup < *out.best_cell) out.best_cell = sup;
    }
  }

  out.estimate.kind = GainKind::kUpper;
  out.estimate.method = "theorem41";
  out.estimate.value = out.best_cell ? std::min(*out.best_cell, out.sup_b) : out.sup_b;
  out.estimate.note = (out.best_cell && *out.best_cell < out.sup_b)
                          ? "infimum over (sigma, T) cells"
                          : "sup of b";
  return out;
}

std::vector<DecayPair> certificate_family(const Matrix& A, int count) {
  if (!is_hurwitz(A)) throw NotHurwitzError("A is not Hurwitz");
  if (count < 1) throw std::invalid_argument("certificate_family: count must be >= 1");
  const Eigen::Index n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  double lo = 0.0;
  double hi = induced_norm(A) + 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (is_hurwitz(A + mid * I)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  std::vector<DecayPair> family;
  for (int j = 0; j < count; ++j) {
    const double shift = lo * j / count;
    const StabilityCertificate cert = stability_certificate(A + shift * I);
    family.push_back({cert.M, cert.sigma + shift});
  }
  return family;
}

GainReport gain_report(const StateSpaceSystem& sys,
                       const GainReportOptions& options) {
  GainReport report;
  report.n = sys.n();
  report.m = sys.m();
  report.p = sys.p();
  report.certificate = sys.certificate();
  report.flags = structure_flags(sys);

  if (sys.m() != 1) {
    report.lowers.push_back(dc_gain(sys, options.positivity_grid));
    report.notes.push_back(
        "m > 1: reduced report; only the dc lower bound is available for "
        "multi-input systems");
    return report;
  }

  report.positivity = positivity_certificate(sys, options.positivity_grid);
  const GainEstimate dc = dc_gain(sys, options.positivity_grid);
  const GainEstimate sinusoid = psi_lower_bound(
      sys, log_grid(options.omega_min, options.omega_max, options.omega_points),
      options.refine_omega);
  const GainEstimate l1 = l1_impulse_gain(sys, options.tol);
  const GainEstimate onb =
      onb_upper_bound(sys, options.random_bases, options.tol, options.seed);
  const std::vector<double> grid = options.periodic_grid.empty()
                                       ? default_periodic_grid(sys.certificate())
                                       : options.periodic_grid;
  for (double T : grid) {
    report.periodic_curve.emplace_back(T, periodic_bound(sys, T, options.tol));
  }
  const GainEstimate periodic =
      periodic_estimate_from_curve(report.periodic_curve, options.tol);

  report.lowers = {dc, sinusoid};
  report.uppers = {onb, periodic};
  if (sys.p() == 1) {
    report.exact = l1;
  } else {
    report.uppers.insert(report.uppers.begin(), l1);
    if (dc.kind == GainKind::kExact) report.exact = dc;
  }

  const auto slack = [](const GainEstimate& a, const GainEstimate& b) {
    return a.tolerance + b.tolerance + 1e-9 * std::max({1.0, a.value, b.value});
  };
  for (const GainEstimate& lo : report.lowers) {
    for (const GainEstimate& up : report.uppers) {
      if (lo.value > up.value + slack(lo, up)) {
        report.sandwich_ok = false;
        report.notes.push_back("sandwich violated: " + lo.method + " > " + up.method);
      }
    }
    if (report.exact && lo.value > report.exact->value + slack(lo, *report.exact)) {
      report.sandwich_ok = false;
      report.notes.push_back("sandwich violated: " + lo.method + " > exact");
    }
  }
  for (const GainEstimate& up : report.uppers) {
    if (report.exact && up.value < report.exact->value - slack(up, *report.exact)) {
      report.sandwich_ok = false;
      report.notes.push_back("sandwich violated: " + up.method + " < exact");
    }
  }
  return report;
}

}  // namespace gainlab
