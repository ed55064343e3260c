#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gainlab/matcore.hpp"

namespace gainlab {

enum class GainKind { kExact, kLower, kUpper, kEstimate };

std::string to_string(GainKind kind);

/// One value bracketing the minimum IOS-gain, tagged with how it was
/// obtained. `method` is one of: l1-impulse, dc, sinusoid, onb, periodic,
/// theorem41, v-sup.
struct GainEstimate {
  double value = 0.0;
  GainKind kind = GainKind::kEstimate;
  std::string method;
  double tolerance = 0.0;
  std::string note;
};

enum class PositivityCertificate { kNone, kMetzlerNonneg, kAssumptionH, kGridVerified };

std::string to_string(PositivityCertificate tag);

/// u(s) = initial_sign on (0, switch_times[0]), flipping sign at every
/// switch, on [0, horizon]. initial_sign == 0 marks an identically zero
/// kernel (zero input).
struct BangBangInput {
  double horizon = 0.0;
  std::vector<double> switch_times;
  int initial_sign = 1;

  double value(double s) const;
};

struct VCurve {
  std::vector<double> horizons;
  std::vector<double> values;
  std::vector<Vector> directions;
};

struct VResult {
  double value = 0.0;
  Vector direction;
  GainKind kind = GainKind::kExact;
};

struct VOptions {
  int restarts = 8;
  double tol = 1e-9;
  std::uint64_t seed = 0;
  int max_iterations = 100;
  /// Run the re-linearization ascent even when the SISO closed form applies.
  bool force_ascent = false;
};

struct DecayPair {
  double M = 1.0;
  double sigma = 1.0;
};

struct Theorem41Input {
  std::vector<DecayPair> certificates;
  std::vector<double> b_times;   // t_0 = 0 < t_1 < ...
  std::vector<double> b_values;  // non-decreasing
  std::vector<double> T_grid;
};

struct Theorem41Cell {
  DecayPair certificate;
  double T = 0.0;
  double value = 0.0;
};

struct Theorem41Result {
  GainEstimate estimate;
  std::vector<Theorem41Cell> cells;  // evaluated (sigma, T) pairs
  std::vector<Theorem41Cell> skipped;  // T <= ln(M) / sigma
  double sup_b = 0.0;
  std::optional<double> best_cell;
};

struct GainReportOptions {
  double tol = 1e-8;
  std::uint64_t seed = 0;
  double omega_min = 1e-3;
  double omega_max = 1e3;
  int omega_points = 200;
  bool refine_omega = true;
  int random_bases = 4;
  int positivity_grid = 64;
  std::vector<double> periodic_grid;  // empty: {2^k / sigma : k = -2..6}
};

struct GainReport {
  Eigen::Index n = 0, m = 0, p = 0;
  StabilityCertificate certificate;
  StructureFlags flags;
  PositivityCertificate positivity = PositivityCertificate::kNone;
  std::optional<GainEstimate> exact;
  std::vector<GainEstimate> lowers;
  std::vector<GainEstimate> uppers;
  std::vector<std::pair<double, double>> periodic_curve;  // (T, W(T))
  bool sandwich_ok = true;
  std::vector<std::string> notes;
};

/// Integral of |C exp(As) B| over [0, inf): exact minimum gain for SISO
/// systems, an upper bound when p > 1.
GainEstimate l1_impulse_gain(const StateSpaceSystem& sys, double tol);

/// |C A^-1 B|; the minimum gain when a positivity certificate exists.
GainEstimate dc_gain(const StateSpaceSystem& sys, int positivity_grid = 64);

PositivityCertificate positivity_certificate(const StateSpaceSystem& sys,
                                             int grid_n = 64);

/// V(T) = sup |C x(T)| over inputs with |u| <= 1.
VResult v_of_t(const StateSpaceSystem& sys, double T,
               const VOptions& options = {});

/// V on an increasing set of horizons. SISO curves are accumulated interval
/// by interval and are non-decreasing by construction.
VCurve v_curve(const StateSpaceSystem& sys, std::vector<double> horizons,
               const VOptions& options = {});

BangBangInput bang_bang_switches(const StateSpaceSystem& sys, double T,
                                 int samples = 4096);

/// Amplitude of the periodic output under u = sin(omega t).
double psi(const StateSpaceSystem& sys, double omega);

GainEstimate psi_lower_bound(const StateSpaceSystem& sys,
                             const std::vector<double>& omegas, bool refine);

/// Log-spaced frequencies, endpoints included.
std::vector<double> log_grid(double lo, double hi, int points);

GainEstimate onb_upper_bound(const StateSpaceSystem& sys, int random_bases,
                             double tol, std::uint64_t seed = 0);

/// W(T) = integral over [0, T] of |C (exp(AT) - I)^-1 exp(As) B|.
double periodic_bound(const StateSpaceSystem& sys, double T, double tol);

std::vector<double> default_periodic_grid(const StabilityCertificate& cert);

GainEstimate periodic_upper_estimate(const StateSpaceSystem& sys,
                                     const std::vector<double>& T_grid,
                                     double tol = 1e-10);

Theorem41Result theorem41_bound(const Theorem41Input& input);

/// Decay pairs from Lyapunov certificates of A + sI for `count` shifts s in
/// [0, s_max), where A + s_max I is marginally stable. Each certificate of
/// A + sI with rate sigma yields the pair (M, sigma + s) for A.
std::vector<DecayPair> certificate_family(const Matrix& A, int count);

GainReport gain_report(const StateSpaceSystem& sys,
                       const GainReportOptions& options = {});

}  // namespace gainlab
