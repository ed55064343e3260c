#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "gainlab/gains.hpp"
#include "gainlab/matcore.hpp"

namespace gainlab {

/// Input held on an interval free of discontinuities: either a constant
/// vector or direction * sin(phase + omega * (t - start)).
struct ConstantPiece {
  Vector value;
};
struct SinusoidPiece {
  Vector direction;
  double omega = 0.0;
  double phase = 0.0;  // at the start of the interval
};
using InputPiece = std::variant<ConstantPiece, SinusoidPiece>;

Vector piece_value(const InputPiece& piece, double offset, Eigen::Index m);

class InputSignal {
 public:
  struct Zero {};
  struct Constant {
    Vector value;
  };
  struct Sinusoid {
    Vector direction;  // unit norm
    double omega = 1.0;
    double phase = 0.0;
  };
  struct BangBang {
    BangBangInput profile;
  };
  /// w(t) = base(t mod period) while (t mod period) <= base_length, else 0.
  struct PeriodicExtension {
    std::shared_ptr<const InputSignal> base;
    double base_length = 0.0;
    double period = 0.0;
  };
  using Variant = std::variant<Zero, Constant, Sinusoid, BangBang, PeriodicExtension>;

  static InputSignal zero();
  static InputSignal constant(Vector value);
  static InputSignal sinusoid(Vector direction, double omega, double phase = 0.0);
  static InputSignal bang_bang(BangBangInput profile);
  static InputSignal periodic(InputSignal base, double base_length, double period);

  const Variant& variant() const { return v_; }

  Vector value(double t, Eigen::Index m) const;
  double sup_norm() const;
  /// Smallest period when the signal is periodic with a definite period.
  std::optional<double> natural_period() const;

  /// Discontinuities strictly inside (a, b), ascending.
  std::vector<double> breakpoints(double a, double b) const;
  /// Description valid on [a, b], assuming no breakpoint inside.
  InputPiece piece(double a, double b, Eigen::Index m) const;

 private:
  explicit InputSignal(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

struct Trajectory {
  std::vector<double> times;
  Matrix states;   // n x K, one column per time
  Matrix outputs;  // p x K
  double h = 0.0;
};

struct WorstCaseSpec {
  double T = 0.0;
  double R = 0.0;
  double period = 0.0;
};

struct EmpiricalGains {
  double sup_gain = 0.0;
  double asymptotic_gain = 0.0;
};

struct VerificationOptions {
  double h = 0.01;
  int periods = 12;
  int window_periods = 5;
  double upper_slack = 1e-3;
  double quad_tol = 1e-10;
};

struct VerificationRecord {
  double gamma = 0.0;
  double accuracy = 0.0;
  double T = 0.0;
  double R = 0.0;
  double period = 0.0;
  double V_T = 0.0;
  double sup_gain = 0.0;
  double asymptotic_gain = 0.0;
  double lower_limit = 0.0;
  double upper_limit = 0.0;
  double step = 0.0;
  double t_end = 0.0;
  bool passed = false;
};

/// Exact-discretization simulation on the grid t_k = k h. Held inputs use
/// exp([[A, B], [0, 0]] h); sinusoids are propagated by augmenting the state
/// with a harmonic oscillator. Steps containing input discontinuities are
/// split at them.
Trajectory simulate(const StateSpaceSystem& sys, const InputSignal& input,
                    const Vector& x0, double t_end, double h);

/// Initial state of the unique `period`-periodic solution, from exact
/// propagation over one period. `h` only sets the stepper's cached step.
Vector steady_periodic_state(const StateSpaceSystem& sys,
                             const InputSignal& input, double period, double h);

/// Bang-bang segment for horizon T followed by a rest of length
/// R = ceil(ln(M / rest_tolerance) / sigma), repeated with period T + R.
std::pair<InputSignal, WorstCaseSpec> worst_case_periodic_input(
    const StateSpaceSystem& sys, double T, double rest_tolerance);

/// Zero-state response maxima: over the whole run and over the trailing
/// window [t_end - window, t_end].
EmpiricalGains empirical_gains(const StateSpaceSystem& sys,
                               const InputSignal& input, double t_end,
                               double window, double h);

EmpiricalGains gains_of(const Trajectory& traj, double window);

VerificationRecord verify_gain_equality(const StateSpaceSystem& sys,
                                        double accuracy,
                                        const VerificationOptions& options = {});

}  // namespace gainlab
