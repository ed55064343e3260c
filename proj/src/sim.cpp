#include "gainlab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gainlab/quadrature.hpp"

namespace gainlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Propagates dx/dt = Ax + Bu exactly across one interval for a given piece.
class ExactStepper {
 public:
  ExactStepper(const Matrix& A, const Matrix& B, double h)
      : A_(A), B_(B), h_(h), uniform_(hold_step(A, B, h)) {}

  Vector advance(const Vector& x, const InputPiece& piece, double tau,
                 bool uniform) {
    return std::visit(
        overloaded{
            [&](const ConstantPiece& c) -> Vector {
              if (uniform) return uniform_.Phi * x + uniform_.Gamma * c.value;
              const HoldStep step = hold_step(A_, B_, tau);
              return step.Phi * x + step.Gamma * c.value;
            },
            [&](const SinusoidPiece& s) -> Vector {
              const Matrix& E = oscillator_exp(s, uniform ? h_ : tau, uniform);
              const Eigen::Index n = A_.rows();
              const Eigen::Vector2d w(std::sin(s.phase), std::cos(s.phase));
              return E.topLeftCorner(n, n) * x + E.topRightCorner(n, 2) * w;
            }},
        piece);
  }

 private:
  // exp of [[A, B d e1'], [0, Omega]] tau with Omega = [[0, w], [-w, 0]], whose
  // lower block carries (sin, cos) of the input phase.
  const Matrix& oscillator_exp(const SinusoidPiece& s, double tau, bool uniform) {
    if (uniform && cached_ && cached_omega_ == s.omega &&
        cached_direction_.size() == s.direction.size() &&
        cached_direction_ == s.direction) {
      return cached_exp_;
    }
    const Eigen::Index n = A_.rows();
    Matrix aug = Matrix::Zero(n + 2, n + 2);
    aug.topLeftCorner(n, n) = A_;
    aug.block(0, n, n, 1) = B_ * s.direction;
    aug(n, n + 1) = s.omega;
    aug(n + 1, n) = -s.omega;
    scratch_ = mat_exp(aug, tau);
    if (uniform) {
      cached_ = true;
      cached_omega_ = s.omega;
      cached_direction_ = s.direction;
      cached_exp_ = scratch_;
    }
    return scratch_;
  }

  const Matrix& A_;
  const Matrix& B_;
  double h_;
  HoldStep uniform_;
  bool cached_ = false;
  double cached_omega_ = 0.0;
  Vector cached_direction_;
  Matrix cached_exp_;
  Matrix scratch_;
};

constexpr double kBreakEps = 1e-12;

void push_inside(std::vector<double>& out, double t, double a, double b) {
  const double eps = kBreakEps * std::max({1.0, std::abs(a), std::abs(b)});
  if (t > a + eps && t < b - eps) out.push_back(t);
}

}  // namespace

Vector piece_value(const InputPiece& piece, double offset, Eigen::Index m) {
  return std::visit(
      overloaded{[&](const ConstantPiece& c) -> Vector {
                   return c.value.size() == 0 ? Vector(Vector::Zero(m)) : c.value;
                 },
                 [&](const SinusoidPiece& s) -> Vector {
                   return s.direction * std::sin(s.phase + s.omega * offset);
                 }},
      piece);
}

InputSignal InputSignal::zero() { return InputSignal(Zero{}); }

InputSignal InputSignal::constant(Vector value) {
  if (value.size() == 0 || !value.allFinite()) {
    throw std::invalid_argument("constant input must be a finite non-empty vector");
  }
  return InputSignal(Constant{std::move(value)});
}

InputSignal InputSignal::sinusoid(Vector direction, double omega, double phase) {
  if (!(omega > 0.0)) throw std::invalid_argument("sinusoid: omega must be positive");
  if (direction.size() == 0 || std::abs(direction.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("sinusoid: direction must be a unit vector");
  }
  return InputSignal(Sinusoid{std::move(direction), omega, phase});
}

InputSignal InputSignal::bang_bang(BangBangInput profile) {
  if (!(profile.horizon > 0.0)) {
    throw std::invalid_argument("bang-bang input needs a positive horizon");
  }
  if (!std::is_sorted(profile.switch_times.begin(), profile.switch_times.end())) {
    throw std::invalid_argument("bang-bang switch times must increase");
  }
  return InputSignal(BangBang{std::move(profile)});
}

InputSignal InputSignal::periodic(InputSignal base, double base_length,
                                  double period) {
  if (!(base_length > 0.0) || !(period >= base_length)) {
    throw std::invalid_argument("periodic extension needs 0 < base_length <= period");
  }
  return InputSignal(PeriodicExtension{
      std::make_shared<const InputSignal>(std::move(base)), base_length, period});
}

Vector InputSignal::value(double t, Eigen::Index m) const {
  return std::visit(
      overloaded{
          [&](const Zero&) -> Vector { return Vector::Zero(m); },
          [&](const Constant& c) -> Vector { return c.value; },
          [&](const Sinusoid& s) -> Vector {
            return s.direction * std::sin(s.omega * t + s.phase);
          },
          [&](const BangBang& b) -> Vector {
            return Vector::Constant(1, b.profile.value(t));
          },
          [&](const PeriodicExtension& p) -> Vector {
            const double local = t - p.period * std::floor(t / p.period);
            if (local > p.base_length) return Vector::Zero(m);
            return p.base->value(local, m);
          }},
      v_);
}

double InputSignal::sup_norm() const {
  return std::visit(
      overloaded{[](const Zero&) { return 0.0; },
                 [](const Constant& c) { return c.value.norm(); },
                 [](const Sinusoid& s) { return s.direction.norm(); },
                 [](const BangBang& b) {
                   return b.profile.initial_sign == 0 ? 0.0 : 1.0;
                 },
                 [](const PeriodicExtension& p) { return p.base->sup_norm(); }},
      v_);
}

std::optional<double> InputSignal::natural_period() const {
  if (const auto* s = std::get_if<Sinusoid>(&v_)) return 2.0 * M_PI / s->omega;
  if (const auto* p = std::get_if<PeriodicExtension>(&v_)) return p->period;
  return std::nullopt;
}

std::vector<double> InputSignal::breakpoints(double a, double b) const {
  std::vector<double> out;
  if (const auto* bb = std::get_if<BangBang>(&v_)) {
    if (bb->profile.initial_sign != 0) {
      for (double s : bb->profile.switch_times) push_inside(out, s, a, b);
      push_inside(out, bb->profile.horizon, a, b);
    }
  } else if (const auto* p = std::get_if<PeriodicExtension>(&v_)) {
    const auto first = static_cast<long long>(std::floor(a / p->period));
    const auto last = static_cast<long long>(std::floor(b / p->period));
    for (long long k = first; k <= last; ++k) {
      const double offset = static_cast<double>(k) * p->period;
      push_inside(out, offset, a, b);
      push_inside(out, offset + p->base_length, a, b);
      const double lo = std::max(a - offset, 0.0);
      const double hi = std::min(b - offset, p->base_length);
      if (hi > lo) {
        for (double t : p->base->breakpoints(lo, hi)) {
          push_inside(out, t + offset, a, b);
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

InputPiece InputSignal::piece(double a, double b, Eigen::Index m) const {
  const double mid = 0.5 * (a + b);
  return std::visit(
      overloaded{
          [&](const Zero&) -> InputPiece { return ConstantPiece{Vector::Zero(m)}; },
          [&](const Constant& c) -> InputPiece { return ConstantPiece{c.value}; },
          [&](const Sinusoid& s) -> InputPiece {
            return SinusoidPiece{s.direction, s.omega, s.phase + s.omega * a};
          },
          [&](const BangBang& bb) -> InputPiece {
            return ConstantPiece{Vector::Constant(1, bb.profile.value(mid))};
          },
          [&](const PeriodicExtension& p) -> InputPiece {
            const double offset = p.period * std::floor(mid / p.period);
            if (mid - offset > p.base_length) return ConstantPiece{Vector::Zero(m)};
            return p.base->piece(a - offset, b - offset, m);
          }},
      v_);
}

Trajectory simulate(const StateSpaceSystem& sys, const InputSignal& input,
                    const Vector& x0, double t_end, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("simulate: step h must be positive");
  if (!(t_end >= h)) throw std::invalid_argument("simulate: t_end must be >= h");
  if (x0.size() != sys.n()) throw std::invalid_argument("simulate: x0 has wrong size");
  const Eigen::Index n = sys.n();
  const Eigen::Index m = sys.m();
  const auto steps = static_cast<Eigen::Index>(std::floor(t_end / h + 1e-9));

  Trajectory traj;
  traj.h = h;
  traj.times.resize(static_cast<std::size_t>(steps) + 1);
  traj.states.resize(n, steps + 1);
  traj.states.col(0) = x0;
  traj.times[0] = 0.0;

  ExactStepper stepper(sys.A(), sys.B(), h);
  Vector x = x0;
  for (Eigen::Index k = 0; k < steps; ++k) {
    const double a = static_cast<double>(k) * h;
    const double b = static_cast<double>(k + 1) * h;
    const std::vector<double> cuts = input.breakpoints(a, b);
    if (cuts.empty()) {
      x = stepper.advance(x, input.piece(a, b, m), h, true);
    } else {
      double t = a;
      for (std::size_t j = 0; j <= cuts.size(); ++j) {
        const double next = j < cuts.size() ? cuts[j] : b;
        x = stepper.advance(x, input.piece(t, next, m), next - t, false);
        t = next;
      }
    }
    if (!x.allFinite()) {
      std::ostringstream msg;
      msg << "simulate: non-finite state at t = " << b;
      throw Error(msg.str());
    }
    traj.states.col(k + 1) = x;
    traj.times[static_cast<std::size_t>(k) + 1] = b;
  }
  traj.outputs = sys.C() * traj.states;
  return traj;
}

Vector steady_periodic_state(const StateSpaceSystem& sys,
                             const InputSignal& input, double period, double h) {
  if (!(period > 0.0)) throw std::invalid_argument("steady_periodic_state: period must be positive");
  if (!(h > 0.0)) throw std::invalid_argument("steady_periodic_state: h must be positive");
  if (const auto natural = input.natural_period()) {
    const double ratio = period / *natural;
    if (std::round(ratio) < 1.0 ||
        std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
      throw std::invalid_argument(
          "steady_periodic_state: period is not a multiple of the input period");
    }
  }
  const Matrix& A = sys.A();
  const Eigen::Index n = sys.n();
  const Eigen::Index m = sys.m();

  std::vector<double> cuts{0.0};
  const std::vector<double> inner = input.breakpoints(0.0, period);
  cuts.insert(cuts.end(), inner.begin(), inner.end());
  cuts.push_back(period);

  // Zero-state response over one period, propagated exactly segment by
  // segment; the periodic orbit then solves x0 = exp(A period) x0 + d.
  ExactStepper stepper(A, sys.B(), h);
  Vector d = Vector::Zero(n);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    d = stepper.advance(d, input.piece(cuts[k], cuts[k + 1], m), cuts[k + 1] - cuts[k], false);
  }
  const Matrix shifted = Matrix::Identity(n, n) - mat_exp(A, period);
  return shifted.partialPivLu().solve(d);
}

std::pair<InputSignal, WorstCaseSpec> worst_case_periodic_input(
    const StateSpaceSystem& sys, double T, double rest_tolerance) {
  if (!(rest_tolerance > 0.0)) {
    throw std::invalid_argument("worst_case_periodic_input: rest_tolerance must be positive");
  }
  const BangBangInput bang = bang_bang_switches(sys, T);
  const StabilityCertificate& cert = sys.certificate();
  WorstCaseSpec spec;
  spec.T = T;
  spec.R = cert.M > rest_tolerance
               ? std::ceil(std::log(cert.M / rest_tolerance) / cert.sigma)
               : 0.0;
  spec.period = T + spec.R;

  InputSignal segment = InputSignal::zero();
  if (bang.initial_sign != 0 && bang.switch_times.empty()) {
    segment = InputSignal::constant(Vector::Constant(1, bang.initial_sign));
  } else if (bang.initial_sign != 0) {
    segment = InputSignal::bang_bang(bang);
  }
  return {InputSignal::periodic(std::move(segment), T, spec.period), spec};
}

EmpiricalGains gains_of(const Trajectory& traj, double window) {
  EmpiricalGains g;
  const double t_end = traj.times.back();
  const double start = t_end - window - 1e-9 * std::max(1.0, t_end);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const double y = traj.outputs.col(static_cast<Eigen::Index>(k)).norm();
    g.sup_gain = std::max(g.sup_gain, y);
    if (traj.times[k] >= start) g.asymptotic_gain = std::max(g.asymptotic_gain, y);
  }
  return g;
}

EmpiricalGains empirical_gains(const StateSpaceSystem& sys,
                               const InputSignal& input, double t_end,
                               double window, double h) {
  if (!(window > 0.0) || !(window < t_end)) {
    throw std::invalid_argument("empirical_gains: need 0 < window < t_end");
  }
  const Trajectory traj = simulate(sys, input, Vector::Zero(sys.n()), t_end, h);
  return gains_of(traj, window);
}

VerificationRecord verify_gain_equality(const StateSpaceSystem& sys,
                                        double accuracy,
                                        const VerificationOptions& options) {
  if (!sys.is_siso()) {
    throw std::invalid_argument("verify_gain_equality requires a SISO system");
  }
  if (!(accuracy > 0.0 && accuracy < 1.0)) {
    throw std::invalid_argument("verify_gain_equality: accuracy must lie in (0, 1)");
  }
  const double h = options.h;
  VerificationRecord rec;
  rec.accuracy = accuracy;
  rec.step = h;
  rec.gamma = l1_impulse_gain(sys, options.quad_tol).value;

  // Smallest grid horizon with V(T) >= (1 - accuracy / 2) gamma; the grid
  // spacing is a multiple of h so that T + k (T + R) lands on sample times.
  const double target = (1.0 - 0.5 * accuracy) * rec.gamma;
  const double spacing = h * std::max(1.0, std::ceil(0.25 / h));
  const double limit = tail_horizon(sys.certificate(),
                                    induced_norm(sys.C()) * induced_norm(sys.B()),
                                    0.25 * accuracy * std::max(rec.gamma, 1e-300)) +
                       spacing;
  double V = 0.0;
  double T = 0.0;
  for (long long j = 1; V < target; ++j) {
    const double next = static_cast<double>(j) * spacing;
    V += integrate_kernel_norm(sys.A(), sys.C(), sys.B(), T, next,
                               options.quad_tol);
    T = next;
    if (T > limit + spacing) break;
  }
  rec.T = T;
  rec.V_T = V;

  const auto [input, spec] = worst_case_periodic_input(sys, T, 0.5 * accuracy);
  rec.R = spec.R;
  rec.period = spec.period;
  rec.t_end = options.periods * spec.period;
  const Trajectory traj =
      simulate(sys, input, Vector::Zero(sys.n()), rec.t_end, h);
  const EmpiricalGains g = gains_of(traj, options.window_periods * spec.period);
  rec.sup_gain = g.sup_gain;
  rec.asymptotic_gain = g.asymptotic_gain;
  rec.lower_limit = (1.0 - accuracy) * rec.gamma;
  rec.upper_limit = rec.gamma * (1.0 + options.upper_slack);
  rec.passed = rec.asymptotic_gain >= rec.lower_limit &&
               rec.asymptotic_gain <= rec.upper_limit &&
               rec.sup_gain <= rec.upper_limit;
  return rec;
}

}  // namespace gainlab
