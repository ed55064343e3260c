#pragma once

#include <functional>
#include <vector>

#include "gainlab/matcore.hpp"
#include "gainlab/sim.hpp"

namespace gainlab {

/// Predictor feedback with a distributed delay:
///   dy/dt = A y + B z(t - tau) + G u
///   dz/dt = (KB - mu I) z + K (A + mu I) (exp(A tau) y + I(t)),
/// with I(t) the integral of exp(A (t - s)) B z(s) over [t - tau, t].
/// Output is y, disturbance u has p components.
class DelayPredictorSystem {
 public:
  DelayPredictorSystem(Matrix A, Matrix B, Matrix G, Matrix K, double tau,
                       double mu);

  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }
  const Matrix& G() const { return G_; }
  const Matrix& K() const { return K_; }
  double tau() const { return tau_; }
  double mu() const { return mu_; }
  Eigen::Index n() const { return A_.rows(); }
  Eigen::Index m() const { return B_.cols(); }
  Eigen::Index p() const { return G_.cols(); }

  /// Certificate of A + BK.
  const StabilityCertificate& certificate() const { return certificate_; }
  const Matrix& exp_A_tau() const { return exp_A_tau_; }

 private:
  Matrix A_, B_, G_, K_;
  double tau_;
  double mu_;
  StabilityCertificate certificate_;
  Matrix exp_A_tau_;
};

/// y(0) and z sampled at -tau, -tau + h, ..., 0 (tau / h + 1 columns).
struct DelayState {
  Vector y;
  Matrix z_history;  // m x (N + 1)
};

DelayState zero_delay_state(const DelayPredictorSystem& sys, double h);
DelayState sample_delay_state(const DelayPredictorSystem& sys, Vector y0,
                              const std::function<Vector(double)>& z0, double h);
/// History with z(s) = K exp(A tau) y0 + K I(0) on the whole grid, chosen so
/// that the predictor error xi starts at zero (with the trapezoid quadrature).
DelayState consistent_delay_state(const DelayPredictorSystem& sys, Vector y0,
                                  double h);

struct DelayTrajectory {
  std::vector<double> times;  // t_k = k h, k = 0..K
  Matrix y;                   // n x (K + 1)
  Matrix z;                   // m x (N + K + 1); column j + N holds z(j h)
  double h = 0.0;
  Eigen::Index N = 0;
  InputSignal input = InputSignal::zero();

  Vector z_at(Eigen::Index k) const { return z.col(k + N); }
};

/// Fixed-step RK4; the distributed term uses the trapezoid rule on the
/// history grid, with linear interpolation at half steps.
DelayTrajectory simulate_predictor(const DelayPredictorSystem& sys,
                                   const InputSignal& u, const DelayState& state0,
                                   double t_end, double h);

struct XiSeries {
  std::vector<double> times;
  Matrix numeric;      // m x (K + 1), from the simulated (y, z)
  Matrix closed_form;  // m x (K + 1), exp(-mu t) xi(0) - int exp(-mu (t-s)) K exp(A tau) G u
};

XiSeries xi_series(const DelayTrajectory& traj, const DelayPredictorSystem& sys);

/// max_k |xi_numeric(t_k) - xi_closed_form(t_k)|.
double xi_residual(const DelayTrajectory& traj, const DelayPredictorSystem& sys);

struct DelayBoundReport {
  double M = 1.0;
  double sigma = 0.0;
  double G_norm = 0.0;
  double phi_integral = 0.0;  // int_0^tau |BK exp(As) G| ds
  double phi_tau = 0.0;
  double r_integral = 0.0;  // int_0^tau |exp(As) G| ds
  double oag_bound = 0.0;
  double ios_bound = 0.0;
  double quad_tol = 0.0;
};

DelayBoundReport delay_bounds(const DelayPredictorSystem& sys, double quad_tol);

struct DelayEmpiricalEntry {
  double sup_gain = 0.0;
  double asymptotic_gain = 0.0;
};

struct DelayEmpiricalRecord {
  std::vector<DelayEmpiricalEntry> entries;
  double oag_bound = 0.0;
  double tolerance = 0.0;
  double t_end = 0.0;
  double window = 0.0;
  double step = 0.0;
  bool passed = false;
};

/// Zero-state runs of the delay system; passes iff every empirical gain of
/// |y| stays below oag_bound + tolerance.
DelayEmpiricalRecord delay_empirical_check(const DelayPredictorSystem& sys,
                                           const std::vector<InputSignal>& inputs,
                                           double t_end, double window, double h,
                                           double tolerance = 1e-3,
                                           double quad_tol = 1e-10);

}  // namespace gainlab
