#include "gainlab/delaylab.hpp"

#include <cmath>
#include <sstream>

#include "gainlab/quadrature.hpp"

namespace gainlab {

namespace {

Eigen::Index history_steps(double tau, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("delay step h must be positive");
  const double ratio = tau / h;
  const double N = std::round(ratio);
  if (N < 1.0 || std::abs(N * h - tau) > 1e-9 * tau) {
    throw std::invalid_argument("delay step h must divide tau");
  }
  return static_cast<Eigen::Index>(N);
}

// E_j = exp(A j h) B for j = 0..N.
std::vector<Matrix> history_kernels(const Matrix& A, const Matrix& B, double h,
                                    Eigen::Index N) {
  std::vector<Matrix> E;
  E.reserve(static_cast<std::size_t>(N) + 1);
  E.push_back(B);
  const Matrix step = mat_exp(A, h);
  for (Eigen::Index j = 1; j <= N; ++j) E.push_back(step * E.back());
  return E;
}

// Trapezoid sum h * (E_0 z_0 / 2 + E_1 z_1 + ... + E_N z_N / 2), z_j = z(t - j h).
template <class ZAt>
Vector trapezoid(const std::vector<Matrix>& E, double h, ZAt&& z_at) {
  const auto N = static_cast<Eigen::Index>(E.size()) - 1;
  Vector acc = 0.5 * (E[0] * z_at(0));
  for (Eigen::Index j = 1; j < N; ++j) acc += E[static_cast<std::size_t>(j)] * z_at(j);
  acc += 0.5 * (E[static_cast<std::size_t>(N)] * z_at(N));
  return h * acc;
}

}  // namespace

DelayPredictorSystem::DelayPredictorSystem(Matrix A, Matrix B, Matrix G,
                                           Matrix K, double tau, double mu)
    : A_(std::move(A)), B_(std::move(B)), G_(std::move(G)), K_(std::move(K)),
      tau_(tau), mu_(mu) {
  const Eigen::Index n = A_.rows();
  if (n == 0 || A_.cols() != n) throw std::invalid_argument("A must be square and non-empty");
  if (B_.rows() != n || B_.cols() == 0) throw std::invalid_argument("B must have n rows");
  if (G_.rows() != n || G_.cols() == 0) throw std::invalid_argument("G must have n rows");
  if (K_.rows() != B_.cols() || K_.cols() != n) {
    throw std::invalid_argument("K must be m x n");
  }
  require_finite(A_, "A");
  require_finite(B_, "B");
  require_finite(G_, "G");
  require_finite(K_, "K");
  if (!std::isfinite(tau_) || !(tau_ > 0.0)) throw std::invalid_argument("tau must be positive");
  if (!std::isfinite(mu_) || !(mu_ > 0.0)) throw std::invalid_argument("mu must be positive");
  const Matrix closed = A_ + B_ * K_;
  if (!is_hurwitz(closed)) {
    throw NotHurwitzError("A + BK is not Hurwitz (Lyapunov certificate failed)");
  }
  certificate_ = stability_certificate(closed);
  exp_A_tau_ = mat_exp(A_, tau_);
}

DelayState zero_delay_state(const DelayPredictorSystem& sys, double h) {
  const Eigen::Index N = history_steps(sys.tau(), h);
  return {Vector::Zero(sys.n()), Matrix::Zero(sys.m(), N + 1)};
}

DelayState sample_delay_state(const DelayPredictorSystem& sys, Vector y0,
                              const std::function<Vector(double)>& z0, double h) {
  const Eigen::Index N = history_steps(sys.tau(), h);
  if (y0.size() != sys.n()) throw std::invalid_argument("y0 has wrong size");
  DelayState s{std::move(y0), Matrix(sys.m(), N + 1)};
  for (Eigen::Index j = 0; j <= N; ++j) {
    const Vector z = z0(-sys.tau() + static_cast<double>(j) * h);
    if (z.size() != sys.m()) throw std::invalid_argument("z0 returned wrong size");
    s.z_history.col(j) = z;
  }
  return s;
}

DelayState consistent_delay_state(const DelayPredictorSystem& sys, Vector y0,
                                  double h) {
  const Eigen::Index N = history_steps(sys.tau(), h);
  if (y0.size() != sys.n()) throw std::invalid_argument("y0 has wrong size");
  const std::vector<Matrix> E = history_kernels(sys.A(), sys.B(), h, N);
  Matrix S = 0.5 * (E.front() + E.back());
  for (Eigen::Index j = 1; j < N; ++j) S += E[static_cast<std::size_t>(j)];
  S *= h;
  const Eigen::Index m = sys.m();
  const Matrix lhs = Matrix::Identity(m, m) - sys.K() * S;
  Eigen::FullPivLU<Matrix> lu(lhs);
  if (!lu.isInvertible()) {
    throw SingularError("no constant history makes the predictor error vanish");
  }
  const Vector c = lu.solve(sys.K() * sys.exp_A_tau() * y0);
  return {std::move(y0), c.replicate(1, N + 1)};
}

DelayTrajectory simulate_predictor(const DelayPredictorSystem& sys,
                                   const InputSignal& u, const DelayState& state0,
                                   double t_end, double h) {
  const Eigen::Index N = history_steps(sys.tau(), h);
  if (!(t_end >= h)) throw std::invalid_argument("simulate_predictor: t_end must be >= h");
  if (state0.y.size() != sys.n() || state0.z_history.rows() != sys.m() ||
      state0.z_history.cols() != N + 1) {
    throw std::invalid_argument("delay state does not match the system and step");
  }
  const Eigen::Index n = sys.n();
  const Eigen::Index m = sys.m();
  const Eigen::Index p = sys.p();
  const auto steps = static_cast<Eigen::Index>(std::floor(t_end / h + 1e-9));

  const std::vector<Matrix> E = history_kernels(sys.A(), sys.B(), h, N);
  const Matrix Az = sys.K() * sys.B() - sys.mu() * Matrix::Identity(m, m);
  const Matrix Kp = sys.K() * (sys.A() + sys.mu() * Matrix::Identity(n, n));
  const Matrix& eAt = sys.exp_A_tau();

  DelayTrajectory traj;
  traj.h = h;
  traj.N = N;
  traj.input = u;
  traj.times.resize(static_cast<std::size_t>(steps) + 1);
  traj.y.resize(n, steps + 1);
  traj.z.resize(m, N + steps + 1);
  traj.z.leftCols(N + 1) = state0.z_history;
  traj.y.col(0) = state0.y;
  traj.times[0] = 0.0;

  auto hist = [&](Eigen::Index idx) { return traj.z.col(idx + N); };

  for (Eigen::Index k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * h;
    // stage offsets: 0 -> grid k, 1 -> half step (interpolated), 2 -> grid k + 1
    auto rhs = [&](int where, const Vector& Y, const Vector& Z, Vector& dY,
                   Vector& dZ) {
      auto z_back = [&](Eigen::Index j) -> Vector {
        if (j == 0) return Z;
        if (where == 0) return hist(k - j);
        if (where == 2) return hist(k + 1 - j);
        return 0.5 * (hist(k - j) + hist(k - j + 1));
      };
      const Vector I = trapezoid(E, h, z_back);
      const double ts = t + 0.5 * h * where;
      dY = sys.A() * Y + sys.B() * z_back(N) + sys.G() * u.value(ts, p);
      dZ = Az * Z + Kp * (eAt * Y + I);
    };
    const Vector y0 = traj.y.col(k);
    const Vector z0 = hist(k);
    Vector k1y, k1z, k2y, k2z, k3y, k3z, k4y, k4z;
    rhs(0, y0, z0, k1y, k1z);
    rhs(1, y0 + 0.5 * h * k1y, z0 + 0.5 * h * k1z, k2y, k2z);
    rhs(1, y0 + 0.5 * h * k2y, z0 + 0.5 * h * k2z, k3y, k3z);
    rhs(2, y0 + h * k3y, z0 + h * k3z, k4y, k4z);
    const Vector y1 = y0 + (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    const Vector z1 = z0 + (h / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
    if (!y1.allFinite() || !z1.allFinite()) {
      std::ostringstream msg;
      msg << "simulate_predictor: non-finite state at t = " << t + h;
      throw Error(msg.str());
    }
    traj.y.col(k + 1) = y1;
    traj.z.col(k + 1 + N) = z1;
    traj.times[static_cast<std::size_t>(k) + 1] = static_cast<double>(k + 1) * h;
  }
  return traj;
}

XiSeries xi_series(const DelayTrajectory& traj, const DelayPredictorSystem& sys) {
  const Eigen::Index m = sys.m();
  const auto count = static_cast<Eigen::Index>(traj.times.size());
  const std::vector<Matrix> E = history_kernels(sys.A(), sys.B(), traj.h, traj.N);
  const Matrix KeAt = sys.K() * sys.exp_A_tau();

  XiSeries xi;
  xi.times = traj.times;
  xi.numeric.resize(m, count);
  for (Eigen::Index k = 0; k < count; ++k) {
    const Vector I =
        trapezoid(E, traj.h, [&](Eigen::Index j) { return traj.z_at(k - j); });
    xi.numeric.col(k) = traj.z_at(k) - KeAt * traj.y.col(k) - sys.K() * I;
  }

  if (count == 1) {
    xi.closed_form = xi.numeric;
    return xi;
  }
  // d xi / dt = -mu xi - K exp(A tau) G u, propagated exactly.
  const StateSpaceSystem filter(-sys.mu() * Matrix::Identity(m, m),
                                -KeAt * sys.G(), Matrix::Identity(m, m));
  const Trajectory cf =
      simulate(filter, traj.input, xi.numeric.col(0), traj.times.back(), traj.h);
  xi.closed_form = cf.outputs.leftCols(count);
  return xi;
}

double xi_residual(const DelayTrajectory& traj, const DelayPredictorSystem& sys) {
  const XiSeries xi = xi_series(traj, sys);
  return (xi.numeric - xi.closed_form).colwise().norm().maxCoeff();
}

DelayBoundReport delay_bounds(const DelayPredictorSystem& sys, double quad_tol) {
  if (!(quad_tol > 0.0)) throw std::invalid_argument("delay_bounds: quad_tol must be positive");
  DelayBoundReport r;
  r.M = sys.certificate().M;
  r.sigma = sys.certificate().sigma;
  r.quad_tol = quad_tol;
  const Matrix BK = sys.B() * sys.K();
  const Eigen::Index n = sys.n();
  r.G_norm = induced_norm(sys.G());
  r.phi_integral = integrate_kernel_norm(sys.A(), BK, sys.G(), 0.0, sys.tau(), quad_tol);
  r.phi_tau = induced_norm(BK * sys.exp_A_tau() * sys.G());
  r.r_integral = integrate_kernel_norm(sys.A(), Matrix::Identity(n, n), sys.G(), 0.0,
                                       sys.tau(), quad_tol);
  r.oag_bound = r.M / r.sigma * (r.G_norm + r.phi_integral + r.phi_tau / sys.mu());
  r.ios_bound = r.oag_bound + r.M * r.r_integral;
  return r;
}

DelayEmpiricalRecord delay_empirical_check(const DelayPredictorSystem& sys,
                                           const std::vector<InputSignal>& inputs,
                                           double t_end, double window, double h,
                                           double tolerance, double quad_tol) {
  if (!(window > 0.0) || !(window < t_end)) {
    throw std::invalid_argument("delay_empirical_check: need 0 < window < t_end");
  }
  DelayEmpiricalRecord rec;
  rec.oag_bound = delay_bounds(sys, quad_tol).oag_bound;
  rec.tolerance = tolerance;
  rec.t_end = t_end;
  rec.window = window;
  rec.step = h;
  rec.passed = true;
  const DelayState zero = zero_delay_state(sys, h);
  for (const InputSignal& u : inputs) {
    const DelayTrajectory traj = simulate_predictor(sys, u, zero, t_end, h);
    const double start = traj.times.back() - window - 1e-9 * std::max(1.0, t_end);
    DelayEmpiricalEntry e;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      const double y = traj.y.col(static_cast<Eigen::Index>(k)).norm();
      e.sup_gain = std::max(e.sup_gain, y);
      if (traj.times[k] >= start) e.asymptotic_gain = std::max(e.asymptotic_gain, y);
    }
    if (e.sup_gain > rec.oag_bound + tolerance) rec.passed = false;
    rec.entries.push_back(e);
  }
  return rec;
}

}  // namespace gainlab
