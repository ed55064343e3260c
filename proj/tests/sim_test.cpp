#include "gainlab/sim.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "gainlab/gains.hpp"
#include "test_systems.hpp"

namespace gainlab {
namespace {

using testing::metzler_system;
using testing::oscillator_system;
using testing::scalar_system;

Vector unit(double v = 1.0) { return Vector::Constant(1, v); }

TEST(InputSignalTest, Values) {
  EXPECT_EQ(InputSignal::zero().value(3.0, 2), Vector::Zero(2));
  EXPECT_EQ(InputSignal::constant(unit(0.5)).value(9.0, 1)(0), 0.5);
  const InputSignal s = InputSignal::sinusoid(unit(), 2.0, 0.3);
  EXPECT_NEAR(s.value(1.1, 1)(0), std::sin(2.2 + 0.3), 1e-15);
  EXPECT_EQ(s.natural_period().value(), M_PI);
  EXPECT_THROW(InputSignal::sinusoid(unit(2.0), 1.0), std::invalid_argument);
  EXPECT_THROW(InputSignal::sinusoid(unit(), 0.0), std::invalid_argument);
}

TEST(InputSignalTest, PeriodicExtensionSampling) {
  BangBangInput b{2.0, {0.5}, 1};
  const InputSignal w = InputSignal::periodic(InputSignal::bang_bang(b), 2.0, 3.0);
  // w(t) = base(t - 3 floor(t / 3)), zero on (2, 3]
  for (double t : {0.2, 0.7, 2.5, 3.2, 3.7, 5.5, 6.1, 10.0}) {
    const double local = t - 3.0 * std::floor(t / 3.0);
    const double expected = local > 2.0 ? 0.0 : b.value(local);
    EXPECT_EQ(w.value(t, 1)(0), expected) << "t = " << t;
  }
  EXPECT_EQ(w.natural_period().value(), 3.0);
  EXPECT_EQ(w.sup_norm(), 1.0);
  const auto cuts = w.breakpoints(0.0, 7.0);
  const std::vector<double> expected{0.5, 2.0, 3.0, 3.5, 5.0, 6.0, 6.5};
  ASSERT_EQ(cuts.size(), expected.size());
  for (std::size_t i = 0; i < cuts.size(); ++i) EXPECT_NEAR(cuts[i], expected[i], 1e-15);
}

TEST(SimulateTest, ZeroInputIsHomogeneousSolution) {
  const StateSpaceSystem sys = oscillator_system();
  Vector x0(2);
  x0 << 1.0, -0.5;
  const Trajectory traj = simulate(sys, InputSignal::zero(), x0, 10.0, 0.01);
  ASSERT_EQ(traj.times.size(), 1001u);
  EXPECT_EQ(traj.states.col(0), x0);
  for (Eigen::Index k = 0; k < 1001; k += 50) {
    const Vector expected = mat_exp(sys.A(), traj.times[static_cast<std::size_t>(k)]) * x0;
    EXPECT_LE((traj.states.col(k) - expected).norm(), 1e-10);
  }
}

TEST(SimulateTest, ScalarStepResponse) {
  const Trajectory traj = simulate(scalar_system(), InputSignal::constant(unit()),
                                   Vector::Zero(1), 5.0, 0.05);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    EXPECT_NEAR(traj.states(0, static_cast<Eigen::Index>(k)), 1.0 - std::exp(-traj.times[k]),
                1e-10);
  }
}

TEST(SimulateTest, ScalarSinusoidExact) {
  // x' = -x + sin(w t), x(0) = 0:
  // x = (sin(wt) - w cos(wt) + w e^-t) / (1 + w^2)
  const double w = 3.0;
  const Trajectory traj = simulate(scalar_system(), InputSignal::sinusoid(unit(), w),
                                   Vector::Zero(1), 8.0, 0.1);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const double t = traj.times[k];
    const double oracle = (std::sin(w * t) - w * std::cos(w * t) + w * std::exp(-t)) / (1 + w * w);
    EXPECT_NEAR(traj.outputs(0, static_cast<Eigen::Index>(k)), oracle, 1e-12);
  }
}

TEST(SimulateTest, Superposition) {
  const StateSpaceSystem sys = oscillator_system();
  Vector x1(2), x2(2);
  x1 << 1, 0;
  x2 << -0.3, 2;
  const double lam = 0.7, mu = -1.8;
  auto run = [&](const Vector& x0, const InputSignal& u) {
    return simulate(sys, u, x0, 12.0, 0.01).states;
  };
  const Matrix combined =
      run(lam * x1 + mu * x2, InputSignal::constant(unit(lam * 0.4 + mu * -1.5)));
  const Matrix separate = lam * run(x1, InputSignal::constant(unit(0.4))) +
                          mu * run(x2, InputSignal::constant(unit(-1.5)));
  EXPECT_LE((combined - separate).cwiseAbs().maxCoeff(), 1e-9);

  // zero-input plus zero-state response
  const InputSignal sine = InputSignal::sinusoid(unit(), 1.3, 0.4);
  const Matrix full = run(x1, sine);
  const Matrix split = run(x1, InputSignal::zero()) + run(Vector::Zero(2), sine);
  EXPECT_LE((full - split).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(SimulateTest, HalvingStepChangesNothingForHeldInputs) {
  const StateSpaceSystem sys = oscillator_system();
  const BangBangInput u = bang_bang_switches(sys, 10.0);
  const InputSignal w = InputSignal::bang_bang(u);
  const Trajectory coarse = simulate(sys, w, Vector::Zero(2), 10.0, 0.02);
  const Trajectory fine = simulate(sys, w, Vector::Zero(2), 10.0, 0.01);
  for (Eigen::Index k = 0; k < coarse.states.cols(); ++k) {
    EXPECT_LE((coarse.states.col(k) - fine.states.col(2 * k)).norm(), 1e-12);
  }
}

TEST(SimulateTest, DecayEnvelope) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const StateSpaceSystem sys = testing::random_siso(rng, 1 + trial % 5);
    const Vector x0 = testing::uniform_matrix(rng, sys.n(), 1, -1, 1);
    const Trajectory traj = simulate(sys, InputSignal::zero(), x0, 10.0, 0.05);
    const StabilityCertificate& c = sys.certificate();
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      EXPECT_LE(traj.states.col(static_cast<Eigen::Index>(k)).norm(),
                c.M * std::exp(-c.sigma * traj.times[k]) * x0.norm() * (1 + 1e-8));
    }
  }
}

TEST(SimulateTest, Preconditions) {
  EXPECT_THROW(simulate(scalar_system(), InputSignal::zero(), Vector::Zero(1), 1.0, 0.0),
               std::invalid_argument);
  EXPECT_THROW(simulate(scalar_system(), InputSignal::zero(), Vector::Zero(1), 0.01, 0.1),
               std::invalid_argument);
  EXPECT_THROW(simulate(scalar_system(), InputSignal::zero(), Vector::Zero(2), 1.0, 0.1),
               std::invalid_argument);
}

TEST(SteadyStateTest, ConstantInput) {
  const StateSpaceSystem sys = metzler_system();
  const Vector x = steady_periodic_state(sys, InputSignal::constant(unit()), 2.0, 0.01);
  const Vector expected = -sys.A().partialPivLu().solve(sys.B());
  EXPECT_LE((x - expected).norm(), 1e-10);
  EXPECT_NEAR((sys.C() * x).norm(), dc_gain(sys).value, 1e-10);
  EXPECT_LE(steady_periodic_state(sys, InputSignal::zero(), 2.0, 0.01).norm(), 1e-15);
}

TEST(SteadyStateTest, ScalarSinusoidAmplitude) {
  const StateSpaceSystem sys = scalar_system();
  const InputSignal u = InputSignal::sinusoid(unit(), 1.0);
  const Vector x0 = steady_periodic_state(sys, u, 2.0 * M_PI, 0.001);
  // steady solution (sin t - cos t) / 2 starts at -1/2
  EXPECT_NEAR(x0(0), -0.5, 1e-10);
  const Trajectory traj = simulate(sys, u, x0, 2.0 * M_PI, 2.0 * M_PI / 6000.0);
  EXPECT_NEAR(traj.outputs.cwiseAbs().maxCoeff(), psi(sys, 1.0), 1e-6);
  EXPECT_NEAR(traj.states(0, traj.states.cols() - 1), x0(0), 1e-9);
  EXPECT_THROW(steady_periodic_state(sys, u, 1.0, 0.01), std::invalid_argument);
}

TEST(SteadyStateTest, OrbitAttractsExponentially) {
  const StateSpaceSystem sys = oscillator_system();
  const auto [u, spec] = worst_case_periodic_input(sys, 6.0, 1e-3);
  const Vector xs = steady_periodic_state(sys, u, spec.period, 0.01);
  Vector x0(2);
  x0 << 2.0, -1.0;
  const Trajectory traj = simulate(sys, u, x0, 4.0 * spec.period, 0.01);
  const StabilityCertificate& c = sys.certificate();
  const auto per = static_cast<Eigen::Index>(std::lround(spec.period / 0.01));
  for (int k = 0; k <= 4; ++k) {
    const double t = k * spec.period;
    EXPECT_LE((traj.states.col(k * per) - xs).norm(),
              c.M * std::exp(-c.sigma * t) * (x0 - xs).norm() + 1e-8);
  }
  EXPECT_LE((traj.states.col(4 * per) - xs).norm(), 1e-6);
}

TEST(WorstCaseTest, ScalarRestLength) {
  const auto [u, spec] = worst_case_periodic_input(scalar_system(), 10.0, 1e-6);
  EXPECT_EQ(spec.R, 14.0);
  EXPECT_EQ(spec.period, 24.0);
  const auto* ext = std::get_if<InputSignal::PeriodicExtension>(&u.variant());
  ASSERT_NE(ext, nullptr);
  EXPECT_NE(std::get_if<InputSignal::Constant>(&ext->base->variant()), nullptr);
  EXPECT_EQ(u.sup_norm(), 1.0);
}

TEST(WorstCaseTest, MetzlerSegmentIsConstant) {
  const auto [u, spec] = worst_case_periodic_input(metzler_system(), 5.0, 1e-3);
  const auto* ext = std::get_if<InputSignal::PeriodicExtension>(&u.variant());
  ASSERT_NE(ext, nullptr);
  const auto* c = std::get_if<InputSignal::Constant>(&ext->base->variant());
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->value(0), 1.0);
}

TEST(WorstCaseTest, OscillatorRestCondition) {
  const StateSpaceSystem sys = oscillator_system();
  const auto [u, spec] = worst_case_periodic_input(sys, 12.0, 1e-6);
  const StabilityCertificate& c = sys.certificate();
  EXPECT_EQ(spec.period, spec.T + spec.R);
  EXPECT_LE(c.M * std::exp(-c.sigma * spec.R), 1e-6);
  EXPECT_GT(c.M * std::exp(-c.sigma * (spec.R - 1.0)), 1e-6);
}

TEST(BangBangRealizationTest, OutputAtHorizonEqualsV) {
  const StateSpaceSystem sys = oscillator_system();
  for (double T : {3.0, 7.5, 15.0}) {
    const InputSignal u = InputSignal::bang_bang(bang_bang_switches(sys, T));
    const Trajectory traj = simulate(sys, u, Vector::Zero(2), T, 0.01);
    const double yT = std::abs(traj.outputs(0, traj.outputs.cols() - 1));
    const double V = v_of_t(sys, T).value;
    EXPECT_NEAR(yT, V, 1e-4 * V) << "T = " << T;
  }
}

TEST(EmpiricalGainsTest, Examples) {
  const EmpiricalGains z =
      empirical_gains(scalar_system(), InputSignal::zero(), 10.0, 2.0, 0.01);
  EXPECT_EQ(z.sup_gain, 0.0);
  EXPECT_EQ(z.asymptotic_gain, 0.0);

  const EmpiricalGains c =
      empirical_gains(scalar_system(), InputSignal::constant(unit()), 40.0, 10.0, 0.01);
  EXPECT_NEAR(c.sup_gain, 1.0, 1e-6);
  EXPECT_NEAR(c.asymptotic_gain, 1.0, 1e-6);
  EXPECT_LE(c.asymptotic_gain, c.sup_gain);

  const EmpiricalGains s = empirical_gains(
      scalar_system(), InputSignal::sinusoid(unit(), 1.0), 60.0, 5.0 * 2.0 * M_PI, 0.001);
  EXPECT_NEAR(s.asymptotic_gain, 1.0 / std::sqrt(2.0), 1e-4);
  EXPECT_THROW(empirical_gains(scalar_system(), InputSignal::zero(), 10.0, 10.0, 0.1),
               std::invalid_argument);
}

TEST(VerifyGainEqualityTest, ScalarMetzlerOscillator) {
  const VerificationRecord s = verify_gain_equality(scalar_system(), 0.01);
  EXPECT_TRUE(s.passed);
  EXPECT_GE(s.asymptotic_gain, 0.99);
  EXPECT_LE(s.asymptotic_gain, 1.0001);

  const VerificationRecord m = verify_gain_equality(metzler_system(), 0.01);
  EXPECT_TRUE(m.passed);
  EXPECT_GE(m.asymptotic_gain, 0.99 * 2.0 / 3.0);
  EXPECT_LE(m.asymptotic_gain, 1.0001 * 2.0 / 3.0);

  const VerificationRecord o = verify_gain_equality(oscillator_system(), 0.02);
  EXPECT_TRUE(o.passed);
  EXPECT_GE(o.V_T, 0.99 * o.gamma);
  EXPECT_GE(o.t_end, 10.0 * o.period);
}

TEST(VerifyGainEqualityTest, RejectsBadArguments) {
  EXPECT_THROW(verify_gain_equality(scalar_system(), 0.0), std::invalid_argument);
  EXPECT_THROW(verify_gain_equality(testing::diagonal_system(), 0.1), std::invalid_argument);
}

}  // namespace
}  // namespace gainlab
