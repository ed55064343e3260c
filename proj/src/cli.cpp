#include "gainlab/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>

#include "gainlab/delaylab.hpp"
#include "gainlab/gains.hpp"
#include "gainlab/io.hpp"
#include "gainlab/sim.hpp"

namespace gainlab::cli {

namespace {

constexpr double kDefaultTol = 1e-8;

struct Settings {
  std::string file;
  std::optional<std::string> out;
  std::optional<std::string> trajectory;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<double> t_max;
  std::optional<int> points;
  double omega_min = 1e-3;
  double omega_max = 1e3;
  double accuracy = 0.02;
  std::optional<double> step;
  std::optional<double> horizon;
  std::optional<double> window;
  std::string input = "step";
  double omega = 1.0;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double resolve_tol(const Settings& s, const std::optional<double>& file_tol) {
  if (s.tol) return *s.tol;
  if (file_tol) return *file_tol;
  if (const char* env = std::getenv("GAINLAB_TOL"); env && *env) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (*end != '\0' || !std::isfinite(v) || !(v > 0.0)) {
      throw UsageError(std::string("GAINLAB_TOL is not a positive number: ") + env);
    }
    return v;
  }
  return kDefaultTol;
}

std::uint64_t resolve_seed(const Settings& s, const std::optional<std::uint64_t>& file_seed) {
  if (s.seed) return *s.seed;
  return file_seed.value_or(0);
}

void emit(const Settings& s, const std::string& text, std::ostream& out) {
  if (!s.out) {
    out << text;
    return;
  }
  std::ofstream f(*s.out, std::ios::binary);
  if (!f) throw Error("cannot write " + *s.out);
  f << text;
  if (!f) throw Error("failed writing " + *s.out);
}

const StateSpaceSystem& expect_lti(const io::SystemFile& f) {
  if (const auto* sys = std::get_if<StateSpaceSystem>(&f.system)) return *sys;
  throw Error("this command expects a state-space system file (A, B, C)");
}

const DelayPredictorSystem& expect_delay(const io::SystemFile& f) {
  if (const auto* sys = std::get_if<DelayPredictorSystem>(&f.system)) return *sys;
  throw Error("this command expects a delay system file (A, B, G, K, tau, mu)");
}

InputSignal make_input(const std::string& kind, Eigen::Index m, double omega) {
  Vector e1 = Vector::Zero(m);
  e1(0) = 1.0;
  if (kind == "zero") return InputSignal::zero();
  if (kind == "step") return InputSignal::constant(e1);
  return InputSignal::sinusoid(e1, omega);
}

int cmd_analyze(const Settings& s, std::ostream& out) {
  const io::SystemFile f = io::parse_system_file(s.file);
  const double tol = resolve_tol(s, f.tol);
  if (const auto* delay = std::get_if<DelayPredictorSystem>(&f.system)) {
    emit(s, io::dump(io::document("delay-bounds", io::to_json(delay_bounds(*delay, tol)))),
         out);
    return kExitOk;
  }
  GainReportOptions opts;
  opts.tol = tol;
  opts.seed = resolve_seed(s, f.seed);
  opts.omega_min = s.omega_min;
  opts.omega_max = s.omega_max;
  if (s.points) opts.omega_points = *s.points;
  const GainReport report = gain_report(expect_lti(f), opts);
  emit(s, io::dump(io::document("gain-report", io::to_json(report, opts))), out);
  return report.sandwich_ok ? kExitOk : kExitFailure;
}

int cmd_vt(const Settings& s, std::ostream& out) {
  const io::SystemFile f = io::parse_system_file(s.file);
  const StateSpaceSystem& sys = expect_lti(f);
  const double t_max = s.t_max.value_or(20.0);
  const int points = s.points.value_or(40);
  if (!(t_max > 0.0) || points < 1) throw UsageError("--t-max must be positive and --points >= 1");
  std::vector<double> horizons;
  for (int i = 1; i <= points; ++i) horizons.push_back(t_max * i / points);
  VOptions opts;
  opts.tol = resolve_tol(s, f.tol);
  opts.seed = resolve_seed(s, f.seed);
  emit(s, io::v_curve_csv(v_curve(sys, horizons, opts)), out);
  return kExitOk;
}

int cmd_sweep(const Settings& s, std::ostream& out) {
  const io::SystemFile f = io::parse_system_file(s.file);
  const StateSpaceSystem& sys = expect_lti(f);
  const std::vector<double> omegas = log_grid(s.omega_min, s.omega_max, s.points.value_or(200));
  std::vector<double> values;
  values.reserve(omegas.size());
  for (double w : omegas) values.push_back(psi(sys, w));
  emit(s, io::sweep_csv(omegas, values), out);
  return kExitOk;
}

int cmd_simulate(const Settings& s, std::ostream& out) {
  const io::SystemFile f = io::parse_system_file(s.file);
  const StateSpaceSystem& sys = expect_lti(f);
  const InputSignal u = make_input(s.input, sys.m(), s.omega);
  const Trajectory traj = simulate(sys, u, Vector::Zero(sys.n()), s.t_max.value_or(20.0),
                                   s.step.value_or(0.01));
  emit(s, io::trajectory_csv(traj), out);
  return kExitOk;
}

int cmd_worstcase(const Settings& s, std::ostream& out, std::ostream& err) {
  const io::SystemFile f = io::parse_system_file(s.file);
  const StateSpaceSystem& sys = expect_lti(f);
  if (!(s.accuracy > 0.0 && s.accuracy < 1.0)) throw UsageError("--accuracy must lie in (0, 1)");
  const auto [u, spec] = worst_case_periodic_input(sys, s.horizon.value_or(10.0),
                                                   0.5 * s.accuracy);
  err << "worst-case input: T = " << io::format_number(spec.T)
      << ", R = " << io::format_number(spec.R)
      << ", period = " << io::format_number(spec.period) << '\n';
  const Trajectory traj = simulate(sys, u, Vector::Zero(sys.n()),
                                   s.t_max.value_or(3.0 * spec.period),
                                   s.step.value_or(0.01));
  emit(s, io::trajectory_csv(traj), out);
  return kExitOk;
}

int cmd_verify(const Settings& s, std::ostream& out) {
  const io::SystemFile f = io::parse_system_file(s.file);
  const StateSpaceSystem& sys = expect_lti(f);
  VerificationOptions opts;
  opts.quad_tol = resolve_tol(s, f.tol);
  if (s.step) opts.h = *s.step;
  if (s.window) opts.window_periods = static_cast<int>(std::lround(*s.window));
  if (opts.window_periods < 1 || opts.window_periods >= opts.periods) {
    throw UsageError("--window counts periods and must lie in [1, 11]");
  }
  const VerificationRecord rec = verify_gain_equality(sys, s.accuracy, opts);
  emit(s, io::dump(io::document("verification", io::to_json(rec))), out);
  return rec.passed ? kExitOk : kExitFailure;
}

int cmd_bound41(const Settings& s, std::ostream& out) {
  const Theorem41Result result = theorem41_bound(io::parse_theorem41_file(s.file));
  emit(s, io::dump(io::document("theorem41", io::to_json(result))), out);
  return kExitOk;
}

int cmd_delay_demo(const Settings& s, std::ostream& out) {
  const io::SystemFile f = io::parse_system_file(s.file);
  const DelayPredictorSystem& sys = expect_delay(f);
  const double tol = resolve_tol(s, f.tol);
  const double h = s.step.value_or(sys.tau() / 50.0);
  const double t_end = s.t_max.value_or(200.0);
  const double window = s.window.value_or(70.0);

  Vector e1 = Vector::Zero(sys.p());
  e1(0) = 1.0;
  std::vector<InputSignal> inputs{InputSignal::zero(), InputSignal::constant(e1)};
  std::vector<std::string> labels{"zero", "constant"};
  for (double w : {0.1, 1.0, 10.0}) {
    inputs.push_back(InputSignal::sinusoid(e1, w));
    labels.push_back("sinusoid omega=" + io::format_number(w));
  }
  const DelayBoundReport bounds = delay_bounds(sys, tol);
  const DelayEmpiricalRecord rec = delay_empirical_check(sys, inputs, t_end, window, h,
                                                         1e-3, tol);
  io::Json empirical = io::to_json(rec);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    empirical["entries"][i]["input"] = labels[i];
  }

  const InputSignal probe = make_input(s.input, sys.p(), s.omega);
  const DelayTrajectory traj =
      simulate_predictor(sys, probe, zero_delay_state(sys, h), std::min(t_end, 20.0), h);
  const XiSeries xi = xi_series(traj, sys);
  if (s.trajectory) {
    std::ofstream csv(*s.trajectory, std::ios::binary);
    if (!csv) throw Error("cannot write " + *s.trajectory);
    csv << io::delay_trajectory_csv(traj, xi);
  }

  io::Json payload{{"bounds", io::to_json(bounds)},
                   {"empirical", empirical},
                   {"xi_check", {{"input", s.input},
                                 {"t_end", traj.times.back()},
                                 {"step", h},
                                 {"residual", (xi.numeric - xi.closed_form)
                                                  .colwise()
                                                  .norm()
                                                  .maxCoeff()}}}};
  emit(s, io::dump(io::document("delay-demo", payload)), out);
  return rec.passed ? kExitOk : kExitFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Minimum IOS-gain bounds and checks for stable LTI systems", "gainlab"};
  app.require_subcommand(1);
  Settings s;

  auto add_file = [&](CLI::App* cmd, const char* what) {
    cmd->add_option("file", s.file, what)->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", s.out, "Write the result here instead of stdout");
  };
  auto add_tol = [&](CLI::App* cmd) {
    cmd->add_option("--tol", s.tol, "Absolute quadrature tolerance")
        ->check(CLI::PositiveNumber);
  };
  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", s.seed, "Seed for random restarts and bases");
  };
  auto add_omega_range = [&](CLI::App* cmd) {
    cmd->add_option("--omega-min", s.omega_min, "Lowest sweep frequency")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--omega-max", s.omega_max, "Highest sweep frequency")
        ->check(CLI::PositiveNumber);
  };
  auto add_input = [&](CLI::App* cmd) {
    cmd->add_option("--input", s.input, "Input signal")
        ->check(CLI::IsMember({"zero", "step", "sine"}));
    cmd->add_option("--omega", s.omega, "Frequency of the sine input")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* analyze = app.add_subcommand("analyze", "Exact value and bounds of the gain");
  add_file(analyze, "System JSON file");
  add_tol(analyze);
  add_seed(analyze);
  add_omega_range(analyze);
  analyze->add_option("--points", s.points, "Sinusoid sweep points")->check(CLI::Range(2, 1000000));

  CLI::App* vt = app.add_subcommand("vt", "CSV of V(T) on a uniform horizon grid");
  add_file(vt, "System JSON file");
  add_tol(vt);
  add_seed(vt);
  vt->add_option("--t-max", s.t_max, "Largest horizon")->check(CLI::PositiveNumber);
  vt->add_option("--points", s.points, "Number of horizons")->check(CLI::Range(1, 1000000));

  CLI::App* sweep = app.add_subcommand("sweep", "CSV of the sinusoid amplitude Psi(omega)");
  add_file(sweep, "System JSON file");
  add_omega_range(sweep);
  sweep->add_option("--points", s.points, "Number of frequencies")->check(CLI::Range(2, 1000000));

  CLI::App* simulate_cmd = app.add_subcommand("simulate", "Zero-state trajectory CSV");
  add_file(simulate_cmd, "System JSON file");
  add_input(simulate_cmd);
  simulate_cmd->add_option("--t-max", s.t_max, "Final time")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--step", s.step, "Sample step")->check(CLI::PositiveNumber);

  CLI::App* worstcase = app.add_subcommand("worstcase", "Trajectory under the worst-case periodic input");
  add_file(worstcase, "System JSON file");
  worstcase->add_option("--horizon", s.horizon, "Length T of the bang-bang segment")
      ->check(CLI::PositiveNumber);
  worstcase->add_option("--accuracy", s.accuracy, "Rest tolerance is accuracy / 2");
  worstcase->add_option("--t-max", s.t_max, "Final time (default three periods)")
      ->check(CLI::PositiveNumber);
  worstcase->add_option("--step", s.step, "Sample step")->check(CLI::PositiveNumber);

  CLI::App* verify = app.add_subcommand("verify", "Simulate the worst-case periodic input and compare with the gain");
  add_file(verify, "System JSON file");
  add_tol(verify);
  verify->add_option("--accuracy", s.accuracy, "Relative accuracy in (0, 1)");
  verify->add_option("--step", s.step, "Simulation step")->check(CLI::PositiveNumber);
  verify->add_option("--window", s.window, "Trailing window in periods")->check(CLI::PositiveNumber);

  CLI::App* bound41 = app.add_subcommand("bound41", "Gain bound from decay certificates and a robustness function b");
  add_file(bound41, "Bound input JSON file");

  CLI::App* delay = app.add_subcommand("delay-demo", "Bounds and simulation checks for the delay system");
  add_file(delay, "Delay system JSON file");
  add_tol(delay);
  add_input(delay);
  delay->add_option("--step", s.step, "Step; must divide tau (default tau / 50)")
      ->check(CLI::PositiveNumber);
  delay->add_option("--t-max", s.t_max, "Length of the empirical runs")->check(CLI::PositiveNumber);
  delay->add_option("--window", s.window, "Trailing window length")->check(CLI::PositiveNumber);
  delay->add_option("--trajectory", s.trajectory, "CSV of (t, y, z, xi, closed-form xi)");

  std::vector<const char*> argv{"gainlab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(s, out);
    if (vt->parsed()) return cmd_vt(s, out);
    if (sweep->parsed()) return cmd_sweep(s, out);
    if (simulate_cmd->parsed()) return cmd_simulate(s, out);
    if (worstcase->parsed()) return cmd_worstcase(s, out, err);
    if (verify->parsed()) return cmd_verify(s, out);
    if (bound41->parsed()) return cmd_bound41(s, out);
    if (delay->parsed()) return cmd_delay_demo(s, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace gainlab::cli
