#include "mbsa/demo.hpp"
#include "mbsa/errors.hpp"
#include "mbsa/io.hpp"
#include "mbsa/magnetic.hpp"
#include "mbsa/report.hpp"
#include "mbsa/scenario.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace mbsa;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct Common {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<double> beta;
  std::optional<int> max_iter;
  bool quiet = false;
};

class Timer {
 public:
  explicit Timer(bool quiet) : quiet_(quiet), t0_(std::chrono::steady_clock::now()) {}
  void report(const std::string& what) const {
    if (quiet_) return;
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    std::cerr << what << ": " << io::format_double(s) << " s\n";
  }

 private:
  bool quiet_;
  std::chrono::steady_clock::time_point t0_;
};

void add_common(CLI::App* app, Common& c, bool with_config) {
  if (with_config) app->add_option("--config", c.config, "input file")->required();
  app->add_option("--out", c.out, "output directory");
  app->add_option("--seed", c.seed, "override the scenario seed");
  app->add_option("--beta", c.beta, "override the step size");
  app->add_option("--max-iter", c.max_iter, "override the iteration limit");
  app->add_flag("--quiet", c.quiet, "suppress progress output");
}

void require_file(const std::string& path) {
  if (!fs::is_regular_file(path)) throw ConfigError("no such file: " + path);
}

int run_demo(const Common& c, double x0, double gd_step) {
  Timer timer(c.quiet);
  const DemoResult r = demo_appendix_b(c.beta.value_or(0.5), c.max_iter.value_or(200), x0, gd_step);
  write_demo_artifacts(r, c.out);
  const auto& last = r.mbsa.final_record();
  if (!c.quiet) {
    std::cout << "mbsa: " << to_string(r.mbsa.status) << " after " << r.mbsa.records.size()
              << " iterations, x = " << io::format_double(last.g[0])
              << ", f(x) = " << io::format_double(demo_f(last.g[0])) << "\n";
    std::cout << "gradient descent: " << (r.gd.stalled ? "stalled" : "stopped") << " at x = "
              << io::format_double(r.gd.x.back()) << ", f(x) = " << io::format_double(r.gd.f.back())
              << " after " << r.gd.x.size() - 1 << " steps\n";
  }
  timer.report("demo1d");
  return r.mbsa.status == SolverStatus::Converged ? kExitOk : kExitFailure;
}

int run_simulate(const Common& c) {
  Timer timer(c.quiet);
  require_file(c.config);
  const Scenario sc = load_scenario(c.config, ScenarioOverrides{c.seed, c.beta, c.max_iter});
  const ReconstructionReport rep = reconstruct_full(sc);
  const std::string out = c.out.empty() ? sc.output_dir : c.out;
  write_artifacts(rep, sc, out);
  if (!c.quiet) {
    for (const auto& p : rep.phases) {
      std::cout << to_string(p.kind) << ": ";
      if (p.trace.records.empty()) {
        std::cout << "failed\n";
        continue;
      }
      std::cout << to_string(p.trace.status) << " in " << p.trace.records.size()
                << " iterations, error norm " << io::format_double(p.trace.final_record().error_norm)
                << "\n";
      std::cerr << "  " << to_string(p.kind) << " time: " << io::format_double(p.seconds) << " s\n";
    }
    if (rep.errors) {
      std::cout << "clearance error %: median " << io::format_double(rep.errors->median) << ", max "
                << io::format_double(rep.errors->max) << "\n";
    }
    if (rep.hausdorff) std::cout << "hausdorff: " << io::format_double(*rep.hausdorff) << "\n";
  }
  timer.report("simulate");
  if (!rep.ok) {
    std::cerr << "error: " << rep.failure << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

MagneticModel default_magnetic_model() {
  const MagneticScenarioParams p;
  const BeamModel beam =
      BeamModel::rectangular(p.beam_length, p.density, p.youngs_modulus, p.width, p.thickness);
  MagneticConstants k;
  k.c = p.c;
  k.n = p.n;
  k.omega0 = base_natural_frequency(beam);
  k.length_unit = p.length_unit;
  return MagneticModel(beam, MagnetArray::uniform(p.beam_magnets, p.beam_magnet_spacing, p.beam_length),
                       k, p.gap_floor);
}

struct CalibrateArgs {
  std::optional<double> c0;
  std::optional<double> n0;
  std::optional<double> omega0;
  std::string synthesize;
  double true_c = 67981.0;
  double true_n = 3.356380;
  int points = 16;
  double gap_min = 0.02;
  double gap_max = 0.06;
};

int run_calibrate(const Common& c, const CalibrateArgs& a) {
  Timer timer(c.quiet);
  const MagneticModel base = default_magnetic_model();
  if (!a.synthesize.empty()) {
    if (a.points < 2 || !(a.gap_min > 0.0) || !(a.gap_max > a.gap_min)) {
      throw ConfigError("synthetic dataset needs at least 2 points and 0 < gap-min < gap-max");
    }
    MagneticConstants k = base.constants();
    k.c = a.true_c;
    k.n = a.true_n;
    const MagneticModel truth(base.beam(), base.beam_magnets(), k, 0.0);
    CalibrationData d;
    d.gaps = Eigen::VectorXd::LinSpaced(a.points, a.gap_min, a.gap_max);
    d.omega.resize(a.points);
    for (int i = 0; i < a.points; ++i) d.omega[i] = std::sqrt(truth.single_magnet_omega_sq(d.gaps[i]));
    io::write_file_atomic(a.synthesize, calibration_data_to_csv(d));
    if (!c.quiet) std::cout << "wrote " << a.points << " rows to " << a.synthesize << "\n";
    return kExitOk;
  }
  require_file(c.config);
  const CalibrationData d = read_calibration_csv(c.config);
  if (d.gaps.size() < 4) {
    throw ConfigError("calibration needs at least 4 rows, got " + std::to_string(d.gaps.size()));
  }
  MagneticConstants init = base.constants();
  init.c = a.c0.value_or(init.c);
  init.n = a.n0.value_or(init.n);
  init.omega0 = a.omega0.value_or(init.omega0);
  CalibrationOptions opt;
  if (c.max_iter) opt.max_iter = *c.max_iter;
  CalibrationResult r;
  try {
    r = calibrate(d.gaps, d.omega, init, base, opt);
  } catch (const CalibrationError& e) {
    std::cerr << "calibration failed: " << e.what() << "\n";
    return kExitFailure;
  }
  fs::create_directories(c.out);
  io::write_file_atomic((fs::path(c.out) / "calibration.json").string(), calibration_to_json(r));
  if (!c.quiet) {
    std::cout << "C = " << io::format_double(r.c) << ", n = " << io::format_double(r.n)
              << ", omega0 = " << io::format_double(r.omega0)
              << ", residual norm = " << io::format_double(r.residual_norm) << "\n";
  }
  timer.report("calibrate");
  return kExitOk;
}

int run_validate(const Common& c) {
  require_file(c.config);
  const std::string ext = fs::path(c.config).extension().string();
  if (ext == ".csv") {
    const CalibrationData d = read_calibration_csv(c.config);
    if (d.gaps.size() < 4) throw ConfigError("calibration needs at least 4 rows");
    if (!c.quiet) std::cout << c.config << ": calibration dataset with " << d.gaps.size() << " rows\n";
    return kExitOk;
  }
  const Scenario sc = load_scenario(c.config, ScenarioOverrides{c.seed, c.beta, c.max_iter});
  sc.solver.validate();
  for (const auto& p : sc.phases) p.validate();
  if (!c.quiet) {
    std::cout << c.config << ": scenario '" << sc.name << "' (" << sc.physics->name() << ") with "
              << sc.phases.size() << " phases\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-based successive approximation workbench"};
  app.require_subcommand(1);

  Common demo_c;
  double x0 = 0.0;
  double gd_step = 1e-3;
  auto* demo = app.add_subcommand("demo1d", "scalar MBSA vs gradient descent demonstration");
  add_common(demo, demo_c, false);
  demo->add_option("--x0", x0, "gradient descent start");
  demo->add_option("--gd-step", gd_step, "gradient descent step");

  Common sim_c;
  sim_c.out.clear();
  auto* sim = app.add_subcommand("simulate", "simulate scans and reconstruct a scenario");
  add_common(sim, sim_c, true);

  Common cal_c;
  CalibrateArgs cal_a;
  auto* cal = app.add_subcommand("calibrate", "fit C, n and omega0 to a gap/frequency dataset");
  cal->add_option("--config", cal_c.config, "CSV with columns gap_m, omega_rad_s");
  cal->add_option("--out", cal_c.out, "output directory");
  cal->add_option("--max-iter", cal_c.max_iter, "iteration limit");
  cal->add_flag("--quiet", cal_c.quiet, "suppress progress output");
  cal->add_option("--c0", cal_a.c0, "initial C");
  cal->add_option("--n0", cal_a.n0, "initial n");
  cal->add_option("--omega0", cal_a.omega0, "initial omega0");
  cal->add_option("--synthesize", cal_a.synthesize, "write a synthetic dataset to this path and exit");
  cal->add_option("--true-c", cal_a.true_c, "C used for the synthetic dataset");
  cal->add_option("--true-n", cal_a.true_n, "n used for the synthetic dataset");
  cal->add_option("--points", cal_a.points, "synthetic dataset size");
  cal->add_option("--gap-min", cal_a.gap_min, "smallest synthetic gap [m]");
  cal->add_option("--gap-max", cal_a.gap_max, "largest synthetic gap [m]");

  Common val_c;
  auto* val = app.add_subcommand("validate", "check a scenario file or calibration dataset");
  add_common(val, val_c, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*demo) return run_demo(demo_c, x0, gd_step);
    if (*sim) return run_simulate(sim_c);
    if (*cal) {
      if (cal_a.synthesize.empty() && cal_c.config.empty()) throw ConfigError("--config is required");
      return run_calibrate(cal_c, cal_a);
    }
    if (*val) return run_validate(val_c);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}
