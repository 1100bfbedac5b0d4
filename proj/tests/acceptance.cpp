// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include "mbsa/beam.hpp"
#include "mbsa/demo.hpp"
#include "mbsa/magnetic.hpp"
#include "mbsa/report.hpp"
#include "mbsa/scenario.hpp"
#include "mbsa/solver.hpp"
#include "mbsa/vdw.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

using namespace mbsa;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double bisect(const std::function<double(double)>& f, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((f(lo) < 0) == (f(mid) < 0)) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

ModelPair scalar_pair(double a, double b) {
  ModelPair m;
  m.full_forward = [a](const Vector& g, const Vector&) { return Vector(a * g); };
  m.simplified_forward = [b](const Vector& g, const Vector&) { return Vector(b * g); };
  m.simplified_inverse = [b](const Vector& w, const Vector&) { return Vector(w / b); };
  return m;
}

Outcome ac1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const DemoResult d = demo_appendix_b(0.5, 200);
  const double secs = seconds_since(t0);
  const double x = d.mbsa.final_estimate()[0];
  const double root = bisect([](double v) { return std::sin(15 * v) + 8 * v + 3; }, -0.5, -0.25);
  o.require(d.mbsa.status == SolverStatus::Converged, "MBSA did not converge");
  o.require(d.mbsa.records.size() <= 200, "more than 200 iterations");
  o.require(std::abs(demo_f(x)) < 1e-8, "|f| >= 1e-8");
  o.require(std::abs(x - root) < 1e-3, "root mismatch");
  const double gd_f = std::abs(d.gd.f.back());
  const double gd_x = d.gd.x.back();
  const double slope = 2.0 * demo_f(gd_x) * demo_df(gd_x);
  o.require(gd_f > 0.5, "gradient descent reached |f| <= 0.5");
  o.require(std::abs(slope) < 1e-6, "gradient descent did not stop at a stationary point");
  o.require(secs < 1.0, "runtime >= 1 s");
  o.detail += (o.detail.empty() ? "" : " | ") + std::string("iterations ") +
              std::to_string(d.mbsa.records.size()) + ", x " + fmt("%.10f", x) + ", root " +
              fmt("%.10f", root) + ", GD |f| " + fmt("%.4f", gd_f) + " at x " + fmt("%.5f", gd_x) +
              ", " + fmt("%.3f", secs) + " s";
  return o;
}

Outcome ac2() {
  Outcome o;
  std::string summary;
  auto run = [](double beta) {
    SolverConfig cfg;
    cfg.beta = beta;
    cfg.max_iter = 2000;
    return run_mbsa(scalar_pair(1.0, 1.0), {Vector::Zero(1), Vector::Ones(1)}, cfg, Vector::Zero(1)).status;
  };
  for (double beta : {0.1, 0.5, 1.0, 1.9}) {
    const SolverStatus s = run(beta);
    o.require(s == SolverStatus::Converged, fmt("beta %.1f did not converge", beta));
    summary += fmt("%.1f:", beta) + to_string(s) + " ";
  }
  for (double beta : {2.1, 3.0}) {
    const SolverStatus s = run(beta);
    o.require(s == SolverStatus::Diverged, fmt("beta %.1f did not diverge", beta));
    summary += fmt("%.1f:", beta) + to_string(s) + " ";
  }
  o.detail += (o.detail.empty() ? "" : " | ") + summary;
  return o;
}

Outcome ac3() {
  Outcome o;
  const Vector x0 = Vector::Zero(1), one = Vector::Ones(1);
  for (auto [a, b] : {std::pair{2.0, 3.0}, {-1.0, -4.0}, {0.5, 7.0}}) {
    o.require(check_convergence_condition(scalar_pair(a, b), one, x0, 1e-6).positive_definite,
              fmt("aligned pair a=%g not positive definite", a));
  }
  for (auto [a, b] : {std::pair{2.0, -1.0}, {-3.0, 0.5}}) {
    o.require(!check_convergence_condition(scalar_pair(a, b), one, x0, 1e-6).positive_definite,
              fmt("opposed pair a=%g reported positive definite", a));
  }
  double worst = 0.0;
  const ModelPair m = demo_models();
  for (double x = -0.5; x <= 0.5; x += 0.05) {
    const double exact_f = 8.0 + 15.0 * std::cos(15.0 * x);
    const double jf = fd_jacobian(m.full_forward, Vector::Constant(1, x), x0, 1e-6)(0, 0);
    const double js = fd_jacobian(m.simplified_forward, Vector::Constant(1, x), x0, 1e-6)(0, 0);
    worst = std::max({worst, std::abs(jf - exact_f) / std::abs(exact_f), std::abs(js - 6.0) / 6.0});
  }
  o.require(worst <= 1e-6, "finite-difference Jacobian off by more than 1e-6");
  o.detail += (o.detail.empty() ? "" : " | ") + std::string("max FD relative error ") + fmt("%.2e", worst);
  return o;
}

double wall_kernel(double c, double n, double a, double g, double w) {
  if (a == 0.0) return -c * n * (std::pow(g, -(n + 1)) - std::pow(g + w, -(n + 1)));
  auto t = [n](double s) { return s * std::pow(1.0 + s * s, -(n + 2) / 2); };
  return -c * n * std::pow(a, -(n + 1)) * (t(g / a) - t((g + w) / a));
}

Outcome ac4() {
  Outcome o;
  const BeamModel b{200e-9, 6e-12, 8.9e-20, 1};
  const RayleighQuadrature q(b, 4096);
  const InteractionConstants k = lj_line_constants(mix_constants({0.293373, 0.163176}, {0.392, 2.51040}));
  const double g = 1e-9, w = 100 * g;
  const Contour wall = Contour::from_points({{g, 0.0}, {g + w, 0.0}});
  const BeamPose pose{{0.0, 0.0}, {0.0, 1.0}};

  const auto tip_profile = stiffness_profile(wall, k, pose, q, g / 8);
  const double tip = tip_profile.k[tip_profile.k.size() - 1];
  const double tip_oracle = -k.c * k.n * std::pow(g, -(k.n + 1));
  const double tip_res = std::abs(tip / tip_oracle - 1.0);
  o.require(tip_res < 0.01, "tip stiffness off by >= 1%");

  Eigen::VectorXd oracle_k(q.nodes().size());
  for (Eigen::Index i = 0; i < oracle_k.size(); ++i) oracle_k[i] = wall_kernel(k.c, k.n, b.length - q.nodes()[i], g, w);
  const double oracle = q.delta_omega_sq(oracle_k);
  std::vector<double> residuals;
  for (double panel : {g / 4, g / 8, g / 16}) {
    residuals.push_back(std::abs(q.delta_omega_sq(stiffness_profile(wall, k, pose, q, panel).k) / oracle - 1.0));
  }
  o.require(residuals[1] < 0.01 && residuals[2] < 0.01, "frequency shift off by >= 1%");
  o.require(residuals[1] <= 0.5 * residuals[0] && residuals[2] <= 0.5 * residuals[1],
            "refinement did not halve the residual");
  o.detail += (o.detail.empty() ? "" : " | ") + std::string("tip ") + fmt("%.2e", tip_res) + ", shift residuals " +
              fmt("%.2e", residuals[0]) + " / " + fmt("%.2e", residuals[1]) + " / " + fmt("%.2e", residuals[2]);
  return o;
}

std::string scenario_path(const char* name) { return std::string(MBSA_SOURCE_DIR) + "/scenarios/" + name; }

Outcome ac5() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario sc = load_scenario(scenario_path("vdw_groove.json"));
  const ReconstructionReport r = reconstruct_full(sc);
  const double secs = seconds_since(t0);
  o.require(r.ok, "run failed: " + r.failure);
  o.require(r.phases.size() == 4, "expected four phases");
  for (const auto& p : r.phases) {
    const std::string name = to_string(p.kind);
    o.require(p.trace.status == SolverStatus::Converged, name + " did not converge");
    o.require(p.estimate_clearance.size() == 16, name + " does not have 16 segments");
    const auto& rec = p.trace.records;
    for (std::size_t i = 1; i < rec.size(); ++i) {
      if (rec[i].error_norm > rec[i - 1].error_norm * (1.0 + 1e-12)) {
        o.require(false, name + " error norm increased at iteration " + std::to_string(i + 1));
        break;
      }
    }
  }
  if (r.errors) o.require(r.errors->max <= 2.0, "max error above 2%");
  o.require(secs < 60.0, "runtime >= 60 s");
  if (r.errors) {
    o.detail += (o.detail.empty() ? "" : " | ") + std::string("max error ") + fmt("%.2e", r.errors->max) +
                "%, " + fmt("%.1f", secs) + " s";
  }
  return o;
}

Outcome ac6() {
  Outcome o;
  const BeamModel b = BeamModel::rectangular(0.682, 2700.0, 69e9, 0.021, 0.001);
  auto model = [&](double c, double n) {
    MagneticConstants k;
    k.c = c;
    k.n = n;
    k.omega0 = base_natural_frequency(b);
    return MagneticModel(b, MagnetArray::uniform(11, 0.005, b.length), k, 1e-3);
  };
  auto data = [](const MagneticModel& m, const Eigen::VectorXd& gaps) {
    Eigen::VectorXd w(gaps.size());
    for (Eigen::Index i = 0; i < gaps.size(); ++i) w[i] = std::sqrt(m.single_magnet_omega_sq(gaps[i]));
    return w;
  };
  const MagneticModel truth = model(67981.0, 3.356380);
  const Eigen::VectorXd gaps = Eigen::VectorXd::LinSpaced(16, 0.02, 0.06);
  MagneticConstants init = truth.constants();
  init.c = 40000.0;
  init.n = 3.0;
  const CalibrationResult r = calibrate(gaps, data(truth, gaps), init, truth);
  o.require(std::abs(r.c / 67981.0 - 1.0) <= 1e-3, "C not within 0.1%");
  o.require(std::abs(r.n - 3.356380) <= 1e-3, "n not within 1e-3");

  const MagneticModel dipole = model(50000.0, 3.0);
  const CalibrationResult rd = calibrate(gaps, data(dipole, gaps), truth.constants(), dipole);
  o.require(rd.n >= 2.95 && rd.n <= 3.05, "dipole n outside [2.95, 3.05]");
  o.detail += (o.detail.empty() ? "" : " | ") + std::string("C ") + fmt("%.3f", r.c) + ", n " + fmt("%.6f", r.n) +
              ", dipole n " + fmt("%.4f", rd.n);
  return o;
}

Outcome ac7() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uc(1.0, 1e5), un(1.0, 6.0), ug(0.5, 40.0);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const double c = uc(rng), n = un(rng), g = ug(rng), x = ug(rng);
    const Eigen::VectorXd at = Eigen::VectorXd::Constant(1, x);
    const double vert = discrete_stiffness(at, {{x, g}}, c, n)[0];
    const double horiz = discrete_stiffness(at, {{x + g, 0.0}}, c, n)[0];
    const double ev = -c * n * (n + 1) / std::pow(g, n + 2), eh = c * n / std::pow(g, n + 2);
    worst = std::max({worst, std::abs(vert / ev - 1.0), std::abs(horiz / eh - 1.0)});
  }
  o.require(worst <= 1e-12, "closed form mismatch above 1e-12");
  o.detail += (o.detail.empty() ? "" : " | ") + std::string("max relative deviation ") + fmt("%.2e", worst);
  return o;
}

Outcome ac8() {
  Outcome o;
  const BeamModel b{0.5, 0.3, 2.0, 1};
  const double pb = phi_bar(b);
  // independent trapezoid of the normalised mode shape squared
  const double lambda = mode_eigenvalue(1);
  const double sigma = (std::cosh(lambda) + std::cos(lambda)) / (std::sinh(lambda) + std::sin(lambda));
  auto shape = [&](double s) {
    return std::cosh(lambda * s) - std::cos(lambda * s) - sigma * (std::sinh(lambda * s) - std::sin(lambda * s));
  };
  const int n = 200000;
  double acc = 0.5 * (0.0 + 1.0);
  for (int i = 1; i < n; ++i) acc += std::pow(shape(double(i) / n) / shape(1.0), 2);
  const double oracle = acc / n;
  o.require(std::abs(pb - oracle) <= 1e-3, "phi bar off the quadrature oracle");
  o.require(std::abs(pb - 0.25) <= 1e-3, "phi bar not within 1e-3 of 0.250");

  auto profile = [&](const std::function<double(double)>& k) {
    StiffnessProfile p;
    p.x = Eigen::VectorXd::LinSpaced(2049, 0.0, b.length);
    p.k = p.x.unaryExpr(k);
    return p;
  };
  const double k0 = -3.7;
  const double dc = delta_omega_sq(b, profile([&](double) { return k0; }));
  o.require(std::abs(dc / (k0 / b.rho_a) - 1.0) <= 1e-9, "constant stiffness shift off by more than 1e-9");

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const double a1 = u(rng), a2 = u(rng), a3 = u(rng), alpha = 3 * u(rng);
    auto k1 = [&](double x) { return a1 + a2 * x * x; };
    auto k2 = [&](double x) { return a3 * std::cos(7 * x); };
    const double d1 = delta_omega_sq(b, profile(k1)), d2 = delta_omega_sq(b, profile(k2));
    const double d12 = delta_omega_sq(b, profile([&](double x) { return alpha * k1(x) + k2(x); }));
    const double scale = std::abs(alpha * d1) + std::abs(d2);
    worst = std::max(worst, std::abs(d12 - (alpha * d1 + d2)) / scale);
  }
  o.require(worst <= 1e-9, "linearity off by more than 1e-9");
  o.detail += (o.detail.empty() ? "" : " | ") + std::string("phi bar ") + fmt("%.6f", pb) + ", linearity " +
              fmt("%.1e", worst) + ", constant " + fmt("%.1e", std::abs(dc / (k0 / b.rho_a) - 1.0));
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Compares every file of two artifact directories byte for byte.
bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
  std::vector<std::string> na, nb;
  for (const auto& e : fs::directory_iterator(a)) na.push_back(e.path().filename().string());
  for (const auto& e : fs::directory_iterator(b)) nb.push_back(e.path().filename().string());
  std::sort(na.begin(), na.end());
  std::sort(nb.begin(), nb.end());
  if (na != nb || na.empty()) {
    why = "file lists differ";
    return false;
  }
  for (const auto& n : na) {
    if (slurp(a / n) != slurp(b / n)) {
      why = n + " differs";
      return false;
    }
  }
  return true;
}

Outcome ac9() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / ("mbsa_acceptance_" + std::to_string(::getpid()));
  std::size_t files = 0;
  for (const char* name : {"vdw_groove.json", "magnetic.json"}) {
    for (int run = 0; run < 2; ++run) {
      const Scenario sc = load_scenario(scenario_path(name));
      const ReconstructionReport r = reconstruct_full(sc);
      write_artifacts(r, sc, (root / name / std::to_string(run)).string());
    }
    std::string why;
    o.require(same_tree(root / name / "0", root / name / "1", why), std::string(name) + ": " + why);
    files += static_cast<std::size_t>(std::distance(fs::directory_iterator(root / name / "0"), {}));
  }
  for (int run = 0; run < 2; ++run) write_demo_artifacts(demo_appendix_b(0.5, 200), (root / "demo" / std::to_string(run)).string());
  std::string why;
  o.require(same_tree(root / "demo" / "0", root / "demo" / "1", why), "demo: " + why);
  files += static_cast<std::size_t>(std::distance(fs::directory_iterator(root / "demo" / "0"), {}));
  fs::remove_all(root);
  o.detail += (o.detail.empty() ? "" : " | ") + std::to_string(files) + " artifacts compared";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria = {
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}};
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %s %s\n", name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
