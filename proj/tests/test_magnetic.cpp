#include "mbsa/errors.hpp"
#include "mbsa/magnetic.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace mbsa;

namespace {

BeamModel al_beam() { return BeamModel::rectangular(0.682, 2700.0, 69e9, 0.021, 0.001); }

MagneticModel model(double c = 67981.0, double n = 3.356380) {
  const BeamModel b = al_beam();
  MagneticConstants k;
  k.c = c;
  k.n = n;
  k.omega0 = base_natural_frequency(b);
  return MagneticModel(b, MagnetArray::uniform(11, 0.005, b.length), k, 1e-3);
}

Eigen::VectorXd at(double x) { return Eigen::VectorXd::Constant(1, x); }

// direct summation of the pair formula, written out independently
double pair_k(double c, double n, double a, double y) {
  const double r = std::sqrt(a * a + y * y);
  return c * n * (a * a - (n + 1) * y * y) / std::pow(r, n + 4);
}

}  // namespace

TEST_CASE("dipole potential") {
  CHECK(dipole_potential(1.0, 1.0) == -1.0);
  CHECK(dipole_potential(2.0, 3.0) / dipole_potential(1.0, 3.0) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(dipole_potential(1e6, 1.0) < 0.0);
  CHECK(dipole_potential(1e6, 1.0) > -1e-17);
  CHECK(dipole_potential(2.0, 1.0) > dipole_potential(1.0, 1.0));
  CHECK_THROWS_AS(dipole_potential(0.0, 1.0), ModelDomainError);
  CHECK_THROWS_AS(dipole_potential(-1.0, 1.0), ModelDomainError);
}

TEST_CASE("single-pair closed forms on a random grid") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uc(1.0, 1e5), un(1.0, 6.0), ug(0.5, 40.0);
  for (int t = 0; t < 200; ++t) {
    const double c = uc(rng), n = un(rng), g = ug(rng), x = ug(rng);
    const double vert = discrete_stiffness(at(x), {{x, g}}, c, n)[0];
    CHECK(vert == doctest::Approx(-c * n * (n + 1) / std::pow(g, n + 2)).epsilon(1e-12));
    const double horiz = discrete_stiffness(at(x), {{x + g, 0.0}}, c, n)[0];
    CHECK(horiz == doctest::Approx(c * n / std::pow(g, n + 2)).epsilon(1e-12));
  }
}

TEST_CASE("symmetric pair doubles the single-pair value") {
  const double c = 5.0, n = 3.3, h = 2.0, g = 3.0, x = 10.0;
  const double two = discrete_stiffness(at(x), {{x - h, g}, {x + h, g}}, c, n)[0];
  CHECK(two == doctest::Approx(2 * pair_k(c, n, h, g)).epsilon(1e-14));
}

TEST_CASE("coincident magnets raise a singularity error") {
  CHECK_THROWS_AS(discrete_stiffness(at(1.0), {{1.0, 0.0}}, 1.0, 3.0), SingularityError);
  CHECK_THROWS_AS(discrete_stiffness(at(1.0), {{1.0, 0.5}}, 1.0, 3.0, 1.0), SingularityError);
}

TEST_CASE("forward model basics") {
  const MagneticModel m0 = model(0.0);
  const double w0sq = std::pow(m0.constants().omega0, 2);
  const BeamPose pose{{0.0, 0.682}, {0.0, 1.0}};  // clamp at g2 = 0, tip at 0.682
  std::vector<Point> below;
  for (int i = 0; i < 16; ++i) below.push_back({0.02, 0.6 + 0.005 * i});
  CHECK(m0.omega_sq(below, pose) == w0sq);

  const MagneticModel m = model();
  CHECK(m.omega_sq(below, pose) < w0sq);

  // shifting both arrays together leaves the reading unchanged
  const double shift_x = 0.0371, shift_y = -0.0123;
  std::vector<Point> moved = below;
  for (auto& p : moved) p = {p.g1 + shift_y, p.g2 + shift_x};
  const BeamPose moved_pose{{pose.tip.g1 + shift_y, pose.tip.g2 + shift_x}, pose.axis};
  CHECK(m.omega_sq(moved, moved_pose) == doctest::Approx(m.omega_sq(below, pose)).epsilon(1e-12));

  // raising the beam moves the reading up toward omega0^2
  double prev = -1e300;
  for (double lift : {0.0, 0.002, 0.005, 0.01, 0.02, 0.05}) {
    const BeamPose p{{pose.tip.g1 - lift, pose.tip.g2}, pose.axis};
    const double w = m.omega_sq(below, p);
    CHECK(w > prev);
    CHECK(w < w0sq);
    prev = w;
  }
}

TEST_CASE("forward model matches the discrete Rayleigh sum") {
  const MagneticModel m = model();
  const BeamModel b = al_beam();
  const MagnetArray beam_mags = MagnetArray::uniform(11, 0.005, b.length);
  const double lambda = mode_eigenvalue(1);
  auto phi = [&](double x) {
    const double s = lambda * x / b.length;
    const double sg = (std::cosh(lambda) + std::cos(lambda)) / (std::sinh(lambda) + std::sin(lambda));
    return std::cosh(s) - std::cos(s) - sg * (std::sinh(s) - std::sin(s));
  };
  // integral of phi^2 equals L for this normalisation
  const double modal_mass = b.rho_a * b.length;
  const Point magnet{0.025, 0.66};
  double expected = 0.0;
  for (Eigen::Index j = 0; j < beam_mags.positions.size(); ++j) {
    const double xj = beam_mags.positions[j];
    const double k = pair_k(67981.0, 3.356380, (magnet.g2 - xj) / 1e-3, magnet.g1 / 1e-3);
    expected += k * phi(xj) * phi(xj) / modal_mass;
  }
  const BeamPose pose{{0.0, b.length}, {0.0, 1.0}};
  CHECK(m.delta_omega_sq({magnet}, pose) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("calibration recovers the generator constants") {
  const MagneticModel truth = model();
  const Eigen::VectorXd gaps = Eigen::VectorXd::LinSpaced(16, 0.02, 0.06);
  Eigen::VectorXd omega(gaps.size());
  for (Eigen::Index i = 0; i < gaps.size(); ++i) omega[i] = std::sqrt(truth.single_magnet_omega_sq(gaps[i]));
  MagneticConstants init = truth.constants();
  init.c = 40000.0;
  init.n = 3.0;
  init.omega0 *= 1.05;
  const CalibrationResult r = calibrate(gaps, omega, init, truth);
  CHECK(std::abs(r.c / 67981.0 - 1.0) < 1e-3);
  CHECK(std::abs(r.n - 3.356380) < 1e-3);
  CHECK(r.omega0 == doctest::Approx(truth.constants().omega0).epsilon(1e-6));
  CHECK(r.residual_norm <= r.initial_residual_norm);
  CHECK(r.residuals.size() == gaps.size());
  for (std::size_t k = 1; k < r.cost_history.size(); ++k) CHECK(r.cost_history[k] <= r.cost_history[k - 1]);
}

TEST_CASE("ideal dipole data gives a cube law") {
  const MagneticModel truth = model(50000.0, 3.0);
  const Eigen::VectorXd gaps = Eigen::VectorXd::LinSpaced(12, 0.02, 0.05);
  Eigen::VectorXd omega(gaps.size());
  for (Eigen::Index i = 0; i < gaps.size(); ++i) omega[i] = std::sqrt(truth.single_magnet_omega_sq(gaps[i]));
  const CalibrationResult r = calibrate(gaps, omega, model().constants(), truth);
  CHECK(r.n >= 2.95);
  CHECK(r.n <= 3.05);
}

TEST_CASE("calibration input errors") {
  const MagneticModel m = model();
  Eigen::VectorXd g3(3), w3(3);
  g3 << 0.02, 0.03, 0.04;
  w3 << 10.0, 10.5, 10.8;
  CHECK_THROWS_AS(calibrate(g3, w3, m.constants(), m), CalibrationError);
  Eigen::VectorXd g4(4), w4(4);
  g4 << 0.02, 0.03, 0.03, 0.04;
  w4 << 10.0, 10.5, 10.5, 10.8;
  CHECK_THROWS_AS(calibrate(g4, w4, m.constants(), m), CalibrationError);
  g4 << 0.02, -0.03, 0.035, 0.04;
  CHECK_THROWS_AS(calibrate(g4, w4, m.constants(), m), CalibrationError);
}
