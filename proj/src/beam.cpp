#include "mbsa/beam.hpp"

#include "mbsa/errors.hpp"
#include "mbsa/io.hpp"
#include "mbsa/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace mbsa {

BeamModel BeamModel::rectangular(double length, double density, double youngs_modulus,
                                 double width, double thickness, int mode_index) {
  if (!(width > 0.0) || !(thickness > 0.0) || !(density > 0.0) || !(youngs_modulus > 0.0)) {
    throw ConfigError("rectangular beam needs positive width, thickness, density and modulus");
  }
  BeamModel b;
  b.length = length;
  b.rho_a = density * width * thickness;
  b.ei = youngs_modulus * width * thickness * thickness * thickness / 12.0;
  b.mode_index = mode_index;
  b.validate();
  return b;
}

void BeamModel::validate() const {
  if (!(length > 0.0) || !std::isfinite(length)) throw ConfigError("beam length must be positive");
  if (!(rho_a > 0.0) || !std::isfinite(rho_a)) throw ConfigError("beam rho_a must be positive");
  if (!(ei > 0.0) || !std::isfinite(ei)) throw ConfigError("beam EI must be positive");
  if (mode_index < 1 || mode_index > kMaxModeIndex) {
    throw ConfigError("mode_index must be between 1 and " + std::to_string(kMaxModeIndex));
  }
}

double mode_eigenvalue(int mode_index) {
  if (mode_index < 1 || mode_index > kMaxModeIndex) {
    throw ConfigError("unsupported mode index " + std::to_string(mode_index));
  }
  auto f = [](double l) { return 1.0 + std::cos(l) * std::cosh(l); };
  const double centre = (2.0 * mode_index - 1.0) * std::numbers::pi / 2.0;
  double lo = centre - 0.5;
  double hi = centre + 0.5;
  double flo = f(lo);
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

double shape_unchecked(double sigma, double z) {
  return std::cosh(z) - std::cos(z) - sigma * (std::sinh(z) - std::sin(z));
}

double shape_sigma(double lambda) {
  return (std::cosh(lambda) + std::cos(lambda)) / (std::sinh(lambda) + std::sin(lambda));
}

}  // namespace

double mode_shape(const BeamModel& beam, double x) {
  beam.validate();
  const double slack = 1e-12 * beam.length;
  if (!(x >= -slack && x <= beam.length + slack)) {
    throw ModelDomainError("position " + io::format_double(x) + " lies outside the beam");
  }
  const double lambda = mode_eigenvalue(beam.mode_index);
  return shape_unchecked(shape_sigma(lambda), lambda * x / beam.length);
}

double phi_bar(const BeamModel& beam, int intervals) {
  beam.validate();
  const double lambda = mode_eigenvalue(beam.mode_index);
  const double sigma = shape_sigma(lambda);
  const double tip = shape_unchecked(sigma, lambda);
  // integrate in the normalized coordinate s = x/L, which already carries the 1/L
  auto integrand = [&](double s) {
    const double r = shape_unchecked(sigma, lambda * s) / tip;
    return r * r;
  };
  return simpson(integrand, 0.0, 1.0, intervals);
}

double base_natural_frequency(const BeamModel& beam) {
  beam.validate();
  const double lambda = mode_eigenvalue(beam.mode_index);
  const double l2 = beam.length * beam.length;
  return lambda * lambda * std::sqrt(beam.ei / (beam.rho_a * l2 * l2));
}

double delta_omega_sq(const BeamModel& beam, const StiffnessProfile& profile) {
  beam.validate();
  const Eigen::Index n = profile.x.size();
  if (n < 2 || profile.k.size() != n) {
    throw ModelDomainError("stiffness profile needs at least two samples with matching k");
  }
  const double slack = 1e-9 * beam.length;
  if (std::abs(profile.x[0]) > slack || std::abs(profile.x[n - 1] - beam.length) > slack) {
    throw ModelDomainError("stiffness profile grid does not span the beam");
  }
  Eigen::VectorXd phi_sq(n);
  const double lambda = mode_eigenvalue(beam.mode_index);
  const double sigma = shape_sigma(lambda);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = shape_unchecked(sigma, lambda * profile.x[i] / beam.length);
    phi_sq[i] = p * p;
  }
  const double num = integrate_samples(profile.x, phi_sq.cwiseProduct(profile.k));
  const double den = integrate_samples(profile.x, phi_sq);
  return num / (beam.rho_a * den);
}

RayleighQuadrature::RayleighQuadrature(const BeamModel& beam, int intervals) : beam_(beam) {
  beam_.validate();
  nodes_ = uniform_nodes(0.0, beam_.length, intervals);
  const Eigen::VectorXd w = simpson_weights(0.0, beam_.length, intervals);
  const double lambda = mode_eigenvalue(beam_.mode_index);
  const double sigma = shape_sigma(lambda);
  Eigen::VectorXd phi_sq(nodes_.size());
  for (Eigen::Index i = 0; i < nodes_.size(); ++i) {
    const double p = shape_unchecked(sigma, lambda * nodes_[i] / beam_.length);
    phi_sq[i] = p * p;
  }
  modal_mass_ = beam_.rho_a * w.dot(phi_sq);
  modal_weights_ = w.cwiseProduct(phi_sq) / modal_mass_;
}

double RayleighQuadrature::delta_omega_sq(const Eigen::VectorXd& k_on_nodes) const {
  if (k_on_nodes.size() != nodes_.size()) {
    throw ModelDomainError("stiffness samples do not match the beam grid");
  }
  return modal_weights_.dot(k_on_nodes);
}

double RayleighQuadrature::delta_omega_sq_discrete(const Eigen::VectorXd& positions,
                                                   const Eigen::VectorXd& k) const {
  if (positions.size() != k.size()) {
    throw ModelDomainError("stiffness values do not match the magnet positions");
  }
  double s = 0.0;
  for (Eigen::Index j = 0; j < k.size(); ++j) {
    const double p = mode_shape(beam_, positions[j]);
    s += k[j] * p * p;
  }
  return s / modal_mass_;
}

}  // namespace mbsa
