#pragma once

#include <Eigen/Dense>

namespace mbsa {

/// Euler–Bernoulli cantilever clamped at x = 0, free at x = length.
/// Static deflection is taken as zero throughout.
struct BeamModel {
  double length = 0.0;  // [m]
  double rho_a = 0.0;   // mass per unit length [kg/m]
  double ei = 0.0;      // bending rigidity [N m^2]
  int mode_index = 1;

  /// Solid rectangular section bending across `thickness`.
  static BeamModel rectangular(double length, double density, double youngs_modulus,
                               double width, double thickness, int mode_index = 1);

  void validate() const;  // throws ConfigError
};

/// Largest supported mode; beyond it the closed-form shape loses precision.
inline constexpr int kMaxModeIndex = 6;

/// Root of 1 + cos(l) cosh(l) = 0 for the given mode.
double mode_eigenvalue(int mode_index);

/// Clamped-free shape cosh - cos - s (sinh - sin), unnormalized (tip value ~2 for mode 1).
double mode_shape(const BeamModel& beam, double x);

/// (1/L) * integral of (phi(x)/phi(L))^2 over the beam.
double phi_bar(const BeamModel& beam, int intervals = 2048);

/// lambda^2 sqrt(EI / (rho_a L^4)) [rad/s].
double base_natural_frequency(const BeamModel& beam);

/// Added stiffness per unit length sampled on a grid spanning [0, length].
struct StiffnessProfile {
  Eigen::VectorXd x;
  Eigen::VectorXd k;
};

/// Rayleigh quotient of the added stiffness.
double delta_omega_sq(const BeamModel& beam, const StiffnessProfile& profile);

/// Precomputed Simpson grid over the beam with the modal weights
/// w_i phi(x_i)^2 / (rho_a * integral phi^2), so that the frequency shift of a profile
/// sampled on `nodes()` is a single dot product.
class RayleighQuadrature {
 public:
  explicit RayleighQuadrature(const BeamModel& beam, int intervals = 2048);

  const BeamModel& beam() const { return beam_; }
  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& modal_weights() const { return modal_weights_; }
  /// rho_a * integral of phi^2.
  double modal_mass() const { return modal_mass_; }

  double delta_omega_sq(const Eigen::VectorXd& k_on_nodes) const;

  /// Point stiffnesses k_j at positions x_j: sum k_j phi(x_j)^2 / modal_mass().
  double delta_omega_sq_discrete(const Eigen::VectorXd& positions,
                                 const Eigen::VectorXd& k) const;

 private:
  BeamModel beam_;
  Eigen::VectorXd nodes_;
  Eigen::VectorXd modal_weights_;
  double modal_mass_ = 0.0;
};

}  // namespace mbsa
