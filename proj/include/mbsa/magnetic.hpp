#pragma once

#include "mbsa/beam.hpp"
#include "mbsa/topography.hpp"
#include "mbsa/vdw.hpp"

#include <Eigen/Dense>

#include <vector>

namespace mbsa {

/// Magnet centres along a line [m]. Beam and topography magnets face each other with
/// opposite poles, so every pair attracts.
struct MagnetArray {
  Eigen::VectorXd positions;

  /// `count` magnets at `spacing`, the last one at `last_position`.
  static MagnetArray uniform(int count, double spacing, double last_position);
  double spacing() const;
  void validate() const;  // throws ConfigError
};

/// Ideal antiparallel dipole pair, V = -C / r^3.
double dipole_potential(double r, double c);

/// Stiffness at each beam magnet from point sources given in the beam frame
/// (g1 along the beam from the clamp, g2 across it):
/// k_j = sum_i C n ((g1_i - x_j)^2 - (n+1) g2_i^2) / r^(n+4).
Eigen::VectorXd discrete_stiffness(const Eigen::VectorXd& beam_positions,
                                   const std::vector<Point>& sources_beam_frame, double c, double n,
                                   double gap_floor = 0.0);

struct MagneticConstants {
  double c = 67981.0;
  double n = 3.356380;
  double omega0 = 0.0;  // [rad/s]
  /// Length unit in which C is expressed [m]; gaps are divided by it before use.
  double length_unit = 1e-3;

  void validate() const;
};

/// Beam carrying point magnets, interacting with point magnets of the topography.
class MagneticModel {
 public:
  MagneticModel(BeamModel beam, MagnetArray beam_magnets, MagneticConstants constants,
                double gap_floor = 0.0, int intervals = 2048);

  const BeamModel& beam() const { return beam_; }
  const MagnetArray& beam_magnets() const { return magnets_; }
  const MagneticConstants& constants() const { return constants_; }

  /// Frequency shift from topography magnets at lab positions `sources`.
  double delta_omega_sq(const std::vector<Point>& sources, const BeamPose& pose) const;

  /// omega0^2 plus the shift.
  double omega_sq(const std::vector<Point>& sources, const BeamPose& pose) const;

  /// One squared frequency per pose; each section segment centre is a magnet.
  Eigen::VectorXd forward_magnetic(const std::vector<Section>& sections,
                                   const std::vector<BeamPose>& poses) const;

  /// A single magnet straight across from the tip at lateral distance `gap` [m].
  double single_magnet_omega_sq(double gap) const;

 private:
  BeamModel beam_;
  MagnetArray magnets_;
  MagneticConstants constants_;
  double gap_floor_;
  Eigen::VectorXd modal_factors_;  // phi(x_j)^2 / (rho_a * integral phi^2)
};

std::vector<Point> magnet_positions(const std::vector<Section>& sections);

struct CalibrationOptions {
  int max_iter = 200;
  double tol = 1e-10;  // on the relative parameter step
  double fd_step = 1e-7;
};

struct CalibrationResult {
  double c = 0.0;
  double n = 0.0;
  double omega0 = 0.0;
  double residual_norm = 0.0;
  double initial_residual_norm = 0.0;
  Eigen::VectorXd residuals;  // omega^2 data minus model
  int iterations = 0;
  std::vector<double> cost_history;  // accepted steps only
};

/// Fits (C, n, omega0) to single-magnet frequency data by damped Gauss–Newton on
/// (log C, log n, omega0). `model` supplies the beam, beam magnets and length unit;
/// its own constants are ignored.
CalibrationResult calibrate(const Eigen::VectorXd& gaps, const Eigen::VectorXd& measured_omega,
                            const MagneticConstants& initial, const MagneticModel& model,
                            const CalibrationOptions& options = {});

}  // namespace mbsa
