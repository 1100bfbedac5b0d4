#pragma once

#include "mbsa/beam.hpp"
#include "mbsa/topography.hpp"

#include <Eigen/Dense>

#include <limits>
#include <map>
#include <string>
#include <vector>

namespace mbsa {

inline constexpr double kAvogadro = 6.02214076e23;
inline constexpr double kMetresPerNanometre = 1e-9;
/// kJ/mol to J per interacting pair.
inline constexpr double kJoulePerKjPerMol = 1e3 / kAvogadro;

struct LJMaterial {
  double sigma_nm = 0.0;
  double epsilon_kj_per_mol = 0.0;

  void validate() const;  // throws ConfigError
};

/// Lorentz–Berthelot mixing: arithmetic mean of sigma, geometric mean of epsilon.
LJMaterial mix_constants(const LJMaterial& a, const LJMaterial& b);

/// Attractive power-law interaction V = -C / r^n per unit source measure.
struct InteractionConstants {
  double c = 0.0;
  double n = 6.0;

  void validate() const;  // throws ConfigError
};

/// SI constants of the attractive LJ term for line sources with one interacting site
/// per sigma on both the fiber and the surface: C = 4 eps sigma^6 / sigma^2, n = 6.
InteractionConstants lj_line_constants(const LJMaterial& mixed);

/// JSON object: name -> {"sigma_nm": ..., "epsilon_kJ_per_mol": ...}.
std::map<std::string, LJMaterial> parse_material_table(const std::string& json_text);
std::map<std::string, LJMaterial> read_material_table(const std::string& path);

/// Placement of the straight fiber: tip position and unit axis pointing from the
/// clamp to the tip, both in the lab frame.
struct BeamPose {
  Point tip;
  Point axis{1.0, 0.0};

  Point clamp(double length) const { return {tip.g1 - length * axis.g1, tip.g2 - length * axis.g2}; }
  /// Axis at `angle` [rad] from the +g2 direction, rotated toward +g1.
  static BeamPose at_angle(Point tip, double angle);
  void validate() const;  // throws ConfigError unless axis is unit length
};

/// Weighted quadrature nodes of the interacting surface.
struct SourceSet {
  std::vector<Point> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
  void append(const SourceSet& other);
};

/// Composite Simpson nodes on every edge of a polyline, with panels no longer than
/// `panel_length`.
SourceSet sources_from_contour(const Contour& contour, double panel_length);

/// Flat pieces of piecewise-constant sections, `points_per_segment` panels per segment
/// (rounded up to even). Risers between unequal neighbours are not sources.
SourceSet sources_from_sections(const std::vector<Section>& sections, int points_per_segment);

struct VdwOptions {
  /// Sources closer than this to the fiber raise SingularityError.
  double gap_floor = 0.0;
  /// Source/node pairs farther apart than this are skipped.
  double cutoff = std::numeric_limits<double>::infinity();
};

/// Added stiffness per unit length on the beam grid of `quad`.
StiffnessProfile stiffness_profile(const SourceSet& sources, const InteractionConstants& constants,
                                   const BeamPose& pose, const RayleighQuadrature& quad,
                                   const VdwOptions& options = {});

StiffnessProfile stiffness_profile(const Contour& contour, const InteractionConstants& constants,
                                   const BeamPose& pose, const RayleighQuadrature& quad,
                                   double panel_length, const VdwOptions& options = {});

/// Frequency shift at one pose; equals the Rayleigh quotient of stiffness_profile.
double vdw_delta_omega_sq(const SourceSet& sources, const InteractionConstants& constants,
                          const BeamPose& pose, const RayleighQuadrature& quad,
                          const VdwOptions& options = {});

struct ScanGeometry {
  std::vector<BeamPose> poses;
  int points_per_segment = 64;
  VdwOptions options;

  void validate() const;
};

/// One frequency shift per pose from the flat pieces of `sections`.
Eigen::VectorXd forward_vdw(const std::vector<Section>& sections, const ScanGeometry& geometry,
                            const InteractionConstants& constants, const RayleighQuadrature& quad);

/// Closed-form single-segment model. Perpendicular: g is the beam-frame coordinate of
/// the surface along the fiber axis (g > beam_length). Parallel: g is the lateral gap and
/// `depth` the insertion depth. `gain` scales the whole expression.
struct SimplifiedContext {
  Orientation orientation = Orientation::Perpendicular;
  double c = 0.0;
  double n = 6.0;
  double segment_width = 0.0;
  double phi_bar = 0.25;
  double rho_a = 0.0;
  double beam_length = 0.0;
  double gain = 1.0;

  void validate() const;
};

double simplified_forward(double g, double depth, const SimplifiedContext& ctx);
double simplified_invert(double delta_omega_sq, double depth, const SimplifiedContext& ctx);

}  // namespace mbsa
