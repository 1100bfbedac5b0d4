#pragma once

#include "mbsa/harness.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace mbsa {

/// Desk-scale nanofiber groove. Lengths in metres.
struct VdwGrooveParams {
  LJMaterial fiber{0.392, 2.51040};     // silicon
  LJMaterial surface{0.293373, 0.163176};  // gold
  double beam_length = 200e-9;
  double rho_a = 6e-12;
  double ei = 8.9e-20;
  int mode_index = 1;
  int beam_intervals = 4096;

  int segments = 16;           // per groove phase
  int outer_segments = 8;      // per outer side
  double segment_width = 8e-9;
  double surface_height = 0.0;

  double clearance = 1e-9;
  int points_per_segment = 64;
  double cutoff = 20e-9;
  std::optional<double> gap_floor;  // defaults to half the mixed sigma

  double outer_tilt_deg = 30.0;     // from the surface
  double sidewall_tilt_deg = 30.0;  // from the wall
  double base_tilt_deg = 70.0;      // from the base

  double roughness = 0.3e-9;  // half-width of the uniform per-segment perturbation
  std::uint64_t roughness_seed = 1;

  std::optional<double> outer_beta = 1.0;
  std::optional<double> sidewall_beta = 1.5;
  std::optional<double> base_beta = 1.0;
};

/// Magnet row under a horizontal beam joined to a magnet column beside a vertical beam.
struct MagneticScenarioParams {
  double beam_length = 0.682;
  double density = 2700.0;
  double youngs_modulus = 69e9;
  double width = 0.021;
  double thickness = 0.001;

  int beam_magnets = 11;
  double beam_magnet_spacing = 0.005;

  double c = 67981.0;
  double n = 3.356380;
  std::optional<double> omega0;  // defaults to the bare beam's first natural frequency
  double length_unit = 1e-3;

  int magnets_per_array = 16;
  double magnet_spacing = 0.005;
  double amplitude = 0.0025;
  double wavelength = 0.04;
  double nominal_distance = 0.02;
  double gap_floor = 1e-3;

  double perpendicular_tilt_deg = 30.0;
  double parallel_tilt_deg = 30.0;  // from the column, tip leaning toward it
  std::optional<double> perpendicular_beta = 1.5;
  std::optional<double> parallel_beta = 1.5;
};

Scenario make_vdw_groove_scenario(const VdwGrooveParams& p);
Scenario make_magnetic_scenario(const MagneticScenarioParams& p);

struct ScenarioOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> beta;
  std::optional<int> max_iter;
};

/// Parses a scenario file. Relative paths inside it resolve against `base_dir`.
/// Unknown keys are rejected. Throws ConfigError or ParseError.
Scenario parse_scenario(const std::string& json_text, const std::string& base_dir,
                        const ScenarioOverrides& overrides = {});
Scenario load_scenario(const std::string& path, const ScenarioOverrides& overrides = {});

}  // namespace mbsa
