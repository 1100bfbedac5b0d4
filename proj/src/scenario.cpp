#include "mbsa/scenario.hpp"

#include "mbsa/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace mbsa {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

void add_roughness(std::vector<Section>& truth, double amplitude, std::uint64_t seed) {
  if (!(amplitude > 0.0)) return;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  for (auto& s : truth) {
    for (Eigen::Index i = 0; i < s.size(); ++i) s.values[i] += dist(rng);
  }
}

}  // namespace

Scenario make_vdw_groove_scenario(const VdwGrooveParams& p) {
  if (p.segments < 1 || p.outer_segments < 1) throw ConfigError("segment counts must be positive");
  if (!(p.segment_width > 0.0)) throw ConfigError("segment_width must be positive");
  if (!(p.clearance > 0.0)) throw ConfigError("clearance must be positive");
  if (!(p.roughness >= 0.0) || !(p.roughness < p.clearance)) {
    throw ConfigError("roughness must be non-negative and below the clearance");
  }
  const LJMaterial mixed = mix_constants(p.fiber, p.surface);
  const InteractionConstants constants = lj_line_constants(mixed);
  BeamModel beam{p.beam_length, p.rho_a, p.ei, p.mode_index};
  beam.validate();
  VdwOptions options;
  options.gap_floor = p.gap_floor.value_or(0.5 * mixed.sigma_nm * kMetresPerNanometre);
  options.cutoff = p.cutoff;

  Scenario sc;
  sc.name = "vdw_groove";
  sc.physics = std::make_shared<VdwPhysics>(beam, constants, p.beam_intervals,
                                            p.points_per_segment, options);

  const double w = p.segment_width;
  const double span = p.outer_segments * w;
  const double width = p.segments * w;
  const double depth = p.segments * w;
  GrooveSpec spec;
  spec.surface_height = p.surface_height;
  spec.mouth = span;
  spec.width = width;
  spec.depth = depth;
  spec.outer_span = span;
  const Contour contour = make_groove(spec, p.segments);
  const std::vector<Contour> pieces =
      split(contour, {span, span + depth, span + depth + width, span + 2.0 * depth + width});
  const Orientation orient[5] = {Orientation::Perpendicular, Orientation::Parallel,
                                 Orientation::Perpendicular, Orientation::Parallel,
                                 Orientation::Perpendicular};
  const int counts[5] = {p.outer_segments, p.segments, p.segments, p.segments, p.outer_segments};
  std::vector<Section> nominal;
  double zeta = 0.0;
  for (int k = 0; k < 5; ++k) {
    Section s = discretize(pieces[static_cast<std::size_t>(k)], orient[k], counts[k]);
    s.zeta_start = zeta;
    zeta = s.zeta_end();
    nominal.push_back(s);
  }
  sc.truth = nominal;
  add_roughness(sc.truth, p.roughness, p.roughness_seed);
  sc.truth_contour = contour;

  const double top = p.surface_height;
  const double bottom = p.surface_height + depth;
  const double left = span;
  const double right = span + width;
  const double h = p.clearance;

  ScanPhase outer;
  outer.kind = PhaseKind::OuterSurface;
  outer.orientation = Orientation::Perpendicular;
  outer.nominal = {nominal[0], nominal[4]};
  outer.nominal_clearance = h;
  outer.beta = p.outer_beta;
  for (const auto& s : outer.nominal) {
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      outer.poses.push_back(BeamPose::at_angle({top - h, s.segment_centre(i)}, p.outer_tilt_deg * kDeg));
      outer.approach.push_back(1);
    }
  }

  auto sidewall = [&](PhaseKind kind, const Section& s, bool left_wall) {
    ScanPhase ph;
    ph.kind = kind;
    ph.orientation = Orientation::Parallel;
    ph.nominal = {s};
    ph.nominal_clearance = h;
    ph.beta = p.sidewall_beta;
    ph.depth.resize(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const double g1 = s.segment_centre(i);
      const double g2 = left_wall ? left + h : right - h;
      // lean the tip toward the wall
      const double angle = left_wall ? 90.0 + p.sidewall_tilt_deg : 90.0 - p.sidewall_tilt_deg;
      ph.poses.push_back(BeamPose::at_angle({g1, g2}, angle * kDeg));
      ph.approach.push_back(left_wall ? -1 : 1);
      ph.depth[i] = g1 - top;
    }
    return ph;
  };

  ScanPhase base;
  base.kind = PhaseKind::Base;
  base.orientation = Orientation::Perpendicular;
  base.nominal = {nominal[2]};
  base.nominal_clearance = h;
  base.beta = p.base_beta;
  for (Eigen::Index i = 0; i < nominal[2].size(); ++i) {
    const double g2 = nominal[2].segment_centre(i);
    // the clamp goes toward the far wall so the fiber leaves through the mouth
    const double angle = g2 < 0.5 * (left + right) ? 180.0 - p.base_tilt_deg : p.base_tilt_deg;
    base.poses.push_back(BeamPose::at_angle({bottom - h, g2}, angle * kDeg));
    base.approach.push_back(1);
  }

  sc.phases = {outer, sidewall(PhaseKind::LowerSidewall, nominal[1], true),
               sidewall(PhaseKind::UpperSidewall, nominal[3], false), base};
  sc.solver.beta = 0.5;
  sc.solver.max_iter = 2000;
  // parameters are ~1e-7 m, so the unit-floored relative step needs an absolute scale
  sc.solver.fd_step = 1e-6 * p.clearance;
  sc.tol_relative = 1e-9;
  sc.histogram_bin_width = 0.25;
  return sc;
}

Scenario make_magnetic_scenario(const MagneticScenarioParams& p) {
  if (p.magnets_per_array < 1) throw ConfigError("magnets_per_array must be positive");
  if (!(p.magnet_spacing > 0.0) || !(p.nominal_distance > 0.0) || !(p.wavelength > 0.0)) {
    throw ConfigError("magnet spacing, nominal distance and wavelength must be positive");
  }
  if (!(std::abs(p.amplitude) < p.nominal_distance)) {
    throw ConfigError("sinusoid amplitude must stay below the nominal distance");
  }
  const BeamModel beam = BeamModel::rectangular(p.beam_length, p.density, p.youngs_modulus, p.width,
                                                p.thickness);
  MagneticConstants k;
  k.c = p.c;
  k.n = p.n;
  k.omega0 = p.omega0.value_or(base_natural_frequency(beam));
  k.length_unit = p.length_unit;
  MagneticModel model(beam, MagnetArray::uniform(p.beam_magnets, p.beam_magnet_spacing, p.beam_length),
                      k, p.gap_floor);

  Scenario sc;
  sc.name = "magnetic";
  sc.physics = std::make_shared<MagneticPhysics>(model);

  const int m = p.magnets_per_array;
  const double s = p.magnet_spacing;
  const double dn = p.nominal_distance;
  const double two_pi = 2.0 * std::numbers::pi;

  Section row;
  row.orientation = Orientation::Perpendicular;
  row.values = Eigen::VectorXd::Constant(m, dn);
  row.free_start = 0.0;
  row.segment_width = s;
  row.zeta_start = 0.0;

  Section column;
  column.orientation = Orientation::Parallel;
  const double column_g2 = m * s + 0.5 * s;
  column.values = Eigen::VectorXd::Constant(m, column_g2);
  column.free_start = dn + 0.5 * s;
  column.segment_width = s;
  column.zeta_start = row.zeta_end();

  Section row_truth = row;
  Section column_truth = column;
  for (int i = 0; i < m; ++i) {
    row_truth.values[i] += p.amplitude * std::sin(two_pi * row.segment_centre(i) / p.wavelength);
    column_truth.values[i] += p.amplitude * std::sin(two_pi * (i * s) / p.wavelength);
  }
  sc.truth = {row_truth, column_truth};

  ScanPhase perp;
  perp.kind = PhaseKind::OuterSurface;
  perp.orientation = Orientation::Perpendicular;
  perp.nominal = {row};
  perp.nominal_clearance = dn;
  perp.beta = p.perpendicular_beta;
  for (int i = 0; i < m; ++i) {
    perp.poses.push_back(BeamPose::at_angle({0.0, row.segment_centre(i)}, p.perpendicular_tilt_deg * kDeg));
    perp.approach.push_back(1);
  }

  ScanPhase par;
  par.kind = PhaseKind::LowerSidewall;
  par.orientation = Orientation::Parallel;
  par.nominal = {column};
  par.nominal_clearance = dn;
  par.beta = p.parallel_beta;
  par.depth.resize(m);
  for (int i = 0; i < m; ++i) {
    const double g1 = column.segment_centre(i);
    par.poses.push_back(BeamPose::at_angle({g1, column_g2 + dn}, (90.0 + p.parallel_tilt_deg) * kDeg));
    par.approach.push_back(-1);
    par.depth[i] = g1 - dn;
  }
  sc.phases = {perp, par};
  sc.solver.beta = 0.5;
  sc.solver.max_iter = 1000;
  sc.tol_relative = 1e-4;
  sc.histogram_bin_width = 0.5;
  return sc;
}

// JSON loading -------------------------------------------------------------

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <typename T>
void read_opt(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json section(const json& root, const char* key) {
  return root.contains(key) ? root.at(key) : json::object();
}

void read_solver(const json& root, Scenario& sc) {
  const json s = section(root, "solver");
  check_keys(s, "solver", {"beta", "tol", "tol_relative", "max_iter", "fd_step", "check_condition",
                           "divergence_factor"});
  read(s, "beta", sc.solver.beta);
  read(s, "max_iter", sc.solver.max_iter);
  read(s, "fd_step", sc.solver.fd_step);
  read(s, "check_condition", sc.solver.check_condition);
  read(s, "divergence_factor", sc.solver.divergence_factor);
  if (s.contains("tol")) {
    sc.solver.tol = s.at("tol").get<double>();
    sc.tol_relative.reset();
  }
  if (s.contains("tol_relative")) sc.tol_relative = s.at("tol_relative").get<double>();
  if (sc.tol_relative && !(*sc.tol_relative > 0.0)) throw ConfigError("tol_relative must be positive");
}

void read_common(const json& root, Scenario& sc, std::uint64_t seed) {
  read_solver(root, sc);
  const json n = section(root, "noise");
  check_keys(n, "noise", {"sigma", "relative"});
  NoiseSpec noise;
  read(n, "sigma", noise.sigma);
  read(n, "relative", noise.relative);
  if (!(noise.sigma >= 0.0)) throw ConfigError("noise sigma must be non-negative");
  noise.seed = seed;
  if (noise.sigma > 0.0) sc.noise = noise;
  const json r = section(root, "report");
  check_keys(r, "report", {"histogram_bin_width"});
  read(r, "histogram_bin_width", sc.histogram_bin_width);
  if (!(sc.histogram_bin_width > 0.0)) throw ConfigError("histogram_bin_width must be positive");
  const json o = section(root, "output");
  check_keys(o, "output", {"directory"});
  read(o, "directory", sc.output_dir);
}

Scenario parse_vdw(const json& root, const std::string& base_dir, std::uint64_t seed) {
  check_keys(root, "scenario", {"name", "type", "seed", "materials", "beam", "groove", "scan",
                                "roughness", "phases", "solver", "noise", "report", "output"});
  VdwGrooveParams p;
  const json mat = section(root, "materials");
  check_keys(mat, "materials", {"table", "fiber", "surface"});
  if (mat.contains("table")) {
    std::filesystem::path table = mat.at("table").get<std::string>();
    if (table.is_relative()) table = std::filesystem::path(base_dir) / table;
    const auto materials = read_material_table(table.string());
    auto pick = [&](const char* key, LJMaterial& out) {
      if (!mat.contains(key)) return;
      const auto name = mat.at(key).get<std::string>();
      auto it = materials.find(name);
      if (it == materials.end()) throw ConfigError("material '" + name + "' not in table");
      out = it->second;
    };
    pick("fiber", p.fiber);
    pick("surface", p.surface);
  } else if (mat.contains("fiber") || mat.contains("surface")) {
    throw ConfigError("materials.fiber/surface need materials.table");
  }
  const json b = section(root, "beam");
  check_keys(b, "beam", {"length", "rho_a", "ei", "mode", "intervals"});
  read(b, "length", p.beam_length);
  read(b, "rho_a", p.rho_a);
  read(b, "ei", p.ei);
  read(b, "mode", p.mode_index);
  read(b, "intervals", p.beam_intervals);
  const json g = section(root, "groove");
  check_keys(g, "groove", {"segments", "outer_segments", "segment_width", "surface_height"});
  read(g, "segments", p.segments);
  read(g, "outer_segments", p.outer_segments);
  read(g, "segment_width", p.segment_width);
  read(g, "surface_height", p.surface_height);
  const json s = section(root, "scan");
  check_keys(s, "scan", {"clearance", "points_per_segment", "cutoff", "gap_floor", "outer_tilt_deg",
                         "sidewall_tilt_deg", "base_tilt_deg"});
  read(s, "clearance", p.clearance);
  read(s, "points_per_segment", p.points_per_segment);
  read(s, "cutoff", p.cutoff);
  read_opt(s, "gap_floor", p.gap_floor);
  read(s, "outer_tilt_deg", p.outer_tilt_deg);
  read(s, "sidewall_tilt_deg", p.sidewall_tilt_deg);
  read(s, "base_tilt_deg", p.base_tilt_deg);
  const json r = section(root, "roughness");
  check_keys(r, "roughness", {"amplitude"});
  read(r, "amplitude", p.roughness);
  p.roughness_seed = seed;
  const json ph = section(root, "phases");
  check_keys(ph, "phases", {"outer_surface", "sidewalls", "base"});
  auto beta_of = [&](const char* key, std::optional<double>& out) {
    if (!ph.contains(key)) return;
    check_keys(ph.at(key), std::string("phases.") + key, {"beta"});
    read_opt(ph.at(key), "beta", out);
  };
  beta_of("outer_surface", p.outer_beta);
  beta_of("sidewalls", p.sidewall_beta);
  beta_of("base", p.base_beta);

  Scenario sc = make_vdw_groove_scenario(p);
  read(root, "name", sc.name);
  read_common(root, sc, seed);
  return sc;
}

Scenario parse_magnetic(const json& root, std::uint64_t seed) {
  check_keys(root, "scenario", {"name", "type", "seed", "beam", "beam_magnets", "constants",
                                "topography", "scan", "phases", "solver", "noise", "report",
                                "output"});
  MagneticScenarioParams p;
  const json b = section(root, "beam");
  check_keys(b, "beam", {"length", "density", "youngs_modulus", "width", "thickness"});
  read(b, "length", p.beam_length);
  read(b, "density", p.density);
  read(b, "youngs_modulus", p.youngs_modulus);
  read(b, "width", p.width);
  read(b, "thickness", p.thickness);
  const json bm = section(root, "beam_magnets");
  check_keys(bm, "beam_magnets", {"count", "spacing"});
  read(bm, "count", p.beam_magnets);
  read(bm, "spacing", p.beam_magnet_spacing);
  const json k = section(root, "constants");
  check_keys(k, "constants", {"C", "n", "omega0", "length_unit"});
  read(k, "C", p.c);
  read(k, "n", p.n);
  read_opt(k, "omega0", p.omega0);
  read(k, "length_unit", p.length_unit);
  const json t = section(root, "topography");
  check_keys(t, "topography", {"magnets_per_array", "spacing", "amplitude", "wavelength",
                               "nominal_distance"});
  read(t, "magnets_per_array", p.magnets_per_array);
  read(t, "spacing", p.magnet_spacing);
  read(t, "amplitude", p.amplitude);
  read(t, "wavelength", p.wavelength);
  read(t, "nominal_distance", p.nominal_distance);
  const json s = section(root, "scan");
  check_keys(s, "scan", {"perpendicular_tilt_deg", "parallel_tilt_deg", "gap_floor"});
  read(s, "perpendicular_tilt_deg", p.perpendicular_tilt_deg);
  read(s, "parallel_tilt_deg", p.parallel_tilt_deg);
  read(s, "gap_floor", p.gap_floor);
  const json ph = section(root, "phases");
  check_keys(ph, "phases", {"perpendicular", "parallel"});
  auto beta_of = [&](const char* key, std::optional<double>& out) {
    if (!ph.contains(key)) return;
    check_keys(ph.at(key), std::string("phases.") + key, {"beta"});
    read_opt(ph.at(key), "beta", out);
  };
  beta_of("perpendicular", p.perpendicular_beta);
  beta_of("parallel", p.parallel_beta);

  Scenario sc = make_magnetic_scenario(p);
  read(root, "name", sc.name);
  read_common(root, sc, seed);
  return sc;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, const std::string& base_dir,
                        const ScenarioOverrides& overrides) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario JSON: ") + e.what());
  }
  try {
    if (!root.is_object()) throw ConfigError("scenario must be a JSON object");
    if (!root.contains("type")) throw ConfigError("scenario needs a 'type'");
    const auto type = root.at("type").get<std::string>();
    std::uint64_t seed = root.value("seed", std::uint64_t{0});
    if (overrides.seed) seed = *overrides.seed;
    Scenario sc;
    if (type == "vdw_groove") {
      sc = parse_vdw(root, base_dir, seed);
    } else if (type == "magnetic") {
      sc = parse_magnetic(root, seed);
    } else {
      throw ConfigError("unknown scenario type '" + type + "'");
    }
    if (overrides.beta) {
      sc.solver.beta = *overrides.beta;
      for (auto& ph : sc.phases) ph.beta.reset();
    }
    if (overrides.max_iter) sc.solver.max_iter = *overrides.max_iter;
    sc.solver.validate();
    for (const auto& ph : sc.phases) ph.validate();
    return sc;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path, const ScenarioOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::absolute(path).parent_path().string();
  return parse_scenario(ss.str(), dir, overrides);
}

}  // namespace mbsa
