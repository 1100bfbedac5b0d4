#include "mbsa/vdw.hpp"

#include "mbsa/errors.hpp"
#include "mbsa/io.hpp"
#include "mbsa/quadrature.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mbsa {

void LJMaterial::validate() const {
  if (!(sigma_nm > 0.0) || !(epsilon_kj_per_mol > 0.0)) {
    throw ConfigError("LJ material needs positive sigma and epsilon");
  }
}

LJMaterial mix_constants(const LJMaterial& a, const LJMaterial& b) {
  a.validate();
  b.validate();
  return {0.5 * (a.sigma_nm + b.sigma_nm), std::sqrt(a.epsilon_kj_per_mol * b.epsilon_kj_per_mol)};
}

void InteractionConstants::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("interaction constant C must be positive");
  if (!(n > 0.0) || !std::isfinite(n)) throw ConfigError("interaction power n must be positive");
}

InteractionConstants lj_line_constants(const LJMaterial& mixed) {
  mixed.validate();
  const double sigma = mixed.sigma_nm * kMetresPerNanometre;
  const double eps = mixed.epsilon_kj_per_mol * kJoulePerKjPerMol;
  const double s6 = std::pow(sigma, 6);
  return {4.0 * eps * s6 / (sigma * sigma), 6.0};
}

std::map<std::string, LJMaterial> parse_material_table(const std::string& json_text) {
  std::map<std::string, LJMaterial> out;
  try {
    const auto j = nlohmann::json::parse(json_text);
    if (!j.is_object()) throw ParseError("material table must be a JSON object");
    for (const auto& [name, entry] : j.items()) {
      LJMaterial m{entry.at("sigma_nm").get<double>(), entry.at("epsilon_kJ_per_mol").get<double>()};
      try {
        m.validate();
      } catch (const ConfigError& e) {
        throw ParseError("material '" + name + "': " + e.what());
      }
      out.emplace(name, m);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("material table: ") + e.what());
  }
  return out;
}

std::map<std::string, LJMaterial> read_material_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open material table '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_material_table(ss.str());
}

BeamPose BeamPose::at_angle(Point tip, double angle) {
  return {tip, {std::sin(angle), std::cos(angle)}};
}

void BeamPose::validate() const {
  const double norm = std::hypot(axis.g1, axis.g2);
  if (!(std::abs(norm - 1.0) < 1e-9)) throw ConfigError("beam axis must be a unit vector");
  if (!std::isfinite(tip.g1) || !std::isfinite(tip.g2)) throw ConfigError("beam tip must be finite");
}

void SourceSet::append(const SourceSet& other) {
  points.insert(points.end(), other.points.begin(), other.points.end());
  weights.insert(weights.end(), other.weights.begin(), other.weights.end());
}

namespace {

void add_edge(SourceSet& out, const Point& a, const Point& b, int panels) {
  const double len = std::hypot(b.g1 - a.g1, b.g2 - a.g2);
  if (len <= 0.0) return;
  const Eigen::VectorXd w = simpson_weights(0.0, len, panels);
  for (int i = 0; i <= panels; ++i) {
    const double t = static_cast<double>(i) / panels;
    out.points.push_back({a.g1 + t * (b.g1 - a.g1), a.g2 + t * (b.g2 - a.g2)});
    out.weights.push_back(w[i]);
  }
}

int even_at_least(int m) {
  m = std::max(m, 2);
  return m + (m % 2);
}

// r^-(n+4) with a fast path for even integer exponents
struct InversePower {
  explicit InversePower(double n) : half_exp(0.5 * (n + 4.0)) {
    const double r = std::round(half_exp);
    integral = (r == half_exp && r >= 1.0 && r <= 64.0);
    int_exp = static_cast<int>(r);
  }
  double operator()(double r2) const {
    if (!integral) return std::pow(r2, -half_exp);
    double p = r2;
    for (int i = 1; i < int_exp; ++i) p *= r2;
    return 1.0 / p;
  }
  double half_exp;
  bool integral = false;
  int int_exp = 0;
};

struct BeamFrame {
  Point clamp;
  Point axis;
  Point normal;
  double length;

  BeamFrame(const BeamPose& pose, double len)
      : clamp(pose.clamp(len)), axis(pose.axis), normal{-pose.axis.g2, pose.axis.g1}, length(len) {}

  void to_beam(const Point& p, double& s1, double& s2) const {
    const double d1 = p.g1 - clamp.g1;
    const double d2 = p.g2 - clamp.g2;
    s1 = d1 * axis.g1 + d2 * axis.g2;
    s2 = d1 * normal.g1 + d2 * normal.g2;
  }
  double distance(double s1, double s2) const {
    const double c = std::clamp(s1, 0.0, length);
    return std::hypot(s1 - c, s2);
  }
};

// Visits (node index, kernel value) pairs for each source, honouring floor and cutoff.
template <typename Visit>
void for_each_pair(const SourceSet& sources, const InteractionConstants& constants,
                   const BeamPose& pose, const RayleighQuadrature& quad, const VdwOptions& options,
                   Visit&& visit) {
  constants.validate();
  pose.validate();
  if (sources.weights.size() != sources.points.size()) {
    throw ConfigError("source weights and points differ in length");
  }
  const Eigen::VectorXd& nodes = quad.nodes();
  const double length = quad.beam().length;
  const Eigen::Index last = nodes.size() - 1;
  const double h = length / static_cast<double>(last);
  const BeamFrame frame(pose, length);
  const InversePower inv(constants.n);
  const double cn = constants.c * constants.n;
  const double np1 = constants.n + 1.0;
  const double cutoff = options.cutoff;

  for (std::size_t s = 0; s < sources.size(); ++s) {
    double s1 = 0.0;
    double s2 = 0.0;
    frame.to_beam(sources.points[s], s1, s2);
    const double d = frame.distance(s1, s2);
    if (d < options.gap_floor) {
      throw SingularityError("contour sample " + std::to_string(s) + " lies " +
                                 io::format_double(d) + " from the fiber, below the gap floor " +
                                 io::format_double(options.gap_floor),
                             s);
    }
    Eigen::Index lo = 0;
    Eigen::Index hi = last;
    if (std::isfinite(cutoff)) {
      if (std::abs(s2) >= cutoff) continue;
      const double reach = std::sqrt(cutoff * cutoff - s2 * s2);
      const double a = (s1 - reach) / h;
      const double b = (s1 + reach) / h;
      if (b < 0.0 || a > static_cast<double>(last)) continue;
      lo = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::ceil(a)));
      hi = std::min<Eigen::Index>(last, static_cast<Eigen::Index>(std::floor(b)));
    }
    const double ws = sources.weights[s];
    const double y2 = s2 * s2;
    for (Eigen::Index i = lo; i <= hi; ++i) {
      const double a = s1 - nodes[i];
      const double r2 = a * a + y2;
      visit(i, -ws * cn * (np1 * y2 - a * a) * inv(r2));
    }
  }
}

}  // namespace

SourceSet sources_from_contour(const Contour& contour, double panel_length) {
  if (!(panel_length > 0.0)) throw ConfigError("panel_length must be positive");
  SourceSet out;
  for (std::size_t i = 0; i + 1 < contour.size(); ++i) {
    const Point& a = contour.points[i];
    const Point& b = contour.points[i + 1];
    const double len = std::hypot(b.g1 - a.g1, b.g2 - a.g2);
    add_edge(out, a, b, even_at_least(static_cast<int>(std::ceil(len / panel_length))));
  }
  return out;
}

SourceSet sources_from_sections(const std::vector<Section>& sections, int points_per_segment) {
  if (points_per_segment < 2) throw ConfigError("points_per_segment must be at least 2");
  const int panels = even_at_least(points_per_segment);
  SourceSet out;
  for (const auto& s : sections) {
    s.validate();
    for (Eigen::Index i = 0; i < s.size(); ++i) add_edge(out, s.begin_point(i), s.end_point(i), panels);
  }
  return out;
}

StiffnessProfile stiffness_profile(const SourceSet& sources, const InteractionConstants& constants,
                                   const BeamPose& pose, const RayleighQuadrature& quad,
                                   const VdwOptions& options) {
  StiffnessProfile p;
  p.x = quad.nodes();
  p.k = Eigen::VectorXd::Zero(p.x.size());
  for_each_pair(sources, constants, pose, quad, options,
                [&](Eigen::Index i, double v) { p.k[i] += v; });
  return p;
}

StiffnessProfile stiffness_profile(const Contour& contour, const InteractionConstants& constants,
                                   const BeamPose& pose, const RayleighQuadrature& quad,
                                   double panel_length, const VdwOptions& options) {
  return stiffness_profile(sources_from_contour(contour, panel_length), constants, pose, quad,
                           options);
}

double vdw_delta_omega_sq(const SourceSet& sources, const InteractionConstants& constants,
                          const BeamPose& pose, const RayleighQuadrature& quad,
                          const VdwOptions& options) {
  const Eigen::VectorXd& mw = quad.modal_weights();
  double sum = 0.0;
  for_each_pair(sources, constants, pose, quad, options,
                [&](Eigen::Index i, double v) { sum += mw[i] * v; });
  return sum;
}

void ScanGeometry::validate() const {
  if (poses.empty()) throw ConfigError("scan geometry has no positions");
  for (const auto& p : poses) p.validate();
  if (points_per_segment < 16) throw ConfigError("points_per_segment must be at least 16");
  if (!(options.gap_floor >= 0.0)) throw ConfigError("gap_floor must be non-negative");
  if (!(options.cutoff > 0.0)) throw ConfigError("cutoff must be positive");
}

Eigen::VectorXd forward_vdw(const std::vector<Section>& sections, const ScanGeometry& geometry,
                            const InteractionConstants& constants, const RayleighQuadrature& quad) {
  geometry.validate();
  const SourceSet sources = sources_from_sections(sections, geometry.points_per_segment);
  Eigen::VectorXd out(static_cast<Eigen::Index>(geometry.poses.size()));
  for (std::size_t i = 0; i < geometry.poses.size(); ++i) {
    try {
      out[static_cast<Eigen::Index>(i)] =
          vdw_delta_omega_sq(sources, constants, geometry.poses[i], quad, geometry.options);
    } catch (const SingularityError& e) {
      throw SingularityError("scan position " + std::to_string(i) + ": " + e.what(), i);
    }
  }
  return out;
}

void SimplifiedContext::validate() const {
  if (!(c > 0.0) || !(n > 0.0)) throw ConfigError("simplified model needs positive C and n");
  if (!(segment_width > 0.0)) throw ConfigError("simplified model needs positive segment width");
  if (!(phi_bar > 0.0)) throw ConfigError("simplified model needs positive phi_bar");
  if (!(gain > 0.0) || !std::isfinite(gain)) throw ConfigError("simplified gain must be positive");
  if (orientation == Orientation::Perpendicular && (!(rho_a > 0.0) || !(beam_length > 0.0))) {
    throw ConfigError("perpendicular simplified model needs positive rho_a and beam length");
  }
}

namespace {

// Numerator of the power law, so that the model reads -K / gap^n.
double simplified_numerator(double depth, const SimplifiedContext& ctx) {
  if (ctx.orientation == Orientation::Perpendicular) {
    return ctx.gain * ctx.segment_width * (ctx.c / (ctx.n + 1.0)) / (ctx.phi_bar * ctx.rho_a);
  }
  if (!(depth > 0.0)) {
    throw ModelDomainError("parallel simplified model needs a positive depth, got " +
                           io::format_double(depth));
  }
  return ctx.gain * ctx.c * ctx.segment_width * depth / ctx.phi_bar;
}

}  // namespace

double simplified_forward(double g, double depth, const SimplifiedContext& ctx) {
  ctx.validate();
  const double gap = ctx.orientation == Orientation::Perpendicular ? g - ctx.beam_length : g;
  if (!(gap > 0.0)) {
    throw ModelDomainError("simplified model needs a positive gap, got " + io::format_double(gap));
  }
  return -simplified_numerator(depth, ctx) / std::pow(gap, ctx.n);
}

double simplified_invert(double delta_omega_sq, double depth, const SimplifiedContext& ctx) {
  ctx.validate();
  if (!(delta_omega_sq < 0.0)) {
    throw ModelDomainError("simplified inverse needs a negative frequency shift, got " +
                           io::format_double(delta_omega_sq));
  }
  const double gap = std::pow(simplified_numerator(depth, ctx) / -delta_omega_sq, 1.0 / ctx.n);
  return ctx.orientation == Orientation::Perpendicular ? ctx.beam_length + gap : gap;
}

}  // namespace mbsa
