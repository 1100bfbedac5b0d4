#include "mbsa/topography.hpp"

#include "mbsa/errors.hpp"
#include "mbsa/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>

namespace mbsa {

namespace {

double dist(const Point& a, const Point& b) { return std::hypot(a.g1 - b.g1, a.g2 - b.g2); }

double extent(const std::vector<Point>& pts) {
  double s = 0.0;
  for (const auto& p : pts) s = std::max({s, std::abs(p.g1), std::abs(p.g2)});
  return s;
}

double point_segment_distance(const Point& p, const Point& a, const Point& b) {
  const double dx = b.g1 - a.g1;
  const double dy = b.g2 - a.g2;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.g1 - a.g1) * dx + (p.g2 - a.g2) * dy) / len2, 0.0, 1.0);
  return std::hypot(p.g1 - (a.g1 + t * dx), p.g2 - (a.g2 + t * dy));
}

double distance_to_polyline(const Point& p, const Contour& c) {
  if (c.size() == 1) return dist(p, c.points[0]);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < c.size(); ++i) {
    best = std::min(best, point_segment_distance(p, c.points[i], c.points[i + 1]));
  }
  return best;
}

double directed_hausdorff(const Contour& a, const Contour& b, int sub) {
  double worst = 0.0;
  if (a.size() == 1) return distance_to_polyline(a.points[0], b);
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    for (int s = 0; s <= sub; ++s) {
      const double t = static_cast<double>(s) / sub;
      const Point p{a.points[i].g1 + t * (a.points[i + 1].g1 - a.points[i].g1),
                    a.points[i].g2 + t * (a.points[i + 1].g2 - a.points[i].g2)};
      worst = std::max(worst, distance_to_polyline(p, b));
    }
  }
  return worst;
}

}  // namespace

Contour Contour::from_points(const std::vector<Point>& pts) {
  Contour c;
  const double eps = 1e-12 * std::max(extent(pts), std::numeric_limits<double>::min());
  for (const auto& p : pts) {
    if (!c.points.empty() && dist(c.points.back(), p) <= eps) continue;
    c.zeta.push_back(c.points.empty() ? 0.0 : c.zeta.back() + dist(c.points.back(), p));
    c.points.push_back(p);
  }
  return c;
}

void Contour::validate() const {
  if (points.empty()) throw ConfigError("contour has no points");
  if (zeta.size() != points.size()) throw ConfigError("contour zeta and points differ in length");
  if (zeta.front() != 0.0) throw ConfigError("contour zeta must start at 0");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].g1) || !std::isfinite(points[i].g2) || !std::isfinite(zeta[i])) {
      throw ConfigError("contour sample " + std::to_string(i) + " is not finite");
    }
    if (i > 0 && !(zeta[i] > zeta[i - 1])) {
      throw ConfigError("contour zeta is not strictly increasing at sample " + std::to_string(i));
    }
  }
}

std::string to_string(Orientation o) {
  return o == Orientation::Perpendicular ? "perpendicular" : "parallel";
}

Orientation orientation_from_string(const std::string& s) {
  if (s == "perpendicular") return Orientation::Perpendicular;
  if (s == "parallel") return Orientation::Parallel;
  throw ConfigError("unknown orientation '" + s + "'");
}

Point make_point(Orientation o, double value, double free) {
  return o == Orientation::Perpendicular ? Point{value, free} : Point{free, value};
}

double value_of(Orientation o, const Point& p) {
  return o == Orientation::Perpendicular ? p.g1 : p.g2;
}

double free_of(Orientation o, const Point& p) {
  return o == Orientation::Perpendicular ? p.g2 : p.g1;
}

double Section::segment_begin(Eigen::Index i) const {
  return free_start + direction * segment_width * static_cast<double>(i);
}
double Section::segment_end(Eigen::Index i) const { return segment_begin(i + 1); }
double Section::segment_centre(Eigen::Index i) const {
  return free_start + direction * segment_width * (static_cast<double>(i) + 0.5);
}
Point Section::begin_point(Eigen::Index i) const {
  return make_point(orientation, values[i], segment_begin(i));
}
Point Section::end_point(Eigen::Index i) const {
  return make_point(orientation, values[i], segment_end(i));
}
Point Section::centre_point(Eigen::Index i) const {
  return make_point(orientation, values[i], segment_centre(i));
}

void Section::validate() const {
  if (values.size() < 1) throw ConfigError("section needs at least one segment");
  if (!(segment_width > 0.0) || !std::isfinite(segment_width)) {
    throw ConfigError("section segment_width must be positive");
  }
  if (direction != 1 && direction != -1) throw ConfigError("section direction must be +1 or -1");
  if (!values.allFinite() || !std::isfinite(free_start) || !std::isfinite(zeta_start)) {
    throw ConfigError("section contains non-finite values");
  }
}

void GrooveSpec::validate() const {
  if (!(width > 0.0)) throw ConfigError("groove width must be positive");
  if (!(depth > 0.0)) throw ConfigError("groove depth must be positive");
  if (!(outer_span >= 0.0)) throw ConfigError("groove outer_span must be non-negative");
  if (!std::isfinite(surface_height) || !std::isfinite(mouth)) {
    throw ConfigError("groove position must be finite");
  }
  if (outer_sinusoid) {
    if (!(outer_sinusoid->wavelength > 0.0)) throw ConfigError("sinusoid wavelength must be positive");
    if (!(std::abs(outer_sinusoid->amplitude) < depth)) {
      throw ConfigError("sinusoid amplitude must stay below the groove depth");
    }
  }
}

Contour make_groove(const GrooveSpec& spec, int samples_per_section) {
  spec.validate();
  if (samples_per_section < 1) throw ConfigError("samples_per_section must be at least 1");
  const double start = spec.mouth - spec.outer_span;
  auto surface = [&](double g2) {
    if (!spec.outer_sinusoid) return spec.surface_height;
    const auto& s = *spec.outer_sinusoid;
    return spec.surface_height +
           s.amplitude * std::sin(2.0 * std::numbers::pi * (g2 - start) / s.wavelength + s.phase);
  };
  const double bottom = spec.surface_height + spec.depth;
  const double right = spec.mouth + spec.width;
  const int m = samples_per_section;
  std::vector<Point> pts;
  auto lerp = [](double a, double b, int i, int n) {
    return i == n ? b : a + (b - a) * static_cast<double>(i) / n;
  };
  if (spec.outer_span > 0.0) {
    for (int i = 0; i <= m; ++i) {
      const double g2 = lerp(start, spec.mouth, i, m);
      pts.push_back({surface(g2), g2});
    }
  }
  const double top_left = surface(spec.mouth);
  for (int i = 0; i <= m; ++i) pts.push_back({lerp(top_left, bottom, i, m), spec.mouth});
  for (int i = 0; i <= m; ++i) pts.push_back({bottom, lerp(spec.mouth, right, i, m)});
  const double top_right = surface(right);
  for (int i = 0; i <= m; ++i) pts.push_back({lerp(bottom, top_right, i, m), right});
  if (spec.outer_span > 0.0) {
    for (int i = 0; i <= m; ++i) {
      const double g2 = lerp(right, right + spec.outer_span, i, m);
      pts.push_back({surface(g2), g2});
    }
  }
  return Contour::from_points(pts);
}

Section discretize(const Contour& contour, Orientation orientation, int n) {
  contour.validate();
  if (n < 1) throw ConfigError("discretize needs at least one segment");
  const double f0 = free_of(orientation, contour.points.front());
  const double f1 = free_of(orientation, contour.points.back());
  if (!(std::abs(f1 - f0) > 0.0)) {
    throw PartitionError("contour has no extent along the " + to_string(orientation) +
                         " free coordinate");
  }
  const int dir = f1 > f0 ? 1 : -1;
  const double span = std::abs(f1 - f0);
  const double w = span / n;

  Section s;
  s.orientation = orientation;
  s.values = Eigen::VectorXd::Zero(n);
  s.free_start = f0;
  s.segment_width = w;
  s.direction = dir;

  for (std::size_t k = 0; k + 1 < contour.size(); ++k) {
    const double ta = (free_of(orientation, contour.points[k]) - f0) * dir;
    const double tb = (free_of(orientation, contour.points[k + 1]) - f0) * dir;
    if (tb < ta) {
      throw PartitionError("contour reverses along the free coordinate at sample " +
                           std::to_string(k + 1) + "; not representable as " +
                           to_string(orientation));
    }
    if (tb == ta) continue;
    const double va = value_of(orientation, contour.points[k]);
    const double vb = value_of(orientation, contour.points[k + 1]);
    auto v_at = [&](double t) { return va + (vb - va) * (t - ta) / (tb - ta); };
    const int first = std::clamp(static_cast<int>(std::floor(ta / w)), 0, n - 1);
    const int last = std::clamp(static_cast<int>(std::floor(tb / w)), 0, n - 1);
    for (int i = first; i <= last; ++i) {
      const double lo = std::max(ta, i * w);
      const double hi = std::min(tb, (i + 1) * w);
      if (hi > lo) s.values[i] += 0.5 * (v_at(lo) + v_at(hi)) * (hi - lo);
    }
  }
  s.values /= w;
  return s;
}

Contour assemble(const std::vector<Section>& sections) {
  if (sections.empty()) throw AssemblyError("no sections to assemble");
  std::vector<Section> sorted = sections;
  for (const auto& s : sorted) s.validate();
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Section& a, const Section& b) { return a.zeta_start < b.zeta_start; });
  std::vector<Point> pts;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (k > 0) {
      const double expected = sorted[k - 1].zeta_end();
      const double tol = 1e-9 * std::max(sorted[k - 1].segment_width, sorted[k].segment_width);
      const double delta = sorted[k].zeta_start - expected;
      if (delta > tol) {
        throw AssemblyError("gap of " + io::format_double(delta) + " between sections " +
                            std::to_string(k - 1) + " and " + std::to_string(k));
      }
      if (delta < -tol) {
        throw AssemblyError("sections " + std::to_string(k - 1) + " and " + std::to_string(k) +
                            " overlap by " + io::format_double(-delta));
      }
    }
    const Section& s = sorted[k];
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      pts.push_back(s.begin_point(i));
      pts.push_back(s.end_point(i));
    }
  }
  return Contour::from_points(pts);
}

std::vector<Section> split(const Section& section, const std::vector<Eigen::Index>& cuts) {
  section.validate();
  std::vector<Section> out;
  Eigen::Index prev = 0;
  auto push = [&](Eigen::Index a, Eigen::Index b) {
    Section p = section;
    p.values = section.values.segment(a, b - a);
    p.free_start = section.segment_begin(a);
    p.zeta_start = section.zeta_start + section.segment_width * static_cast<double>(a);
    out.push_back(std::move(p));
  };
  for (Eigen::Index c : cuts) {
    if (c <= prev || c >= section.size()) {
      throw ConfigError("section cut indices must be increasing and interior");
    }
    push(prev, c);
    prev = c;
  }
  push(prev, section.size());
  return out;
}

std::vector<Contour> split(const Contour& contour, const std::vector<double>& zeta_cuts) {
  contour.validate();
  std::vector<Contour> out;
  std::vector<Point> current{contour.points.front()};
  std::size_t k = 1;
  double prev = 0.0;
  auto interp = [&](double z) {
    auto it = std::upper_bound(contour.zeta.begin(), contour.zeta.end(), z);
    const std::size_t j = std::clamp<std::size_t>(it - contour.zeta.begin(), 1, contour.size() - 1);
    const double t = (z - contour.zeta[j - 1]) / (contour.zeta[j] - contour.zeta[j - 1]);
    const Point& a = contour.points[j - 1];
    const Point& b = contour.points[j];
    return Point{a.g1 + t * (b.g1 - a.g1), a.g2 + t * (b.g2 - a.g2)};
  };
  for (double z : zeta_cuts) {
    if (!(z > prev && z < contour.length())) {
      throw ConfigError("contour cut points must be increasing and interior");
    }
    while (k < contour.size() && contour.zeta[k] < z) current.push_back(contour.points[k++]);
    const Point cut = (k < contour.size() && contour.zeta[k] == z) ? contour.points[k] : interp(z);
    current.push_back(cut);
    out.push_back(Contour::from_points(current));
    current = {cut};
    prev = z;
  }
  while (k < contour.size()) current.push_back(contour.points[k++]);
  out.push_back(Contour::from_points(current));
  return out;
}

Contour join(const std::vector<Contour>& pieces) {
  std::vector<Point> pts;
  for (const auto& p : pieces) pts.insert(pts.end(), p.points.begin(), p.points.end());
  if (pts.empty()) throw AssemblyError("no contour pieces to join");
  return Contour::from_points(pts);
}

double hausdorff_distance(const Contour& a, const Contour& b) {
  if (a.points.empty() || b.points.empty()) throw ConfigError("Hausdorff distance of empty contour");
  constexpr int kSub = 16;
  return std::max(directed_hausdorff(a, b, kSub), directed_hausdorff(b, a, kSub));
}

void write_contour_csv(std::ostream& os, const Contour& c) {
  io::write_csv_header(os, {"zeta", "g1", "g2"});
  for (std::size_t i = 0; i < c.size(); ++i) {
    io::write_csv_row(os, {c.zeta[i], c.points[i].g1, c.points[i].g2});
  }
}

Contour read_contour_csv(std::istream& is) {
  const io::CsvTable t = io::read_csv(is);
  const std::size_t cz = t.column("zeta");
  const std::size_t c1 = t.column("g1");
  const std::size_t c2 = t.column("g2");
  Contour c;
  for (const auto& row : t.rows) {
    c.zeta.push_back(row[cz]);
    c.points.push_back({row[c1], row[c2]});
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ParseError(std::string("contour CSV: ") + e.what());
  }
  return c;
}

std::string section_to_json(const Section& s) {
  nlohmann::json j;
  j["orientation"] = to_string(s.orientation);
  j["values"] = std::vector<double>(s.values.data(), s.values.data() + s.values.size());
  j["free_start"] = s.free_start;
  j["segment_width"] = s.segment_width;
  j["direction"] = s.direction;
  j["zeta_start"] = s.zeta_start;
  return j.dump(2);
}

Section section_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    Section s;
    s.orientation = orientation_from_string(j.at("orientation").get<std::string>());
    const auto v = j.at("values").get<std::vector<double>>();
    s.values = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    s.free_start = j.at("free_start").get<double>();
    s.segment_width = j.at("segment_width").get<double>();
    s.direction = j.at("direction").get<int>();
    s.zeta_start = j.value("zeta_start", 0.0);
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("section JSON: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("section JSON: ") + e.what());
  }
}

}  // namespace mbsa
