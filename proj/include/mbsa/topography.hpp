#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mbsa {

/// 2D point in the lab frame. g1 is the depth coordinate (grows into the specimen),
/// g2 the lateral coordinate.
struct Point {
  double g1 = 0.0;
  double g2 = 0.0;
};

/// Polyline with arc-length coordinate zeta (zeta[0] = 0).
struct Contour {
  std::vector<double> zeta;
  std::vector<Point> points;

  /// Builds zeta from cumulative edge lengths; consecutive duplicate points are dropped.
  static Contour from_points(const std::vector<Point>& pts);

  double length() const { return zeta.empty() ? 0.0 : zeta.back(); }
  std::size_t size() const { return points.size(); }
  void validate() const;  // throws ConfigError
};

/// Perpendicular: contour written as (g1 = value, g2 = free).
/// Parallel: contour written as (g1 = free, g2 = value).
enum class Orientation { Perpendicular, Parallel };

std::string to_string(Orientation o);
Orientation orientation_from_string(const std::string& s);  // throws ConfigError

Point make_point(Orientation o, double value, double free);
double value_of(Orientation o, const Point& p);
double free_of(Orientation o, const Point& p);

/// Piecewise-constant contour section. Segment i covers the free-coordinate interval
/// starting at free_start + direction * i * segment_width.
struct Section {
  Orientation orientation = Orientation::Perpendicular;
  Eigen::VectorXd values;
  double free_start = 0.0;
  double segment_width = 0.0;
  int direction = 1;        // +1 or -1
  double zeta_start = 0.0;  // placement along the assembled contour

  Eigen::Index size() const { return values.size(); }
  double zeta_end() const { return zeta_start + segment_width * static_cast<double>(size()); }
  double segment_begin(Eigen::Index i) const;
  double segment_end(Eigen::Index i) const;
  double segment_centre(Eigen::Index i) const;
  Point begin_point(Eigen::Index i) const;
  Point end_point(Eigen::Index i) const;
  Point centre_point(Eigen::Index i) const;

  void validate() const;  // throws ConfigError
};

struct Sinusoid {
  double amplitude = 0.0;
  double wavelength = 0.0;
  double phase = 0.0;  // [rad]
};

/// Rectangular groove cut into a surface at g1 = surface_height. The outer surface
/// extends outer_span to each side of the mouth [mouth, mouth + width].
struct GrooveSpec {
  double surface_height = 0.0;
  double mouth = 0.0;
  double width = 0.0;
  double depth = 0.0;
  double outer_span = 0.0;
  /// Optional undulation of the outer surface, measured from the contour start.
  std::optional<Sinusoid> outer_sinusoid;

  void validate() const;  // throws ConfigError
};

/// Outer-left, lower sidewall, base, upper sidewall, outer-right.
/// Flat pieces are sampled with `samples_per_section` edges each.
Contour make_groove(const GrooveSpec& spec, int samples_per_section);

/// Segment means of `contour` over N equal free-coordinate intervals between the
/// first and last contour points. The contour must be monotone in the free coordinate.
Section discretize(const Contour& contour, Orientation orientation, int n);

/// Joins sections (ordered by zeta_start) into one staircase contour.
Contour assemble(const std::vector<Section>& sections);

/// Splits a section at the given segment indices (strictly increasing, interior).
std::vector<Section> split(const Section& section, const std::vector<Eigen::Index>& cuts);

/// Splits a contour at arc-length cut points and joins pieces back.
std::vector<Contour> split(const Contour& contour, const std::vector<double>& zeta_cuts);
Contour join(const std::vector<Contour>& pieces);

/// Symmetric Hausdorff distance between two polylines (edges included).
double hausdorff_distance(const Contour& a, const Contour& b);

/// CSV with columns zeta, g1, g2.
void write_contour_csv(std::ostream& os, const Contour& c);
Contour read_contour_csv(std::istream& is);

std::string section_to_json(const Section& s);
Section section_from_json(const std::string& text);

}  // namespace mbsa
