#include "mbsa/quadrature.hpp"

#include "mbsa/errors.hpp"

#include <cmath>

namespace mbsa {

Eigen::VectorXd simpson_weights(double a, double b, int intervals) {
  if (intervals < 2 || intervals % 2 != 0) {
    throw ConfigError("Simpson rule needs an even number of intervals >= 2");
  }
  const double h = (b - a) / intervals;
  Eigen::VectorXd w(intervals + 1);
  for (int i = 0; i <= intervals; ++i) {
    if (i == 0 || i == intervals) {
      w[i] = 1.0;
    } else {
      w[i] = (i % 2 == 1) ? 4.0 : 2.0;
    }
  }
  return w * (h / 3.0);
}

Eigen::VectorXd uniform_nodes(double a, double b, int intervals) {
  if (intervals < 1) throw ConfigError("grid needs at least one interval");
  Eigen::VectorXd x(intervals + 1);
  const double h = (b - a) / intervals;
  for (int i = 0; i <= intervals; ++i) x[i] = a + h * i;
  x[intervals] = b;
  return x;
}

double integrate_samples(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ConfigError("quadrature needs matching sample vectors with at least two points");
  }
  const Eigen::Index panels = x.size() - 1;
  for (Eigen::Index i = 0; i < panels; ++i) {
    if (!(x[i + 1] > x[i])) throw ModelDomainError("quadrature grid is not strictly increasing", i);
  }
  const double h = (x[panels] - x[0]) / static_cast<double>(panels);
  bool uniform = panels % 2 == 0;
  for (Eigen::Index i = 0; uniform && i < panels; ++i) {
    uniform = std::abs((x[i + 1] - x[i]) - h) <= 1e-9 * h;
  }
  if (uniform) {
    return simpson_weights(x[0], x[panels], static_cast<int>(panels)).dot(y);
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < panels; ++i) s += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
  return s;
}

double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
  const Eigen::VectorXd x = uniform_nodes(a, b, intervals);
  const Eigen::VectorXd w = simpson_weights(a, b, intervals);
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += w[i] * f(x[i]);
  return s;
}

namespace {

double adaptive_step(const std::function<double(double)>& f, double a, double b, double fa,
                     double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace mbsa
