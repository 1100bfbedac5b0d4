#include "mbsa/demo.hpp"

#include <cmath>

namespace mbsa {

double demo_f(double x) { return std::sin(15.0 * x) + 8.0 * x + 3.0; }
double demo_df(double x) { return 15.0 * std::cos(15.0 * x) + 8.0; }

ModelPair demo_models() {
  ModelPair m;
  m.full_forward = [](const Vector& g, const Vector&) {
    return Vector(g.unaryExpr([](double v) { return demo_f(v); }));
  };
  m.simplified_forward = [](const Vector& g, const Vector&) { return Vector(6.0 * g); };
  m.simplified_inverse = [](const Vector& w, const Vector&) { return Vector(w / 6.0); };
  return m;
}

GradientDescentTrace gradient_descent_f2(double x0, double step, int max_iter, double stall_step) {
  GradientDescentTrace t;
  double x = x0;
  t.x.push_back(x);
  t.f.push_back(demo_f(x));
  for (int k = 0; k < max_iter; ++k) {
    const double dx = -step * 2.0 * demo_f(x) * demo_df(x);
    x += dx;
    t.x.push_back(x);
    t.f.push_back(demo_f(x));
    if (std::abs(dx) < stall_step) {
      t.stalled = true;
      break;
    }
  }
  return t;
}

DemoResult demo_appendix_b(double beta, int max_iter, double x0_gd, double gd_step, int gd_max_iter) {
  SolverConfig cfg;
  cfg.beta = beta;
  cfg.max_iter = max_iter;
  cfg.tol = 1e-8;
  Measurements meas{Vector::Zero(1), Vector::Zero(1)};
  DemoResult r;
  r.mbsa = run_mbsa(demo_models(), meas, cfg, Vector::Zero(1));
  r.gd = gradient_descent_f2(x0_gd, gd_step, gd_max_iter);
  return r;
}

}  // namespace mbsa
