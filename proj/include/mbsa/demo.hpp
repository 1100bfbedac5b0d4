#pragma once

#include "mbsa/solver.hpp"

#include <vector>

namespace mbsa {

/// Scalar test problem: f(x) = sin(15x) + 8x + 3 with simplified model f_s(x) = 6x.
double demo_f(double x);
double demo_df(double x);
ModelPair demo_models();

struct GradientDescentTrace {
  std::vector<double> x;
  std::vector<double> f;
  bool stalled = false;  // step fell below the stall threshold before max_iter
};

/// Fixed-step gradient descent on f(x)^2.
GradientDescentTrace gradient_descent_f2(double x0, double step, int max_iter,
                                         double stall_step = 1e-14);

struct DemoResult {
  IterationTrace mbsa;
  GradientDescentTrace gd;
};

/// MBSA on the scalar problem from a zero working target (target value 0, tolerance
/// 1e-8 on |f|), plus the gradient-descent comparison run.
DemoResult demo_appendix_b(double beta, int max_iter, double x0_gd = 0.0, double gd_step = 1e-3,
                           int gd_max_iter = 1000000);

}  // namespace mbsa
