#pragma once

#include <Eigen/Dense>

#include <functional>

namespace mbsa {

/// Composite Simpson weights for `intervals` (even, >= 2) equal panels over [a, b].
Eigen::VectorXd simpson_weights(double a, double b, int intervals);

/// Uniform nodes a, a + h, ..., b.
Eigen::VectorXd uniform_nodes(double a, double b, int intervals);

/// Integrates tabulated samples. Uniform grids with an even number of panels use
/// Simpson; anything else falls back to the trapezoid rule.
double integrate_samples(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Composite Simpson of a callable.
double simpson(const std::function<double(double)>& f, double a, double b, int intervals);

/// Adaptive Simpson with Richardson correction, to absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 40);

}  // namespace mbsa
