#pragma once

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mbsa {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Exact forward model f, simplified model f_s and the closed-form inverse of f_s.
/// All three take the scan positions `x` so that one pair can serve a whole scan.
/// Implementations must be pure.
struct ModelPair {
  std::function<Vector(const Vector& g, const Vector& x)> full_forward;
  std::function<Vector(const Vector& g, const Vector& x)> simplified_forward;
  std::function<Vector(const Vector& w, const Vector& x)> simplified_inverse;
};

/// Measured squared frequencies (or frequency shifts) at scan positions `x`.
struct Measurements {
  Vector x;
  Vector omega_sq;
};

struct SolverConfig {
  double beta = 0.5;
  double tol = 1e-10;
  int max_iter = 200;
  /// Relative finite-difference step; the absolute step is fd_step * max(1, |g_i|).
  double fd_step = 1e-6;
  bool check_condition = false;
  /// Divergence is declared once the error norm exceeds this multiple of the first one.
  double divergence_factor = 1e6;

  /// Throws ConfigError when any field is out of range.
  void validate() const;
};

enum class SolverStatus { Converged, MaxIterations, Diverged };

std::string to_string(SolverStatus s);

struct IterationRecord {
  Vector g;          // estimate g_k = f_s^-1(w_k)
  Vector omega_hat;  // working target w_k
  Vector error;      // e_k = w_d - f(g_k)
  double error_norm = 0.0;
};

struct ConditionReport {
  Matrix m;  // J_s^T J
  bool positive_definite = false;
  double min_eigenvalue = 0.0;
};

struct IterationTrace {
  std::vector<IterationRecord> records;
  SolverStatus status = SolverStatus::MaxIterations;
  std::optional<ConditionReport> condition;  // filled when check_condition is set

  const IterationRecord& final_record() const { return records.back(); }
  const Vector& final_estimate() const { return records.back().g; }
};

struct StepResult {
  Vector g;
  Vector error;
  Vector next_omega_hat;
};

/// One successive-approximation update starting from the working target `omega_hat`.
StepResult mbsa_step(const Vector& omega_hat, const ModelPair& models,
                     const Measurements& meas, double beta);

/// Iterates mbsa_step from `initial_target` (defaults to the measurements themselves)
/// until the error norm falls below `config.tol`.
IterationTrace run_mbsa(const ModelPair& models, const Measurements& meas,
                        const SolverConfig& config,
                        const std::optional<Vector>& initial_target = std::nullopt);

/// Central-difference Jacobian of `f` at `g`.
Matrix fd_jacobian(const std::function<Vector(const Vector&, const Vector&)>& f,
                   const Vector& g, const Vector& x, double fd_step);

/// Local convergence condition: positive definiteness of J_s^T J at `g_probe`.
ConditionReport check_convergence_condition(const ModelPair& models, const Vector& g_probe,
                                            const Vector& x, double fd_step);

/// Columns: iter, g_0..g_{N-1}, omega_hat_0..omega_hat_{m-1}, e_norm.
void write_trace_csv(std::ostream& os, const IterationTrace& trace);

/// Reads back what write_trace_csv produced (status and condition are not stored).
IterationTrace read_trace_csv(std::istream& is);

}  // namespace mbsa
