#include "mbsa/solver.hpp"

#include "mbsa/errors.hpp"
#include "mbsa/io.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

namespace mbsa {

void SolverConfig::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw ConfigError("beta must be positive and finite, got " + io::format_double(beta));
  }
  if (!(tol > 0.0)) throw ConfigError("tol must be positive, got " + io::format_double(tol));
  if (max_iter < 1) throw ConfigError("max_iter must be at least 1");
  if (!(fd_step > 0.0)) throw ConfigError("fd_step must be positive");
  if (!(divergence_factor > 1.0)) throw ConfigError("divergence_factor must exceed 1");
}

std::string to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::Converged: return "converged";
    case SolverStatus::MaxIterations: return "max_iterations";
    case SolverStatus::Diverged: return "diverged";
  }
  return "unknown";
}

StepResult mbsa_step(const Vector& omega_hat, const ModelPair& models, const Measurements& meas,
                     double beta) {
  if (omega_hat.size() != meas.omega_sq.size()) {
    throw ConfigError("working target and measurement vector differ in length");
  }
  StepResult out;
  out.g = models.simplified_inverse(omega_hat, meas.x);
  const Vector predicted = models.full_forward(out.g, meas.x);
  if (predicted.size() != meas.omega_sq.size()) {
    throw ModelDomainError("full model returned " + std::to_string(predicted.size()) +
                           " values for " + std::to_string(meas.omega_sq.size()) +
                           " measurements");
  }
  out.error = meas.omega_sq - predicted;
  out.next_omega_hat = omega_hat + beta * out.error;
  return out;
}

IterationTrace run_mbsa(const ModelPair& models, const Measurements& meas,
                        const SolverConfig& config, const std::optional<Vector>& initial_target) {
  config.validate();
  if (meas.omega_sq.size() == 0) throw ConfigError("measurement set is empty");
  if (meas.x.size() != meas.omega_sq.size()) {
    throw ConfigError("scan positions and readings differ in length");
  }

  IterationTrace trace;
  Vector omega_hat = initial_target ? *initial_target : meas.omega_sq;
  double initial_norm = 0.0;

  for (int k = 1; k <= config.max_iter; ++k) {
    StepResult step = mbsa_step(omega_hat, models, meas, config.beta);
    IterationRecord rec;
    rec.error_norm = step.error.norm();
    rec.g = std::move(step.g);
    rec.omega_hat = std::move(omega_hat);
    rec.error = std::move(step.error);
    const double norm = rec.error_norm;
    trace.records.push_back(std::move(rec));

    if (k == 1 && config.check_condition) {
      trace.condition = check_convergence_condition(models, trace.records.front().g, meas.x,
                                                    config.fd_step);
    }
    if (!std::isfinite(norm)) {
      trace.status = SolverStatus::Diverged;
      return trace;
    }
    if (norm <= config.tol) {
      trace.status = SolverStatus::Converged;
      return trace;
    }
    if (k == 1) {
      initial_norm = norm;
    } else if (norm > config.divergence_factor * initial_norm) {
      trace.status = SolverStatus::Diverged;
      return trace;
    }
    omega_hat = std::move(step.next_omega_hat);
  }
  trace.status = SolverStatus::MaxIterations;
  return trace;
}

Matrix fd_jacobian(const std::function<Vector(const Vector&, const Vector&)>& f, const Vector& g,
                   const Vector& x, double fd_step) {
  const Vector f0 = f(g, x);
  Matrix jac(f0.size(), g.size());
  Vector probe = g;
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    const double h = fd_step * std::max(1.0, std::abs(g[j]));
    probe[j] = g[j] + h;
    const Vector up = f(probe, x);
    probe[j] = g[j] - h;
    const Vector down = f(probe, x);
    probe[j] = g[j];
    jac.col(j) = (up - down) / (2.0 * h);
  }
  return jac;
}

ConditionReport check_convergence_condition(const ModelPair& models, const Vector& g_probe,
                                            const Vector& x, double fd_step) {
  if (!(fd_step > 0.0)) throw ConfigError("fd_step must be positive");
  const Matrix jf = fd_jacobian(models.full_forward, g_probe, x, fd_step);
  const Matrix js = fd_jacobian(models.simplified_forward, g_probe, x, fd_step);
  if (!jf.allFinite() || !js.allFinite()) {
    throw ModelDomainError("non-finite Jacobian entries at the probe point");
  }
  ConditionReport rep;
  rep.m = js.transpose() * jf;
  const Matrix sym = 0.5 * (rep.m + rep.m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  rep.min_eigenvalue = eig.eigenvalues().minCoeff();
  rep.positive_definite = rep.min_eigenvalue > 0.0;
  return rep;
}

void write_trace_csv(std::ostream& os, const IterationTrace& trace) {
  if (trace.records.empty()) return;
  const auto n = trace.records.front().g.size();
  const auto m = trace.records.front().omega_hat.size();
  std::vector<std::string> header{"iter"};
  for (Eigen::Index i = 0; i < n; ++i) header.push_back("g_" + std::to_string(i));
  for (Eigen::Index i = 0; i < m; ++i) header.push_back("omega_hat_" + std::to_string(i));
  header.emplace_back("e_norm");
  io::write_csv_header(os, header);

  std::vector<double> row;
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const auto& r = trace.records[k];
    row.clear();
    row.push_back(static_cast<double>(k + 1));
    row.insert(row.end(), r.g.data(), r.g.data() + r.g.size());
    row.insert(row.end(), r.omega_hat.data(), r.omega_hat.data() + r.omega_hat.size());
    row.push_back(r.error_norm);
    io::write_csv_row(os, row);
  }
}

IterationTrace read_trace_csv(std::istream& is) {
  const io::CsvTable table = io::read_csv(is);
  std::size_t n = 0;
  std::size_t m = 0;
  for (const auto& h : table.header) {
    if (h.rfind("g_", 0) == 0) ++n;
    if (h.rfind("omega_hat_", 0) == 0) ++m;
  }
  if (table.header.size() != n + m + 2 || table.header.front() != "iter" ||
      table.header.back() != "e_norm") {
    throw ParseError("not an iteration trace CSV");
  }
  IterationTrace trace;
  for (const auto& row : table.rows) {
    IterationRecord r;
    r.g = Eigen::Map<const Vector>(row.data() + 1, static_cast<Eigen::Index>(n));
    r.omega_hat = Eigen::Map<const Vector>(row.data() + 1 + n, static_cast<Eigen::Index>(m));
    r.error_norm = row.back();
    trace.records.push_back(std::move(r));
  }
  return trace;
}

}  // namespace mbsa
