#include "mbsa/magnetic.hpp"

#include "mbsa/errors.hpp"
#include "mbsa/io.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <set>
#include <sstream>

namespace mbsa {

MagnetArray MagnetArray::uniform(int count, double spacing, double last_position) {
  if (count < 1) throw ConfigError("magnet array needs at least one magnet");
  if (!(spacing > 0.0)) throw ConfigError("magnet spacing must be positive");
  MagnetArray m;
  m.positions.resize(count);
  for (int i = 0; i < count; ++i) m.positions[i] = last_position - spacing * (count - 1 - i);
  return m;
}

double MagnetArray::spacing() const {
  return positions.size() < 2 ? 0.0 : positions[1] - positions[0];
}

void MagnetArray::validate() const {
  if (positions.size() < 1) throw ConfigError("magnet array is empty");
  if (!positions.allFinite()) throw ConfigError("magnet positions must be finite");
  for (Eigen::Index i = 1; i < positions.size(); ++i) {
    if (!(positions[i] > positions[i - 1])) {
      throw ConfigError("magnet positions must be strictly increasing");
    }
  }
}

double dipole_potential(double r, double c) {
  if (!(r > 0.0)) throw ModelDomainError("dipole separation must be positive, got " + io::format_double(r));
  return -c / (r * r * r);
}

Eigen::VectorXd discrete_stiffness(const Eigen::VectorXd& beam_positions,
                                   const std::vector<Point>& sources_beam_frame, double c, double n,
                                   double gap_floor) {
  if (!(n > 0.0)) throw ConfigError("magnetic power n must be positive");
  Eigen::VectorXd k = Eigen::VectorXd::Zero(beam_positions.size());
  const double half_exp = 0.5 * (n + 4.0);
  for (Eigen::Index j = 0; j < beam_positions.size(); ++j) {
    for (std::size_t i = 0; i < sources_beam_frame.size(); ++i) {
      const double a = sources_beam_frame[i].g1 - beam_positions[j];
      const double y = sources_beam_frame[i].g2;
      const double r2 = a * a + y * y;
      if (!(std::sqrt(r2) > gap_floor) || r2 == 0.0) {
        throw SingularityError("topography magnet " + std::to_string(i) + " and beam magnet " +
                                   std::to_string(j) + " are " + io::format_double(std::sqrt(r2)) +
                                   " apart",
                               i);
      }
      k[j] += c * n * (a * a - (n + 1.0) * y * y) / std::pow(r2, half_exp);
    }
  }
  return k;
}

void MagneticConstants::validate() const {
  if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("magnetic C must be non-negative");
  if (!(n > 0.0) || !std::isfinite(n)) throw ConfigError("magnetic n must be positive");
  if (!(omega0 >= 0.0) || !std::isfinite(omega0)) throw ConfigError("omega0 must be non-negative");
  if (!(length_unit > 0.0)) throw ConfigError("length_unit must be positive");
}

MagneticModel::MagneticModel(BeamModel beam, MagnetArray beam_magnets, MagneticConstants constants,
                             double gap_floor, int intervals)
    : beam_(beam), magnets_(std::move(beam_magnets)), constants_(constants), gap_floor_(gap_floor) {
  beam_.validate();
  magnets_.validate();
  constants_.validate();
  if (magnets_.positions[0] < 0.0 || magnets_.positions[magnets_.positions.size() - 1] > beam_.length) {
    throw ConfigError("beam magnets must lie on the beam");
  }
  const RayleighQuadrature quad(beam_, intervals);
  modal_factors_.resize(magnets_.positions.size());
  for (Eigen::Index j = 0; j < modal_factors_.size(); ++j) {
    const double p = mode_shape(beam_, magnets_.positions[j]);
    modal_factors_[j] = p * p / quad.modal_mass();
  }
}

double MagneticModel::delta_omega_sq(const std::vector<Point>& sources, const BeamPose& pose) const {
  pose.validate();
  const double u = constants_.length_unit;
  const Point clamp = pose.clamp(beam_.length);
  std::vector<Point> local;
  local.reserve(sources.size());
  for (const auto& p : sources) {
    const double d1 = p.g1 - clamp.g1;
    const double d2 = p.g2 - clamp.g2;
    local.push_back({(d1 * pose.axis.g1 + d2 * pose.axis.g2) / u,
                     (-d1 * pose.axis.g2 + d2 * pose.axis.g1) / u});
  }
  const Eigen::VectorXd k = discrete_stiffness(magnets_.positions / u, local, constants_.c,
                                               constants_.n, gap_floor_ / u);
  return modal_factors_.dot(k);
}

double MagneticModel::omega_sq(const std::vector<Point>& sources, const BeamPose& pose) const {
  return constants_.omega0 * constants_.omega0 + delta_omega_sq(sources, pose);
}

std::vector<Point> magnet_positions(const std::vector<Section>& sections) {
  std::vector<Point> out;
  for (const auto& s : sections) {
    s.validate();
    for (Eigen::Index i = 0; i < s.size(); ++i) out.push_back(s.centre_point(i));
  }
  return out;
}

Eigen::VectorXd MagneticModel::forward_magnetic(const std::vector<Section>& sections,
                                                const std::vector<BeamPose>& poses) const {
  const std::vector<Point> sources = magnet_positions(sections);
  Eigen::VectorXd out(static_cast<Eigen::Index>(poses.size()));
  for (std::size_t i = 0; i < poses.size(); ++i) {
    try {
      out[static_cast<Eigen::Index>(i)] = omega_sq(sources, poses[i]);
    } catch (const SingularityError& e) {
      throw SingularityError("scan position " + std::to_string(i) + ": " + e.what(), i);
    }
  }
  return out;
}

double MagneticModel::single_magnet_omega_sq(double gap) const {
  if (!(gap > 0.0)) throw ModelDomainError("calibration gap must be positive");
  // beam along +g2 with its tip at the origin; the magnet sits across from the tip
  const BeamPose pose{{0.0, 0.0}, {0.0, 1.0}};
  return omega_sq({Point{gap, 0.0}}, pose);
}

namespace {

struct CalibrationProblem {
  const MagneticModel& base;
  const Eigen::VectorXd& gaps;
  Eigen::VectorXd target;  // measured omega^2

  MagneticConstants decode(const Eigen::Vector3d& p) const {
    MagneticConstants k = base.constants();
    k.c = std::exp(p[0]);
    k.n = std::exp(p[1]);
    k.omega0 = std::abs(p[2]);
    return k;
  }
  Eigen::VectorXd model(const Eigen::Vector3d& p) const {
    const MagneticModel m(base.beam(), base.beam_magnets(), decode(p));
    Eigen::VectorXd out(gaps.size());
    for (Eigen::Index i = 0; i < gaps.size(); ++i) out[i] = m.single_magnet_omega_sq(gaps[i]);
    return out;
  }
  Eigen::VectorXd residual(const Eigen::Vector3d& p) const { return target - model(p); }
};

}  // namespace

CalibrationResult calibrate(const Eigen::VectorXd& gaps, const Eigen::VectorXd& measured_omega,
                            const MagneticConstants& initial, const MagneticModel& model,
                            const CalibrationOptions& options) {
  if (gaps.size() != measured_omega.size()) {
    throw CalibrationError("calibration gaps and frequencies differ in length");
  }
  if (gaps.size() < 4) {
    throw CalibrationError("calibration needs at least 4 data points for 3 parameters, got " +
                           std::to_string(gaps.size()));
  }
  std::set<double> distinct;
  for (Eigen::Index i = 0; i < gaps.size(); ++i) {
    if (!(gaps[i] > 0.0) || !std::isfinite(gaps[i])) {
      throw CalibrationError("calibration gap " + std::to_string(i) + " must be positive");
    }
    if (!std::isfinite(measured_omega[i])) {
      throw CalibrationError("calibration frequency " + std::to_string(i) + " is not finite");
    }
    distinct.insert(gaps[i]);
  }
  if (distinct.size() != static_cast<std::size_t>(gaps.size())) {
    throw CalibrationError("calibration gaps must be distinct");
  }
  if (!(initial.c > 0.0) || !(initial.n > 0.0)) {
    throw CalibrationError("initial C and n must be positive");
  }

  CalibrationProblem prob{model, gaps, measured_omega.array().square().matrix()};
  Eigen::Vector3d p(std::log(initial.c), std::log(initial.n), initial.omega0);
  Eigen::VectorXd r = prob.residual(p);
  double cost = r.squaredNorm();
  if (!std::isfinite(cost)) throw CalibrationError("model is not finite at the initial parameters");

  CalibrationResult res;
  res.initial_residual_norm = std::sqrt(cost);
  res.cost_history.push_back(cost);
  double mu = 1e-3;
  bool converged = false;
  int it = 0;
  for (; it < options.max_iter && !converged; ++it) {
    // Jacobian of the model, i.e. minus the Jacobian of the residual
    Eigen::MatrixXd jac(gaps.size(), 3);
    for (int c = 0; c < 3; ++c) {
      const double h = options.fd_step * std::max(1.0, std::abs(p[c]));
      Eigen::Vector3d up = p;
      Eigen::Vector3d dn = p;
      up[c] += h;
      dn[c] -= h;
      jac.col(c) = (prob.model(up) - prob.model(dn)) / (2.0 * h);
    }
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d jtr = jac.transpose() * r;
    if (!jtj.allFinite() || !jtr.allFinite()) {
      throw CalibrationError("non-finite Jacobian at iteration " + std::to_string(it));
    }
    bool accepted = false;
    while (!accepted) {
      Eigen::Matrix3d a = jtj;
      for (int c = 0; c < 3; ++c) a(c, c) += mu * std::max(jtj(c, c), 1e-300);
      Eigen::LDLT<Eigen::Matrix3d> ldlt(a);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        throw CalibrationError("singular normal equations at iteration " + std::to_string(it));
      }
      const Eigen::Vector3d step = ldlt.solve(jtr);
      if (!step.allFinite()) throw CalibrationError("non-finite step at iteration " + std::to_string(it));
      const Eigen::Vector3d trial = p + step;
      const Eigen::VectorXd rt = prob.residual(trial);
      const double ct = rt.squaredNorm();
      if (std::isfinite(ct) && ct < cost) {
        accepted = true;
        converged = step.norm() <= options.tol * (p.norm() + options.tol);
        p = trial;
        r = rt;
        cost = ct;
        res.cost_history.push_back(cost);
        mu = std::max(mu / 3.0, 1e-12);
      } else {
        mu *= 4.0;
        if (mu > 1e16) {
          // no decreasing direction left at working precision: local minimum reached
          converged = true;
          break;
        }
      }
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "calibration did not converge in " << options.max_iter
        << " iterations; residual norm " << io::format_double(std::sqrt(cost)) << ", C "
        << io::format_double(std::exp(p[0])) << ", n " << io::format_double(std::exp(p[1]));
    throw CalibrationError(msg.str());
  }
  const MagneticConstants fit = prob.decode(p);
  res.c = fit.c;
  res.n = fit.n;
  res.omega0 = fit.omega0;
  res.residuals = r;
  res.residual_norm = std::sqrt(cost);
  res.iterations = it;
  return res;
}

}  // namespace mbsa
