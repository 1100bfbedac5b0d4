#include "mbsa/harness.hpp"

#include "mbsa/errors.hpp"
#include "mbsa/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>

namespace mbsa {

std::string to_string(PhaseKind k) {
  switch (k) {
    case PhaseKind::OuterSurface: return "outer_surface";
    case PhaseKind::LowerSidewall: return "lower_sidewall";
    case PhaseKind::UpperSidewall: return "upper_sidewall";
    case PhaseKind::Base: return "base";
  }
  return "unknown";
}

PhaseKind phase_kind_from_string(const std::string& s) {
  for (auto k : {PhaseKind::OuterSurface, PhaseKind::LowerSidewall, PhaseKind::UpperSidewall,
                 PhaseKind::Base}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown phase '" + s + "'");
}

Eigen::Index ScanPhase::size() const {
  Eigen::Index n = 0;
  for (const auto& s : nominal) n += s.size();
  return n;
}

Eigen::VectorXd ScanPhase::positions() const {
  Eigen::VectorXd x(size());
  Eigen::Index k = 0;
  for (const auto& s : nominal) {
    for (Eigen::Index i = 0; i < s.size(); ++i) x[k++] = s.segment_centre(i);
  }
  return x;
}

double ScanPhase::tip_value(Eigen::Index i) const {
  return value_of(orientation, poses[static_cast<std::size_t>(i)].tip);
}

double ScanPhase::value_from_clearance(Eigen::Index i, double clearance) const {
  return tip_value(i) + approach[static_cast<std::size_t>(i)] * clearance;
}

double ScanPhase::clearance_from_value(Eigen::Index i, double value) const {
  return approach[static_cast<std::size_t>(i)] * (value - tip_value(i));
}

std::vector<Section> ScanPhase::with_values(const Eigen::VectorXd& values) const {
  if (values.size() != size()) throw ConfigError("value vector does not match the phase");
  std::vector<Section> out = nominal;
  Eigen::Index k = 0;
  for (auto& s : out) {
    s.values = values.segment(k, s.size());
    k += s.size();
  }
  return out;
}

Eigen::VectorXd ScanPhase::values_of(const std::vector<Section>& pieces) const {
  Eigen::VectorXd v(size());
  Eigen::Index k = 0;
  for (const auto& s : pieces) {
    if (k + s.size() > v.size()) throw ConfigError("pieces do not match the phase");
    v.segment(k, s.size()) = s.values;
    k += s.size();
  }
  if (k != v.size()) throw ConfigError("pieces do not match the phase");
  return v;
}

void ScanPhase::validate() const {
  const std::string who = "phase " + to_string(kind) + ": ";
  if (nominal.empty()) throw ConfigError(who + "no sections to scan");
  for (const auto& s : nominal) {
    s.validate();
    if (s.orientation != orientation) throw ConfigError(who + "section orientation mismatch");
  }
  const auto n = static_cast<std::size_t>(size());
  if (poses.size() != n) throw ConfigError(who + "need one pose per segment");
  if (approach.size() != n) throw ConfigError(who + "need one approach sign per segment");
  for (const auto& p : poses) p.validate();
  for (int a : approach) {
    if (a != 1 && a != -1) throw ConfigError(who + "approach signs must be +1 or -1");
  }
  if (orientation == Orientation::Parallel && depth.size() != size()) {
    throw ConfigError(who + "parallel phases need one depth per segment");
  }
  if (!(nominal_clearance > 0.0)) throw ConfigError(who + "nominal clearance must be positive");
  if (beta && !(*beta > 0.0 && std::isfinite(*beta))) throw ConfigError(who + "beta must be positive");
  const Eigen::VectorXd x = positions();
  std::vector<double> sorted(x.data(), x.data() + x.size());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError(who + "scan positions must be distinct");
  }
}

VdwPhysics::VdwPhysics(BeamModel beam, InteractionConstants constants, int beam_intervals,
                       int points_per_segment, VdwOptions options)
    : quad_(beam, beam_intervals),
      constants_(constants),
      points_per_segment_(points_per_segment),
      options_(options),
      phi_bar_(mbsa::phi_bar(beam)) {
  constants_.validate();
  if (points_per_segment_ < 16) throw ConfigError("points_per_segment must be at least 16");
}

Eigen::VectorXd VdwPhysics::contributions(const std::vector<Section>& sources,
                                          const std::vector<BeamPose>& poses) const {
  const SourceSet set = sources_from_sections(sources, points_per_segment_);
  Eigen::VectorXd out(static_cast<Eigen::Index>(poses.size()));
  for (std::size_t i = 0; i < poses.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = vdw_delta_omega_sq(set, constants_, poses[i], quad_, options_);
  }
  return out;
}

double VdwPhysics::sensing_offset(Orientation o) const {
  return o == Orientation::Perpendicular ? quad_.beam().length : 0.0;
}

double MagneticPhysics::baseline() const {
  const double w = model_.constants().omega0;
  return w * w;
}

Eigen::VectorXd MagneticPhysics::contributions(const std::vector<Section>& sources,
                                               const std::vector<BeamPose>& poses) const {
  const std::vector<Point> pts = magnet_positions(sources);
  Eigen::VectorXd out(static_cast<Eigen::Index>(poses.size()));
  for (std::size_t i = 0; i < poses.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = model_.delta_omega_sq(pts, poses[i]);
  }
  return out;
}

void MeasurementSet::validate() const {
  if (x.size() == 0) throw ConfigError("measurement set is empty");
  if (x.size() != omega_sq.size()) throw ConfigError("positions and readings differ in length");
  if (!omega_sq.allFinite()) throw ConfigError("readings must be finite");
}

MeasurementSet simulate_scan(const std::vector<Section>& truth, const ScanPhase& phase,
                             const Physics& physics, const std::optional<NoiseSpec>& noise) {
  phase.validate();
  MeasurementSet m;
  m.phase = phase.kind;
  m.x = phase.positions();
  m.omega_sq = physics.contributions(truth, phase.poses).array() + physics.baseline();
  if (noise && noise->sigma > 0.0) {
    double sigma = noise->sigma;
    if (noise->relative) sigma *= (m.omega_sq.array() - physics.baseline()).abs().mean();
    std::mt19937_64 rng(noise->seed);
    std::normal_distribution<double> dist(0.0, sigma);
    for (Eigen::Index i = 0; i < m.omega_sq.size(); ++i) m.omega_sq[i] += dist(rng);
    m.noise = noise;
  }
  return m;
}

namespace {

struct PhaseIndex {
  std::map<double, Eigen::Index> by_position;

  explicit PhaseIndex(const ScanPhase& phase) {
    const Eigen::VectorXd x = phase.positions();
    for (Eigen::Index i = 0; i < x.size(); ++i) by_position.emplace(x[i], i);
  }
  Eigen::Index operator()(double x, Eigen::Index measurement) const {
    auto it = by_position.find(x);
    if (it == by_position.end()) {
      throw ModelDomainError("measurement " + std::to_string(measurement) + " at position " +
                                 io::format_double(x) + " is not a scan position of this phase",
                             static_cast<std::size_t>(measurement));
    }
    return it->second;
  }
};

template <typename F>
auto with_index(Eigen::Index k, F&& f) {
  try {
    return f();
  } catch (const SingularityError& e) {
    throw SingularityError("measurement " + std::to_string(k) + ": " + e.what(),
                           static_cast<std::size_t>(k));
  } catch (const ModelDomainError& e) {
    throw ModelDomainError("measurement " + std::to_string(k) + ": " + e.what(),
                           static_cast<std::size_t>(k));
  }
}

}  // namespace

PhaseModels build_phase_models(const ScanPhase& phase, const Physics& physics,
                               const std::vector<Section>& background) {
  phase.validate();
  const auto shared_phase = std::make_shared<const ScanPhase>(phase);
  const auto index = std::make_shared<const PhaseIndex>(phase);
  const Eigen::Index n = phase.size();

  PhaseModels out;
  out.offset = physics.sensing_offset(phase.orientation);
  out.background = background.empty() ? Eigen::VectorXd::Zero(n)
                                      : physics.contributions(background, phase.poses);
  const Eigen::VectorXd bg = out.background;
  const double base = physics.baseline();
  const double offset = out.offset;

  Eigen::VectorXd nominal_values = phase.values_of(phase.nominal);
  out.pair.full_forward = [shared_phase, index, &physics, bg, base, offset, nominal_values](
                              const Vector& g, const Vector& x) {
    const ScanPhase& ph = *shared_phase;
    Eigen::VectorXd values = nominal_values;
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(x.size()));
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      idx[static_cast<std::size_t>(k)] = (*index)(x[k], k);
      values[idx[static_cast<std::size_t>(k)]] =
          ph.value_from_clearance(idx[static_cast<std::size_t>(k)], g[k] - offset);
    }
    std::vector<BeamPose> poses;
    for (auto i : idx) poses.push_back(ph.poses[static_cast<std::size_t>(i)]);
    Vector out = physics.contributions(ph.with_values(values), poses);
    for (Eigen::Index k = 0; k < x.size(); ++k) out[k] += base + bg[idx[static_cast<std::size_t>(k)]];
    return out;
  };

  if (const auto* vdw = dynamic_cast<const VdwPhysics*>(&physics)) {
    SimplifiedContext ctx;
    ctx.orientation = phase.orientation;
    ctx.c = vdw->constants().c;
    ctx.n = vdw->constants().n;
    ctx.segment_width = phase.nominal.front().segment_width;
    ctx.phi_bar = vdw->phi_bar();
    ctx.rho_a = vdw->beam().rho_a;
    ctx.beam_length = vdw->beam().length;
    auto depth_of = [shared_phase](Eigen::Index i) {
      return shared_phase->orientation == Orientation::Parallel ? shared_phase->depth[i] : 0.0;
    };
    // model-to-model calibration on the design geometry at the commanded clearance
    const Eigen::VectorXd reference = physics.contributions(phase.nominal, phase.poses);
    double gain = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double unit = simplified_forward(offset + phase.nominal_clearance, depth_of(i), ctx);
      const double ratio = reference[i] / unit;
      if (!(ratio > 0.0)) {
        throw ConfigError("phase " + to_string(phase.kind) + ": pose " + std::to_string(i) +
                          " produces no softening at the nominal clearance");
      }
      gain = std::max(gain, ratio);
    }
    ctx.gain = gain;
    out.gain = gain;
    out.pair.simplified_forward = [index, ctx, depth_of](const Vector& g, const Vector& x) {
      Vector out(x.size());
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        const Eigen::Index i = (*index)(x[k], k);
        out[k] = with_index(k, [&] { return simplified_forward(g[k], depth_of(i), ctx); });
      }
      return out;
    };
    out.pair.simplified_inverse = [index, ctx, depth_of](const Vector& w, const Vector& x) {
      Vector out(x.size());
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        const Eigen::Index i = (*index)(x[k], k);
        out[k] = with_index(k, [&] { return simplified_invert(w[k], depth_of(i), ctx); });
      }
      return out;
    };
    return out;
  }

  // Locally flat surface: every segment of the phase at the clearance of the one under the tip.
  auto flat = [shared_phase, &physics, bg, base](Eigen::Index i, double clearance) {
    const ScanPhase& ph = *shared_phase;
    const double v = ph.value_from_clearance(i, clearance);
    const Eigen::VectorXd values = Eigen::VectorXd::Constant(ph.size(), v);
    return base + bg[i] +
           physics.contributions(ph.with_values(values), {ph.poses[static_cast<std::size_t>(i)]})[0];
  };
  const double lo_gap = phase.nominal_clearance / 4.0;
  const double hi_gap = phase.nominal_clearance * 8.0;
  // Outside [lo_gap, hi_gap] the flat model continues linearly with its end slopes, so the
  // inverse is defined for every reading even where the flat surface cannot produce it.
  auto end_slope = [flat](Eigen::Index i, double g, double dg) {
    const double s = (flat(i, g + dg) - flat(i, g)) / dg;
    if (!(s > 0.0)) throw ModelDomainError("flat-surface model is not increasing in the clearance");
    return s;
  };
  auto extended = [flat, end_slope, lo_gap, hi_gap](Eigen::Index i, double g) {
    if (g < lo_gap) return flat(i, lo_gap) + end_slope(i, lo_gap, 1e-3 * lo_gap) * (g - lo_gap);
    if (g > hi_gap) return flat(i, hi_gap) + end_slope(i, hi_gap, -1e-3 * hi_gap) * (g - hi_gap);
    return flat(i, g);
  };
  out.pair.simplified_forward = [index, extended](const Vector& g, const Vector& x) {
    Vector out(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      const Eigen::Index i = (*index)(x[k], k);
      out[k] = with_index(k, [&] { return extended(i, g[k]); });
    }
    return out;
  };
  out.pair.simplified_inverse = [index, flat, end_slope, lo_gap, hi_gap](const Vector& w, const Vector& x) {
    Vector out(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      const Eigen::Index i = (*index)(x[k], k);
      out[k] = with_index(k, [&] {
        double lo = lo_gap;
        double hi = hi_gap;
        const double flo = flat(i, lo);
        const double fhi = flat(i, hi);
        if (!(flo < fhi) || !std::isfinite(w[k])) {
          throw ModelDomainError("working target " + io::format_double(w[k]) +
                                 " cannot be inverted by the flat-surface model");
        }
        if (w[k] < flo) return lo + (w[k] - flo) / end_slope(i, lo, 1e-3 * lo);
        if (w[k] > fhi) return hi + (w[k] - fhi) / end_slope(i, hi, -1e-3 * hi);
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          if (flat(i, mid) < w[k]) {
            lo = mid;
          } else {
            hi = mid;
          }
        }
        return 0.5 * (lo + hi);
      });
    }
    return out;
  };
  return out;
}

PhaseEstimate reconstruct_phase(const ScanPhase& phase, const MeasurementSet& measurements,
                                const PhaseModels& models, const SolverConfig& config) {
  phase.validate();
  measurements.validate();
  PhaseEstimate est;
  est.trace = run_mbsa(models.pair, Measurements{measurements.x, measurements.omega_sq}, config);
  const PhaseIndex index(phase);
  Eigen::VectorXd values = phase.values_of(phase.nominal);
  const Vector& g = est.trace.final_estimate();
  for (Eigen::Index k = 0; k < measurements.x.size(); ++k) {
    const Eigen::Index i = index(measurements.x[k], k);
    values[i] = phase.value_from_clearance(i, g[k] - models.offset);
  }
  est.sections = phase.with_values(values);
  est.clearance.resize(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    est.clearance[i] = phase.clearance_from_value(i, values[i]);
  }
  return est;
}

ErrorReport error_report(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth,
                         double bin_width) {
  if (estimate.size() != truth.size()) {
    throw ConfigError("estimate and truth have different segment counts");
  }
  if (!(bin_width > 0.0)) throw ConfigError("histogram bin width must be positive");
  ErrorReport r;
  r.bin_width = bin_width;
  r.percent.resize(truth.size());
  r.absolute.assign(static_cast<std::size_t>(truth.size()), false);
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    const double diff = std::abs(estimate[i] - truth[i]);
    if (std::abs(truth[i]) < 1e-12) {
      r.percent[i] = diff;
      r.absolute[static_cast<std::size_t>(i)] = true;
    } else {
      r.percent[i] = 100.0 * diff / std::abs(truth[i]);
    }
  }
  if (truth.size() == 0) return r;
  std::vector<double> sorted(r.percent.data(), r.percent.data() + r.percent.size());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  r.median = m % 2 == 1 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  r.max = sorted.back();
  r.histogram.assign(static_cast<std::size_t>(std::floor(r.max / bin_width)) + 1, 0);
  for (double p : sorted) {
    auto b = static_cast<std::size_t>(std::floor(p / bin_width));
    r.histogram[std::min(b, r.histogram.size() - 1)] += 1;
  }
  return r;
}

namespace {

bool same_placement(const Section& a, const Section& b) {
  const double tol = 1e-9 * std::max(a.segment_width, b.segment_width);
  return std::abs(a.zeta_start - b.zeta_start) <= tol && a.size() == b.size();
}

std::vector<Section> truth_pieces_for(const ScanPhase& phase, const std::vector<Section>& truth) {
  std::vector<Section> out;
  for (const auto& nom : phase.nominal) {
    auto it = std::find_if(truth.begin(), truth.end(),
                           [&](const Section& t) { return same_placement(t, nom); });
    if (it == truth.end()) {
      throw ConfigError("phase " + to_string(phase.kind) + " scans a section absent from the truth");
    }
    out.push_back(*it);
  }
  return out;
}

}  // namespace

ReconstructionReport reconstruct_full(const Scenario& scenario) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  if (!scenario.physics) throw ConfigError("scenario has no physics model");
  if (scenario.phases.empty()) throw ConfigError("scenario has no phases");
  scenario.solver.validate();

  ReconstructionReport report;
  report.scenario = scenario.name;

  std::vector<Section> fixed;
  for (const auto& t : scenario.truth) {
    bool scanned = false;
    for (const auto& ph : scenario.phases) {
      for (const auto& nom : ph.nominal) scanned = scanned || same_placement(t, nom);
    }
    if (!scanned) fixed.push_back(t);
  }

  std::vector<std::vector<Section>> estimates(scenario.phases.size());
  for (std::size_t p = 0; p < scenario.phases.size(); ++p) {
    const ScanPhase& phase = scenario.phases[p];
    const auto tp = clock::now();
    PhaseReport pr;
    pr.kind = phase.kind;
    try {
      std::vector<Section> background = fixed;
      for (std::size_t q = 0; q < scenario.phases.size(); ++q) {
        if (q == p) continue;
        const auto& src = q < p ? estimates[q] : scenario.phases[q].nominal;
        background.insert(background.end(), src.begin(), src.end());
      }
      std::optional<NoiseSpec> noise = scenario.noise;
      if (noise) noise->seed += p;
      pr.measurements = simulate_scan(scenario.truth, phase, *scenario.physics, noise);
      const PhaseModels models = build_phase_models(phase, *scenario.physics, background);
      pr.gain = models.gain;

      SolverConfig cfg = scenario.solver;
      if (phase.beta) cfg.beta = *phase.beta;
      if (scenario.tol_relative) {
        const Eigen::VectorXd signal =
            pr.measurements.omega_sq.array() - scenario.physics->baseline();
        cfg.tol = *scenario.tol_relative * signal.norm();
      }
      pr.tol = cfg.tol;

      const std::vector<Section> truth_here = truth_pieces_for(phase, scenario.truth);
      const Eigen::VectorXd truth_values = phase.values_of(truth_here);
      pr.truth_clearance.resize(truth_values.size());
      for (Eigen::Index i = 0; i < truth_values.size(); ++i) {
        pr.truth_clearance[i] = phase.clearance_from_value(i, truth_values[i]);
      }
      if (cfg.check_condition) {
        // evaluated at the ground truth rather than at the first iterate
        const ConditionReport cond = check_convergence_condition(
            models.pair, pr.truth_clearance.array() + models.offset, pr.measurements.x, cfg.fd_step);
        pr.condition_positive_definite = cond.positive_definite;
        pr.condition_min_eigenvalue = cond.min_eigenvalue;
        cfg.check_condition = false;
      }

      PhaseEstimate est = reconstruct_phase(phase, pr.measurements, models, cfg);
      pr.trace = std::move(est.trace);
      pr.estimate = est.sections;
      pr.estimate_clearance = est.clearance;
      estimates[p] = std::move(est.sections);
      pr.seconds = std::chrono::duration<double>(clock::now() - tp).count();
      const SolverStatus status = pr.trace.status;
      const std::size_t iters = pr.trace.records.size();
      const double final_norm = pr.trace.final_record().error_norm;
      report.phases.push_back(std::move(pr));
      if (status != SolverStatus::Converged) {
        report.failure = "phase " + to_string(phase.kind) + ": solver ended with status " +
                         to_string(status) + " after " + std::to_string(iters) +
                         " iterations, error norm " + io::format_double(final_norm);
        report.seconds = std::chrono::duration<double>(clock::now() - t0).count();
        return report;
      }
    } catch (const Error& e) {
      pr.seconds = std::chrono::duration<double>(clock::now() - tp).count();
      report.phases.push_back(std::move(pr));
      report.failure = "phase " + to_string(phase.kind) + ": " + e.what();
      report.seconds = std::chrono::duration<double>(clock::now() - t0).count();
      return report;
    }
  }

  std::vector<Section> all = fixed;
  Eigen::VectorXd est_c(0);
  Eigen::VectorXd truth_c(0);
  for (std::size_t p = 0; p < scenario.phases.size(); ++p) {
    all.insert(all.end(), estimates[p].begin(), estimates[p].end());
    const auto& pr = report.phases[p];
    Eigen::VectorXd e2(est_c.size() + pr.estimate_clearance.size());
    e2 << est_c, pr.estimate_clearance;
    est_c = e2;
    Eigen::VectorXd t2(truth_c.size() + pr.truth_clearance.size());
    t2 << truth_c, pr.truth_clearance;
    truth_c = t2;
  }
  report.assembled = assemble(all);
  report.errors = error_report(est_c, truth_c, scenario.histogram_bin_width);
  const Contour reference = scenario.truth_contour ? *scenario.truth_contour : assemble(scenario.truth);
  report.hausdorff = hausdorff_distance(*report.assembled, reference);
  report.ok = true;
  report.seconds = std::chrono::duration<double>(clock::now() - t0).count();
  return report;
}

}  // namespace mbsa
