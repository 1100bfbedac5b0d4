#pragma once

#include "mbsa/magnetic.hpp"
#include "mbsa/solver.hpp"
#include "mbsa/topography.hpp"
#include "mbsa/vdw.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mbsa {

enum class PhaseKind { OuterSurface, LowerSidewall, UpperSidewall, Base };

std::string to_string(PhaseKind k);
PhaseKind phase_kind_from_string(const std::string& s);  // throws ConfigError

/// One scan pass over the unknown pieces of a phase, one fiber pose per segment.
/// Positions are reported in sensing coordinates: the clearance between the tip and the
/// segment, measured along the section's value axis.
struct ScanPhase {
  PhaseKind kind = PhaseKind::OuterSurface;
  Orientation orientation = Orientation::Perpendicular;
  /// Design geometry of the pieces scanned in this phase (values at nominal clearance).
  std::vector<Section> nominal;
  std::vector<BeamPose> poses;
  /// +1 when the surface lies on the +value side of the tip, -1 otherwise.
  std::vector<int> approach;
  /// Insertion depth below the mouth for each position (parallel phases).
  Eigen::VectorXd depth;
  double nominal_clearance = 0.0;
  std::optional<double> beta;

  Eigen::Index size() const;
  /// Scan positions: free coordinate of each segment centre.
  Eigen::VectorXd positions() const;
  double tip_value(Eigen::Index i) const;
  double value_from_clearance(Eigen::Index i, double clearance) const;
  double clearance_from_value(Eigen::Index i, double value) const;
  /// Copies of `nominal` carrying `values` (concatenated over pieces).
  std::vector<Section> with_values(const Eigen::VectorXd& values) const;
  Eigen::VectorXd values_of(const std::vector<Section>& pieces) const;

  void validate() const;  // throws ConfigError
};

/// Forward physics shared by every phase. Readings are baseline() plus the sum of
/// per-source contributions, so fixed sources can be evaluated once and cached.
class Physics {
 public:
  virtual ~Physics() = default;
  virtual std::string name() const = 0;
  virtual double baseline() const = 0;
  virtual Eigen::VectorXd contributions(const std::vector<Section>& sources,
                                        const std::vector<BeamPose>& poses) const = 0;
  /// Offset between the solver parameter and the clearance (parameter = offset + clearance).
  virtual double sensing_offset(Orientation o) const = 0;
};

struct PhaseModels;

class VdwPhysics : public Physics {
 public:
  VdwPhysics(BeamModel beam, InteractionConstants constants, int beam_intervals,
             int points_per_segment, VdwOptions options);

  std::string name() const override { return "vdw"; }
  double baseline() const override { return 0.0; }
  Eigen::VectorXd contributions(const std::vector<Section>& sources,
                                const std::vector<BeamPose>& poses) const override;
  double sensing_offset(Orientation o) const override;

  const BeamModel& beam() const { return quad_.beam(); }
  const InteractionConstants& constants() const { return constants_; }
  const RayleighQuadrature& quadrature() const { return quad_; }
  double phi_bar() const { return phi_bar_; }
  int points_per_segment() const { return points_per_segment_; }
  const VdwOptions& options() const { return options_; }

 private:
  RayleighQuadrature quad_;
  InteractionConstants constants_;
  int points_per_segment_;
  VdwOptions options_;
  double phi_bar_;
};

class MagneticPhysics : public Physics {
 public:
  explicit MagneticPhysics(MagneticModel model) : model_(std::move(model)) {}

  std::string name() const override { return "magnetic"; }
  double baseline() const override;
  Eigen::VectorXd contributions(const std::vector<Section>& sources,
                                const std::vector<BeamPose>& poses) const override;
  double sensing_offset(Orientation) const override { return 0.0; }

  const MagneticModel& model() const { return model_; }

 private:
  MagneticModel model_;
};

struct NoiseSpec {
  /// Standard deviation of the added noise; with `relative` set it is a fraction of the
  /// mean absolute signal (reading minus baseline) of the phase.
  double sigma = 0.0;
  bool relative = false;
  std::uint64_t seed = 0;
};

struct MeasurementSet {
  PhaseKind phase = PhaseKind::OuterSurface;
  Eigen::VectorXd x;
  Eigen::VectorXd omega_sq;
  std::optional<NoiseSpec> noise;

  void validate() const;
};

/// Readings of `phase` over the sources `truth`, plus seeded Gaussian noise.
MeasurementSet simulate_scan(const std::vector<Section>& truth, const ScanPhase& phase,
                             const Physics& physics, const std::optional<NoiseSpec>& noise);

/// Full and simplified models of one phase. `background` holds every source other
/// than the phase's own pieces; its contribution is computed once here.
struct PhaseModels {
  ModelPair pair;
  double offset = 0.0;          // solver parameter minus clearance
  double gain = 1.0;            // scale applied to the closed-form simplified model
  Eigen::VectorXd background;   // cached background contribution per position
};

PhaseModels build_phase_models(const ScanPhase& phase, const Physics& physics,
                               const std::vector<Section>& background);

struct PhaseEstimate {
  std::vector<Section> sections;
  Eigen::VectorXd clearance;  // per segment, in section order
  IterationTrace trace;
};

/// Runs MBSA on one phase and maps the final parameters back to sections.
PhaseEstimate reconstruct_phase(const ScanPhase& phase, const MeasurementSet& measurements,
                                const PhaseModels& models, const SolverConfig& config);

struct ErrorReport {
  Eigen::VectorXd percent;          // 100 |est - truth| / |truth|
  std::vector<bool> absolute;       // entries reported as absolute error (|truth| < 1e-12)
  double median = 0.0;
  double max = 0.0;
  double bin_width = 1.0;
  std::vector<int> histogram;       // bin i counts errors in [i w, (i+1) w)
};

ErrorReport error_report(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth,
                         double bin_width = 1.0);

/// Phase-wise setup of a complete experiment.
struct Scenario {
  std::string name;
  std::shared_ptr<const Physics> physics;
  std::vector<ScanPhase> phases;
  /// Ground truth for every piece, including fixed ones no phase scans.
  std::vector<Section> truth;
  /// Generator contour the truth was discretized from, when there is one.
  std::optional<Contour> truth_contour;
  SolverConfig solver;
  /// When set, each phase's tolerance is this fraction of its measurement norm.
  std::optional<double> tol_relative;
  std::optional<NoiseSpec> noise;
  double histogram_bin_width = 1.0;
  std::string output_dir;  // where the CLI writes artifacts unless told otherwise
};

struct PhaseReport {
  PhaseKind kind = PhaseKind::OuterSurface;
  IterationTrace trace;
  std::vector<Section> estimate;
  Eigen::VectorXd truth_clearance;
  Eigen::VectorXd estimate_clearance;
  MeasurementSet measurements;
  double gain = 1.0;
  double tol = 0.0;
  double seconds = 0.0;
  bool condition_positive_definite = false;
  double condition_min_eigenvalue = 0.0;
};

struct ReconstructionReport {
  std::string scenario;
  std::vector<PhaseReport> phases;
  bool ok = false;
  std::string failure;  // set when a phase failed; phases holds what completed
  std::optional<Contour> assembled;
  std::optional<ErrorReport> errors;
  std::optional<double> hausdorff;
  double seconds = 0.0;
};

/// Runs the phases in order, each seeing earlier estimates and the nominal geometry of
/// later phases as background, then assembles and scores the result.
ReconstructionReport reconstruct_full(const Scenario& scenario);

}  // namespace mbsa
