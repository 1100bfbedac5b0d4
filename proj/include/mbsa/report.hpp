#pragma once

#include "mbsa/demo.hpp"
#include "mbsa/harness.hpp"
#include "mbsa/magnetic.hpp"

#include <string>
#include <vector>

namespace mbsa {

/// Report JSON for a reconstruction. Timings are left out so reruns are byte-identical.
std::string report_to_json(const ReconstructionReport& report, const Scenario& scenario);

/// Writes report.json, contour.csv, truth_contour.csv, errors.csv, histogram.csv and,
/// per phase, trace_<phase>.csv and measurements_<phase>.csv. Returns the paths written.
std::vector<std::string> write_artifacts(const ReconstructionReport& report,
                                         const Scenario& scenario, const std::string& out_dir);

/// CSV with columns x, omega_sq.
std::string measurements_to_csv(const MeasurementSet& m);
MeasurementSet measurements_from_csv(const std::string& text);

/// Calibration dataset CSV with columns gap_m, omega_rad_s.
struct CalibrationData {
  Eigen::VectorXd gaps;
  Eigen::VectorXd omega;
};
CalibrationData read_calibration_csv(const std::string& path);
std::string calibration_data_to_csv(const CalibrationData& d);
std::string calibration_to_json(const CalibrationResult& r);

/// mbsa_trace.csv (solver trace), gd_trace.csv (iter, x, f) and demo.json.
std::vector<std::string> write_demo_artifacts(const DemoResult& demo, const std::string& out_dir);

}  // namespace mbsa
