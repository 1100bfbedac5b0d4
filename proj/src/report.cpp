#include "mbsa/report.hpp"

#include "mbsa/errors.hpp"
#include "mbsa/io.hpp"

#include <json.hpp>

#include <filesystem>
#include <sstream>

namespace mbsa {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::string write(const fs::path& dir, const std::string& name, const std::string& content) {
  const fs::path p = dir / name;
  io::write_file_atomic(p.string(), content);
  return p.string();
}

}  // namespace

std::string report_to_json(const ReconstructionReport& report, const Scenario& scenario) {
  json j;
  j["scenario"] = report.scenario;
  j["physics"] = scenario.physics ? scenario.physics->name() : "";
  j["ok"] = report.ok;
  j["failure"] = report.failure;
  if (const auto* vdw = dynamic_cast<const VdwPhysics*>(scenario.physics.get())) {
    j["units"] = {{"metres_per_nm", kMetresPerNanometre},
                  {"joule_per_kJ_per_mol", kJoulePerKjPerMol},
                  {"avogadro", kAvogadro}};
    j["constants"] = {{"C", vdw->constants().c},
                      {"n", vdw->constants().n},
                      {"phi_bar", vdw->phi_bar()},
                      {"gap_floor", vdw->options().gap_floor},
                      {"cutoff", vdw->options().cutoff}};
  } else if (const auto* mag = dynamic_cast<const MagneticPhysics*>(scenario.physics.get())) {
    const auto& k = mag->model().constants();
    j["constants"] = {{"C", k.c}, {"n", k.n}, {"omega0", k.omega0}, {"length_unit", k.length_unit}};
  }
  json phases = json::array();
  for (std::size_t p = 0; p < report.phases.size(); ++p) {
    const PhaseReport& pr = report.phases[p];
    json ph;
    ph["phase"] = to_string(pr.kind);
    ph["orientation"] = p < scenario.phases.size() ? to_string(scenario.phases[p].orientation) : "";
    ph["gain"] = pr.gain;
    ph["tol"] = pr.tol;
    if (!pr.trace.records.empty()) {
      ph["status"] = to_string(pr.trace.status);
      ph["iterations"] = pr.trace.records.size();
      ph["initial_error_norm"] = pr.trace.records.front().error_norm;
      ph["final_error_norm"] = pr.trace.final_record().error_norm;
      ph["truth_clearance"] = to_std(pr.truth_clearance);
      ph["estimate_clearance"] = to_std(pr.estimate_clearance);
    } else {
      ph["status"] = "failed";
    }
    if (scenario.solver.check_condition) {
      ph["condition"] = {{"positive_definite", pr.condition_positive_definite},
                         {"min_eigenvalue", pr.condition_min_eigenvalue}};
    }
    phases.push_back(ph);
  }
  j["phases"] = phases;
  if (report.errors) {
    const ErrorReport& e = *report.errors;
    j["errors"] = {{"percent", to_std(e.percent)},
                   {"absolute", e.absolute},
                   {"median", e.median},
                   {"max", e.max},
                   {"histogram", {{"bin_width", e.bin_width}, {"counts", e.histogram}}}};
  }
  if (report.hausdorff) j["hausdorff"] = *report.hausdorff;
  return j.dump(2) + "\n";
}

std::string measurements_to_csv(const MeasurementSet& m) {
  std::ostringstream os;
  io::write_csv_header(os, {"x", "omega_sq"});
  for (Eigen::Index i = 0; i < m.x.size(); ++i) io::write_csv_row(os, {m.x[i], m.omega_sq[i]});
  return os.str();
}

MeasurementSet measurements_from_csv(const std::string& text) {
  std::istringstream is(text);
  const io::CsvTable t = io::read_csv(is);
  const std::size_t cx = t.column("x");
  const std::size_t cw = t.column("omega_sq");
  MeasurementSet m;
  m.x.resize(static_cast<Eigen::Index>(t.rows.size()));
  m.omega_sq.resize(m.x.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    m.x[static_cast<Eigen::Index>(i)] = t.rows[i][cx];
    m.omega_sq[static_cast<Eigen::Index>(i)] = t.rows[i][cw];
  }
  return m;
}

std::vector<std::string> write_artifacts(const ReconstructionReport& report,
                                         const Scenario& scenario, const std::string& out_dir) {
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  std::vector<std::string> written;
  for (const auto& pr : report.phases) {
    const std::string tag = to_string(pr.kind);
    std::ostringstream trace;
    write_trace_csv(trace, pr.trace);
    if (!pr.trace.records.empty()) written.push_back(write(dir, "trace_" + tag + ".csv", trace.str()));
    if (pr.measurements.x.size() > 0) {
      written.push_back(write(dir, "measurements_" + tag + ".csv", measurements_to_csv(pr.measurements)));
    }
  }
  if (report.assembled) {
    std::ostringstream os;
    write_contour_csv(os, *report.assembled);
    written.push_back(write(dir, "contour.csv", os.str()));
  }
  {
    std::ostringstream os;
    write_contour_csv(os, scenario.truth_contour ? *scenario.truth_contour : assemble(scenario.truth));
    written.push_back(write(dir, "truth_contour.csv", os.str()));
  }
  if (report.errors) {
    const ErrorReport& e = *report.errors;
    std::ostringstream os;
    io::write_csv_header(os, {"segment", "phase", "truth_clearance", "estimate_clearance",
                              "error_percent", "absolute"});
    Eigen::Index k = 0;
    for (std::size_t p = 0; p < report.phases.size(); ++p) {
      const auto& pr = report.phases[p];
      for (Eigen::Index i = 0; i < pr.truth_clearance.size(); ++i, ++k) {
        io::write_csv_row(os, {static_cast<double>(k), static_cast<double>(p), pr.truth_clearance[i],
                               pr.estimate_clearance[i], e.percent[k],
                               e.absolute[static_cast<std::size_t>(k)] ? 1.0 : 0.0});
      }
    }
    written.push_back(write(dir, "errors.csv", os.str()));
    std::ostringstream hs;
    io::write_csv_header(hs, {"bin_low", "bin_high", "count"});
    for (std::size_t b = 0; b < e.histogram.size(); ++b) {
      io::write_csv_row(hs, {e.bin_width * static_cast<double>(b), e.bin_width * static_cast<double>(b + 1),
                             static_cast<double>(e.histogram[b])});
    }
    written.push_back(write(dir, "histogram.csv", hs.str()));
  }
  written.push_back(write(dir, "report.json", report_to_json(report, scenario)));
  return written;
}

CalibrationData read_calibration_csv(const std::string& path) {
  const io::CsvTable t = io::read_csv_file(path);
  const std::size_t cg = t.column("gap_m");
  const std::size_t cw = t.column("omega_rad_s");
  CalibrationData d;
  d.gaps.resize(static_cast<Eigen::Index>(t.rows.size()));
  d.omega.resize(d.gaps.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    d.gaps[static_cast<Eigen::Index>(i)] = t.rows[i][cg];
    d.omega[static_cast<Eigen::Index>(i)] = t.rows[i][cw];
  }
  return d;
}

std::string calibration_data_to_csv(const CalibrationData& d) {
  std::ostringstream os;
  io::write_csv_header(os, {"gap_m", "omega_rad_s"});
  for (Eigen::Index i = 0; i < d.gaps.size(); ++i) io::write_csv_row(os, {d.gaps[i], d.omega[i]});
  return os.str();
}

std::string calibration_to_json(const CalibrationResult& r) {
  json j;
  j["C"] = r.c;
  j["n"] = r.n;
  j["omega0"] = r.omega0;
  j["residual_norm"] = r.residual_norm;
  j["initial_residual_norm"] = r.initial_residual_norm;
  j["iterations"] = r.iterations;
  j["residuals"] = to_std(r.residuals);
  return j.dump(2) + "\n";
}

std::vector<std::string> write_demo_artifacts(const DemoResult& demo, const std::string& out_dir) {
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  std::vector<std::string> written;
  std::ostringstream tr;
  write_trace_csv(tr, demo.mbsa);
  written.push_back(write(dir, "mbsa_trace.csv", tr.str()));
  std::ostringstream gd;
  io::write_csv_header(gd, {"iter", "x", "f"});
  for (std::size_t k = 0; k < demo.gd.x.size(); ++k) {
    io::write_csv_row(gd, {static_cast<double>(k), demo.gd.x[k], demo.gd.f[k]});
  }
  written.push_back(write(dir, "gd_trace.csv", gd.str()));
  json j;
  const auto& last = demo.mbsa.final_record();
  j["mbsa"] = {{"status", to_string(demo.mbsa.status)},
               {"iterations", demo.mbsa.records.size()},
               {"x", last.g[0]},
               {"f", -last.error[0]}};
  j["gradient_descent"] = {{"stalled", demo.gd.stalled},
                           {"iterations", demo.gd.x.size() - 1},
                           {"x", demo.gd.x.back()},
                           {"f", demo.gd.f.back()}};
  written.push_back(write(dir, "demo.json", j.dump(2) + "\n"));
  return written;
}

}  // namespace mbsa
