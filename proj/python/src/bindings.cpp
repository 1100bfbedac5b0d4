#include "mbsa/beam.hpp"
#include "mbsa/demo.hpp"
#include "mbsa/errors.hpp"
#include "mbsa/harness.hpp"
#include "mbsa/magnetic.hpp"
#include "mbsa/report.hpp"
#include "mbsa/scenario.hpp"
#include "mbsa/solver.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace mbsa;

namespace {

using Fn = std::function<Vector(const Vector&, const Vector&)>;

ModelPair make_pair(Fn full, Fn simplified, Fn inverse) {
  return ModelPair{std::move(full), std::move(simplified), std::move(inverse)};
}

py::dict trace_to_dict(const IterationTrace& t) {
  py::list g, w, e;
  std::vector<double> norms;
  for (const auto& r : t.records) {
    g.append(r.g);
    w.append(r.omega_hat);
    e.append(r.error);
    norms.push_back(r.error_norm);
  }
  py::dict d;
  d["status"] = to_string(t.status);
  d["iterations"] = t.records.size();
  d["estimate"] = t.records.empty() ? Vector() : t.final_estimate();
  d["g"] = g;
  d["omega_hat"] = w;
  d["error"] = e;
  d["error_norm"] = norms;
  if (t.condition) {
    d["condition_matrix"] = t.condition->m;
    d["condition_positive_definite"] = t.condition->positive_definite;
  }
  return d;
}

MagneticModel default_magnetic_model(double c, double n, std::optional<double> omega0) {
  const MagneticScenarioParams p;
  const BeamModel beam = BeamModel::rectangular(p.beam_length, p.density, p.youngs_modulus, p.width, p.thickness);
  MagneticConstants k;
  k.c = c;
  k.n = n;
  k.omega0 = omega0.value_or(base_natural_frequency(beam));
  k.length_unit = p.length_unit;
  return MagneticModel(beam, MagnetArray::uniform(p.beam_magnets, p.beam_magnet_spacing, beam.length), k, p.gap_floor);
}

}  // namespace

PYBIND11_MODULE(_mbsa, m) {
  m.doc() = "Model-based successive approximation core";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<ConfigError> config_error(m, "ConfigError", error.ptr());
  static py::exception<ParseError> parse_error(m, "ParseError", error.ptr());
  static py::exception<ModelDomainError> domain_error(m, "ModelDomainError", error.ptr());
  static py::exception<SingularityError> singularity_error(m, "SingularityError", domain_error.ptr());
  static py::exception<CalibrationError> calibration_error(m, "CalibrationError", error.ptr());
  static py::exception<PartitionError> partition_error(m, "PartitionError", error.ptr());
  static py::exception<AssemblyError> assembly_error(m, "AssemblyError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const SingularityError& e) {
      singularity_error(e.what());
    } catch (const ModelDomainError& e) {
      domain_error(e.what());
    } catch (const ConfigError& e) {
      config_error(e.what());
    } catch (const ParseError& e) {
      parse_error(e.what());
    } catch (const CalibrationError& e) {
      calibration_error(e.what());
    } catch (const PartitionError& e) {
      partition_error(e.what());
    } catch (const AssemblyError& e) {
      assembly_error(e.what());
    } catch (const Error& e) {
      error(e.what());
    }
  });

  m.def(
      "run_mbsa",
      [](Fn full, Fn simplified, Fn inverse, const Vector& x, const Vector& omega_sq, double beta, double tol,
         int max_iter, double fd_step, bool check_condition, std::optional<Vector> initial_target) {
        SolverConfig cfg;
        cfg.beta = beta;
        cfg.tol = tol;
        cfg.max_iter = max_iter;
        cfg.fd_step = fd_step;
        cfg.check_condition = check_condition;
        return trace_to_dict(run_mbsa(make_pair(full, simplified, inverse), {x, omega_sq}, cfg, initial_target));
      },
      py::arg("full_forward"), py::arg("simplified_forward"), py::arg("simplified_inverse"), py::arg("x"),
      py::arg("omega_sq"), py::arg("beta") = 0.5, py::arg("tol") = 1e-10, py::arg("max_iter") = 200,
      py::arg("fd_step") = 1e-6, py::arg("check_condition") = false, py::arg("initial_target") = py::none(),
      "Successive approximation with Python model callables f(g, x), f_s(g, x), f_s^-1(w, x).");

  m.def(
      "check_convergence_condition",
      [](Fn full, Fn simplified, const Vector& g, const Vector& x, double fd_step) {
        const ConditionReport r = check_convergence_condition(make_pair(full, simplified, {}), g, x, fd_step);
        return py::make_tuple(r.m, r.positive_definite, r.min_eigenvalue);
      },
      py::arg("full_forward"), py::arg("simplified_forward"), py::arg("g"), py::arg("x"), py::arg("fd_step") = 1e-6,
      "Returns (J_s^T J, positive_definite, min_eigenvalue).");

  m.def(
      "demo",
      [](double beta, int max_iter) {
        const DemoResult d = demo_appendix_b(beta, max_iter);
        py::dict out;
        out["mbsa"] = trace_to_dict(d.mbsa);
        out["gd_x"] = d.gd.x.back();
        out["gd_f"] = d.gd.f.back();
        out["gd_steps"] = d.gd.x.size();
        return out;
      },
      py::arg("beta") = 0.5, py::arg("max_iter") = 200);

  m.def("mode_eigenvalue", &mode_eigenvalue, py::arg("mode_index") = 1);
  m.def(
      "phi_bar", [](double length, double rho_a, double ei, int mode) { return phi_bar(BeamModel{length, rho_a, ei, mode}); },
      py::arg("length") = 1.0, py::arg("rho_a") = 1.0, py::arg("ei") = 1.0, py::arg("mode_index") = 1);
  m.def(
      "natural_frequency",
      [](double length, double rho_a, double ei, int mode) { return base_natural_frequency(BeamModel{length, rho_a, ei, mode}); },
      py::arg("length"), py::arg("rho_a"), py::arg("ei"), py::arg("mode_index") = 1);
  m.def(
      "delta_omega_sq",
      [](double length, double rho_a, double ei, const Vector& x, const Vector& k, int mode) {
        return delta_omega_sq(BeamModel{length, rho_a, ei, mode}, StiffnessProfile{x, k});
      },
      py::arg("length"), py::arg("rho_a"), py::arg("ei"), py::arg("x"), py::arg("k"), py::arg("mode_index") = 1,
      "Rayleigh frequency shift of a stiffness profile sampled on a uniform grid over the beam.");

  m.def(
      "pair_stiffness",
      [](double axial, double lateral, double c, double n) {
        return discrete_stiffness(Vector::Zero(1), {Point{axial, lateral}}, c, n)[0];
      },
      py::arg("axial"), py::arg("lateral"), py::arg("c"), py::arg("n"),
      "Stiffness on a beam magnet from one source at (axial, lateral) offset.");

  m.def(
      "single_magnet_omega_sq",
      [](double gap, double c, double n, std::optional<double> omega0) {
        return default_magnetic_model(c, n, omega0).single_magnet_omega_sq(gap);
      },
      py::arg("gap"), py::arg("c") = 67981.0, py::arg("n") = 3.356380, py::arg("omega0") = py::none());

  m.def(
      "calibrate",
      [](const Vector& gaps, const Vector& omega, double c0, double n0, std::optional<double> omega0, int max_iter) {
        const MagneticModel model = default_magnetic_model(c0, n0, omega0);
        CalibrationOptions opt;
        opt.max_iter = max_iter;
        const CalibrationResult r = calibrate(gaps, omega, model.constants(), model, opt);
        py::dict d;
        d["C"] = r.c;
        d["n"] = r.n;
        d["omega0"] = r.omega0;
        d["residual_norm"] = r.residual_norm;
        d["iterations"] = r.iterations;
        return d;
      },
      py::arg("gaps"), py::arg("omega"), py::arg("c0") = 40000.0, py::arg("n0") = 3.0, py::arg("omega0") = py::none(),
      py::arg("max_iter") = 200);

  m.def(
      "error_report",
      [](const Vector& estimate, const Vector& truth, double bin_width) {
        const ErrorReport r = error_report(estimate, truth, bin_width);
        py::dict d;
        d["percent"] = r.percent;
        d["absolute"] = r.absolute;
        d["median"] = r.median;
        d["max"] = r.max;
        d["histogram"] = r.histogram;
        return d;
      },
      py::arg("estimate"), py::arg("truth"), py::arg("bin_width") = 1.0);

  m.def(
      "simulate",
      [](const std::string& path, std::optional<std::uint64_t> seed, std::optional<double> beta,
         std::optional<int> max_iter, std::optional<std::string> out_dir) {
        ScenarioOverrides ov{seed, beta, max_iter};
        const Scenario sc = load_scenario(path, ov);
        ReconstructionReport r;
        {
          py::gil_scoped_release release;
          r = reconstruct_full(sc);
        }
        if (out_dir) write_artifacts(r, sc, *out_dir);
        return report_to_json(r, sc);
      },
      py::arg("config"), py::arg("seed") = py::none(), py::arg("beta") = py::none(), py::arg("max_iter") = py::none(),
      py::arg("out") = py::none(), "Runs a scenario file and returns the report as a JSON string.");

  m.def(
      "validate_scenario", [](const std::string& path) { (void)load_scenario(path); }, py::arg("config"));
}
