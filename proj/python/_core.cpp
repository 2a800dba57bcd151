// Python bindings for the jsde core library.
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "jsde/analysis.hpp"
#include "jsde/config.hpp"
#include "jsde/error.hpp"
#include "jsde/harness.hpp"
#include "jsde/integrator.hpp"
#include "jsde/model.hpp"
#include "jsde/noise.hpp"
#include "jsde/verifier.hpp"

namespace py = pybind11;
using namespace jsde;

namespace {

py::dict path_dict(const PathResult& p) {
  py::dict d;
  d["times"] = p.times;
  d["states"] = p.states;
  d["left_limits"] = p.left_limits;
  std::vector<std::string> kinds;
  for (PointKind k : p.kinds)
    kinds.push_back(k == PointKind::grid ? "grid" : k == PointKind::small_jump ? "small_jump" : "large_jump");
  d["event_kinds"] = kinds;
  d["exploded"] = p.exploded;
  d["exit_time"] = p.exit_time;
  d["seed"] = p.realization_seed;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Jump-SDE simulation, assumption checks and Bihari bounds";

  auto base = py::register_exception<Error>(m, "JsdeError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<CatalogError>(m, "CatalogError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<NumericalDomainError>(m, "NumericalDomainError", base.ptr());
  py::register_exception<RangeError>(m, "RangeError", base.ptr());
  py::register_exception<QuadratureError>(m, "QuadratureError", base.ptr());
  py::register_exception<ResourceError>(m, "ResourceError", base.ptr());

  m.def("presets", &preset_catalog, "Names of the built-in models.");
  m.def("moduli", &modulus_catalog, "Names of the built-in concavity moduli.");

  m.def(
      "bihari_bound",
      [](const std::string& modulus, const std::function<double(double)>& f, const std::function<double(double)>& g,
         double t, double base_point, std::vector<double> breakpoints) {
        const OmegaTransform omega(builtin_modulus(modulus), base_point);
        py::gil_scoped_release release;
        return bihari_bound(omega, f, g, t, breakpoints).bound;
      },
      py::arg("modulus"), py::arg("f"), py::arg("g"), py::arg("t"), py::arg("base_point") = 1.0,
      py::arg("breakpoints") = std::vector<double>{},
      "Omega^-1(Omega(f(t)) + int_0^t g) for a catalog modulus; f and g are callables.");

  m.def(
      "a_sequence",
      [](const std::string& modulus, int n_max) { return a_sequence(builtin_modulus(modulus), n_max).log_values; },
      py::arg("modulus"), py::arg("n_max"), "ln a_n for n = 0..n_max.");

  m.def(
      "simulate",
      [](const std::string& preset_name, double step, double horizon, double x0, std::uint64_t seed) {
        const CoefficientSet model = preset(preset_name);
        PathResult p;
        {
          py::gil_scoped_release release;
          const NoiseRealization noise = sample_noise(model, horizon, step, seed);
          p = simulate(model, noise, default_scheme(model, step), x0);
        }
        return path_dict(p);
      },
      py::arg("preset"), py::arg("step") = 1.0 / 256.0, py::arg("horizon") = 1.0, py::arg("x0") = 1.0,
      py::arg("seed") = 0, "Simulate one path of a preset model.");

  m.def(
      "verify_json",
      [](const std::string& preset_name, const std::string& assumption) {
        const AssumptionId id = parse_assumption(assumption);
        const auto profile = designated_profile(preset_name, id);
        if (!profile) throw CatalogError("preset '" + preset_name + "' has no designated " + assumption + " profile");
        const CoefficientSet model = preset(preset_name);
        py::gil_scoped_release release;
        return to_json(run_profile(model, *profile)).dump();
      },
      py::arg("preset"), py::arg("assumption"), "Assumption report for a preset's designated profile, as JSON.");

  m.def(
      "run_experiment_json",
      [](const std::string& config_text, const std::vector<std::string>& overrides) {
        RunConfig config = parse_config_text(config_text);
        for (const std::string& o : overrides) apply_override(config, o);
        ExperimentConfig ec = config.experiment_config();
        py::gil_scoped_release release;
        return to_json(run_experiment(ec)).dump();
      },
      py::arg("config_text") = "", py::arg("overrides") = std::vector<std::string>{},
      "Run an experiment from config text plus section.key=value overrides; summary as JSON.");
}
