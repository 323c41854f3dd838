#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "seqgeom/harness.hpp"
#include "seqgeom/power_theory.hpp"
#include "seqgeom/sampling.hpp"
#include "seqgeom/special_functions.hpp"

namespace py = pybind11;
using namespace seqgeom;

namespace {

ExperimentConfig config_from(const std::string& experiment, const std::string& model,
                             const std::string& overrides) {
  auto c = ExperimentConfig::reference_defaults(experiment, model_from_string(model));
  if (!overrides.empty()) c.merge_json(nlohmann::json::parse(overrides));
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Geometry, power theory and simulations for curved exponential families";
  mod.attr("__version__") = library_version();

  mod.def("bessel_i", &bessel_i, py::arg("order"), py::arg("x"));
  mod.def("bessel_k", &bessel_k, py::arg("order"), py::arg("x"));
  mod.def("chi2_cdf", &chi2_cdf, py::arg("df"), py::arg("x"));
  mod.def("chi2_quantile", &chi2_quantile, py::arg("df"), py::arg("alpha"));

  py::class_<PowerCoefficients>(mod, "PowerCoefficients")
      .def_readonly("s", &PowerCoefficients::s)
      .def_readonly("xi0", &PowerCoefficients::xi0)
      .def_readonly("xi1", &PowerCoefficients::xi1)
      .def_readonly("xi2prime", &PowerCoefficients::xi2prime)
      .def_readonly("xi2", &PowerCoefficients::xi2)
      .def_readonly("xi3", &PowerCoefficients::xi3)
      .def_readonly("xi4", &PowerCoefficients::xi4)
      .def_readonly("J1", &PowerCoefficients::J1)
      .def_readonly("J2", &PowerCoefficients::J2)
      .def_readonly("K1", &PowerCoefficients::K1)
      .def_readonly("K2", &PowerCoefficients::K2)
      .def_readonly("limit", &PowerCoefficients::limit);

  mod.def(
      "coefficients",
      [](int m, double s, double alpha) { return coefficients(PowerContext::make(m, alpha), s); },
      py::arg("m"), py::arg("s"), py::arg("alpha") = 0.05);
  mod.def(
      "envelope_power",
      [](int m, double s, double alpha) {
        return envelope_power_first(PowerContext::make(m, alpha), s);
      },
      py::arg("m"), py::arg("s"), py::arg("alpha") = 0.05);
  mod.def(
      "delta_p",
      [](int m, double s, double k1, double k2, double alpha) {
        const DeltaP d = delta_p(PowerContext::make(m, alpha), s, k1, k2);
        return py::make_tuple(d.dp1, d.dp2);
      },
      py::arg("m"), py::arg("s"), py::arg("k1"), py::arg("k2"), py::arg("alpha") = 0.05);

  py::class_<CurvedFamily>(mod, "CurvedFamily")
      .def(py::init([](const std::string& model, int m, double r) {
             return CurvedFamily::make(model_from_string(model), m, r);
           }),
           py::arg("model"), py::arg("m"), py::arg("r"))
      .def_property_readonly("model", [](const CurvedFamily& f) { return to_string(f.model); })
      .def_readonly("m", &CurvedFamily::m)
      .def_readonly("r", &CurvedFamily::r)
      .def_readonly("r_dagger", &CurvedFamily::r_dagger);

  mod.def("direction", &direction, py::arg("family"), py::arg("u"));
  mod.def("metric", &metric, py::arg("family"), py::arg("u"));
  mod.def("gauge_nu", &gauge_nu, py::arg("family"), py::arg("u"));
  mod.def("conformal_coords", &conformal_coords, py::arg("family"), py::arg("u"));
  mod.def(
      "mean_curvature", [](const CurvedFamily& f, const Vec& u) { return geometry(f, u).H_mean; },
      py::arg("family"), py::arg("u"));
  mod.def(
      "sample",
      [](const CurvedFamily& f, const Vec& u, int n, std::uint64_t seed, std::uint64_t stream) {
        const Sampler sm(f, u);
        RngStream rng(seed, stream);
        Mat out(n, f.n());
        for (int i = 0; i < n; ++i) out.row(i) = sm.draw(rng).transpose();
        return out;
      },
      py::arg("family"), py::arg("u"), py::arg("n"), py::arg("seed"), py::arg("stream") = 0);

  mod.def(
      "config_json",
      [](const std::string& experiment, const std::string& model, const std::string& overrides) {
        return config_from(experiment, model, overrides).to_json().dump();
      },
      py::arg("experiment"), py::arg("model"), py::arg("overrides") = "");
  mod.def(
      "run_experiment",
      [](const std::string& experiment, const std::string& model, const std::string& overrides) {
        const auto c = config_from(experiment, model, overrides);
        py::gil_scoped_release release;
        return run_experiment(c).str();
      },
      py::arg("experiment"), py::arg("model"), py::arg("overrides") = "",
      "Runs an experiment from the reference defaults plus JSON overrides; returns CSV text.");
}
