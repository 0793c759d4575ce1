#include "frameopt/benchmarks.hpp"
#include "frameopt/errors.hpp"
#include "frameopt/linear_analysis.hpp"
#include "frameopt/problem_io.hpp"
#include "frameopt/report.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace frameopt;

namespace {

py::object to_python(const nlohmann::ordered_json& doc) {
  return py::module_::import("json").attr("loads")(doc.dump());
}

Design design_of(const Eigen::VectorXd& areas) { return Design{areas}; }

}  // namespace

PYBIND11_MODULE(frameopt, m) {
  m.doc() = "Frame topology optimization with local methods and a moment-SOS hierarchy.";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidInput>(m, "InvalidInput", error.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", error.ptr());
  py::register_exception<MechanismError>(m, "MechanismError", error.ptr());
  py::register_exception<DanglingLoadError>(m, "DanglingLoadError", error.ptr());
  py::register_exception<SelfWeightPresent>(m, "SelfWeightPresent", error.ptr());
  py::register_exception<NumericalFailure>(m, "NumericalFailure", error.ptr());

  py::class_<GroundStructure>(m, "GroundStructure")
      .def_property_readonly("num_nodes", &GroundStructure::num_nodes)
      .def_property_readonly("num_elements", &GroundStructure::num_elements)
      .def_property_readonly("num_dofs", &GroundStructure::num_dofs)
      .def_property_readonly("volume_bound", &GroundStructure::volume_bound)
      .def_property_readonly("lengths", &GroundStructure::lengths)
      .def("volume", [](const GroundStructure& gs, const Eigen::VectorXd& a) { return gs.volume(design_of(a)); })
      .def("to_dict", [](const GroundStructure& gs) { return to_python(problem_to_json(gs)); })
      .def("__repr__", [](const GroundStructure& gs) {
        return "<GroundStructure " + std::to_string(gs.num_nodes()) + " nodes, " +
               std::to_string(gs.num_elements()) + " elements>";
      });

  m.def("benchmark", [](const std::string& name) { return benchmark(name).structure; }, py::arg("name"));
  m.def("benchmark_names", [] {
    std::vector<std::string> names;
    for (const BenchmarkCase& c : build_benchmarks()) names.push_back(c.name);
    return names;
  });
  m.def("load_problem", [](const std::string& path) { return load_problem(path).structure; }, py::arg("path"));
  m.def("parse_problem", [](const std::string& text) { return parse_problem(text).structure; }, py::arg("text"));

  m.def(
      "compliance",
      [](const GroundStructure& gs, const Eigen::VectorXd& a) { return compliance(gs, design_of(a)).compliance; },
      py::arg("structure"), py::arg("areas"));
  m.def(
      "analyze",
      [](const GroundStructure& gs, const Eigen::VectorXd& a) {
        const AnalysisResult r = compliance(gs, design_of(a));
        py::dict out;
        out["compliance"] = r.compliance;
        out["displacements"] = r.displacements;
        out["gradient"] = compliance_gradient(r);
        return out;
      },
      py::arg("structure"), py::arg("areas"));

  m.def(
      "optimize",
      [](const GroundStructure& gs, const std::string& method, int max_order, double gap_tol) {
        MethodSettings s;
        s.po.max_order = max_order;
        s.po.gap_tol = gap_tol;
        Report r;
        {
          py::gil_scoped_release release;
          r.methods.push_back(run_method(gs, method, s));
        }
        return to_python(to_json(r)["methods"][0]);
      },
      py::arg("structure"), py::arg("method") = "oc", py::arg("max_order") = 3, py::arg("gap_tol") = 1e-4,
      "Runs oc, nlp, nsdp or po and returns the method report as a dict.");

  m.def(
      "certify",
      [](const GroundStructure& gs, const Eigen::VectorXd& a, int order, double gap_tol) {
        HierarchyConfig cfg;
        cfg.gap_tol = gap_tol;
        DesignCertificate dc;
        {
          py::gil_scoped_release release;
          dc = certify_design(gs, design_of(a), order, cfg);
        }
        py::dict out;
        out["lower"] = dc.certificate.lower;
        out["upper"] = dc.certificate.upper;
        out["gap"] = dc.certificate.gap;
        out["rank_Mr"] = dc.certificate.rank_full;
        out["rank_Mr_minus_d"] = dc.certificate.rank_reduced;
        out["verdict"] = to_string(dc.certificate.verdict);
        out["feasible"] = dc.feasible;
        return out;
      },
      py::arg("structure"), py::arg("areas"), py::arg("order"), py::arg("gap_tol") = 1e-4);

  m.def(
      "topology_svg",
      [](const GroundStructure& gs, const Eigen::VectorXd& a, double min_area, double stroke_scale) {
        return topology_svg(gs, design_of(a), RenderOptions{min_area, stroke_scale});
      },
      py::arg("structure"), py::arg("areas"), py::arg("min_area") = 1e-6, py::arg("stroke_scale") = 0.0);
}
