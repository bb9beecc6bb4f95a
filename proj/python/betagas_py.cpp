#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "betagas/experiment.hpp"

namespace py = pybind11;
using namespace betagas;

namespace {

std::vector<std::vector<cplx>> flatten(const SampleSet& set) {
  std::vector<std::vector<cplx>> out;
  for (const auto& c : set.configurations()) out.emplace_back(c.points().begin(), c.points().end());
  return out;
}

std::string run_config_json(const std::string& config_json, const std::string& kind,
                            const std::string& out_dir) {
  ExperimentConfig cfg = parse_config(nlohmann::json::parse(config_json));
  Overrides o;
  if (!kind.empty()) o.kind = kind;
  if (!out_dir.empty()) o.out_dir = out_dir;
  apply_overrides(cfg, o);
  const ExperimentOutcome res = execute(cfg);
  nlohmann::json doc = output_document(cfg, res.result);
  doc["checks_passed"] = res.checks_passed;
  return doc.dump();
}

}  // namespace

PYBIND11_MODULE(_betagas, m) {
  m.doc() = "2D Coulomb gas sampling, microscopic scales and spacing statistics";
  m.attr("__version__") = version_string();

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InvalidPotential>(m, "InvalidPotential", PyExc_ValueError);
  py::register_exception<DegeneratePoint>(m, "DegeneratePoint", PyExc_ValueError);
  py::register_exception<RefinementExhausted>(m, "RefinementExhausted", PyExc_RuntimeError);

  py::class_<PotentialModel>(m, "PotentialModel")
      .def_static("ginibre", &PotentialModel::ginibre, py::arg("symmetry_center") = cplx{})
      .def_static("monomial", &PotentialModel::monomial, py::arg("k"), py::arg("symmetry_center") = cplx{})
      .def_static("radial_polynomial", &PotentialModel::radial_polynomial, py::arg("coefficients"),
                  py::arg("symmetry_center") = cplx{})
      .def("evaluate", &PotentialModel::evaluate)
      .def("wirtinger", &PotentialModel::wirtinger, py::arg("z"), py::arg("i"), py::arg("j"))
      .def("laplacian", &PotentialModel::laplacian)
      .def("radial_mass", &PotentialModel::radial_mass)
      .def_property_readonly("symmetry_center", &PotentialModel::symmetry_center)
      .def_property_readonly("coefficients", [](const PotentialModel& p) {
        return std::vector<double>(p.coefficients().begin(), p.coefficients().end());
      })
      .def("__repr__", &PotentialModel::describe);

  m.def("micro_scale", &micro_scale, py::arg("model"), py::arg("p"), py::arg("n"));
  m.def("tau0", &tau0, py::arg("model"), py::arg("p"));
  m.def("homogeneity_order", &homogeneity_order, py::arg("model"), py::arg("p"));
  m.def("scale_info", [](const PotentialModel& model, cplx p, int n) {
    return to_json(scale_info(model, p, n)).dump();
  }, py::arg("model"), py::arg("p"), py::arg("n"), "ScaleInfo as a JSON string");

  m.def("total_energy", [](const std::vector<cplx>& pts, const PotentialModel& model) {
    return total_energy(std::span<const cplx>(pts), model);
  }, py::arg("points"), py::arg("model"));
  m.def("move_delta", [](const std::vector<cplx>& pts, int j, cplx w, const PotentialModel& model) {
    return move_delta(Configuration(pts), j, w, model);
  }, py::arg("points"), py::arg("j"), py::arg("new_point"), py::arg("model"));
  m.def("energy_gradient", [](const std::vector<cplx>& pts, const PotentialModel& model) {
    return energy_gradient(Configuration(pts), model);
  }, py::arg("points"), py::arg("model"));

  m.def("sample", [](const PotentialModel& model, int n, double beta, int steps, int burn_in,
                     std::uint64_t seed, int chains, int threads) {
    ChainConfig c;
    c.beta = beta;
    c.steps = steps;
    c.burn_in = burn_in;
    c.seed = seed;
    c.chains = chains;
    c.threads = threads;
    SampleSet set;
    {
      py::gil_scoped_release release;
      set = run_chain(model, n, c);
    }
    return py::make_tuple(flatten(set), set.acceptance_rate());
  }, py::arg("model"), py::arg("n"), py::arg("beta"), py::arg("steps") = 2000,
     py::arg("burn_in") = 500, py::arg("seed") = 1, py::arg("chains") = 1, py::arg("threads") = 0,
     "Retained configurations and the overall acceptance rate");

  m.def("fekete", [](const PotentialModel& model, std::vector<cplx> start, double tol, int max_iters) {
    DescentOptions o;
    o.tol = tol;
    o.max_iters = max_iters;
    const Configuration best = minimize_energy(model, Configuration(std::move(start)), o);
    return std::vector<cplx>(best.points().begin(), best.points().end());
  }, py::arg("model"), py::arg("initial"), py::arg("tol") = 1e-9, py::arg("max_iters") = 200000);

  m.def("spacing_s0", [](const std::vector<cplx>& z) { return spacing_s0(std::span<const cplx>(z)); },
        py::arg("z"));
  m.def("count_nD", [](const std::vector<cplx>& z) { return count_nD(std::span<const cplx>(z)); },
        py::arg("z"));
  m.def("theorem_bound", [](int n, double beta, double eps, double eta, double c) {
    const TheoremBound b = theorem_bound(n, beta, eps, eta, c);
    return py::make_tuple(b.threshold, b.m0, b.probability_bound);
  }, py::arg("n"), py::arg("beta"), py::arg("epsilon"), py::arg("eta"), py::arg("c"));
  m.def("corollary_threshold", &corollary_threshold, py::arg("mu"), py::arg("theta"), py::arg("c"));
  m.def("bound_constants", [](double beta, double K, double T) {
    const BoundConstants b = bound_constants(beta, K, T);
    py::dict d;
    d["C0"] = b.C0;
    d["C"] = b.C;
    d["c"] = b.c;
    return d;
  }, py::arg("beta"), py::arg("K"), py::arg("T") = 1.0);

  m.def("replacement_residual", [](const std::vector<cplx>& nodes, const PotentialModel& model, int j,
                                   cplx z, double beta) {
    return replacement_residual(LagrangeBasis(Configuration(nodes), model), j, z, beta);
  }, py::arg("nodes"), py::arg("model"), py::arg("j"), py::arg("z"), py::arg("beta"));
  m.def("verify_replacement", [](long trials, std::uint64_t seed) {
    const CheckReport r = verify_replacement(trials, seed);
    return py::make_tuple(r.worst_case, r.bound, r.pass);
  }, py::arg("trials") = 1000, py::arg("seed") = 1);

  m.def("_run_config", &run_config_json, py::arg("config_json"), py::arg("kind") = "",
        py::arg("out_dir") = "", py::call_guard<py::gil_scoped_release>());
}
