#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "netadapt/bridge.hpp"
#include "netadapt/dynamics.hpp"
#include "netadapt/energy.hpp"
#include "netadapt/error.hpp"
#include "netadapt/geometry.hpp"
#include "netadapt/kirchhoff.hpp"
#include "netadapt/scenario.hpp"

namespace py = pybind11;
using namespace netadapt;

namespace {

Network make_network(const std::vector<std::pair<double, double>>& xy,
                     const std::vector<std::tuple<std::size_t, std::size_t, double, double>>& edges) {
  std::vector<Vertex> vs;
  for (auto [x, y] : xy) vs.push_back({x, y});
  std::vector<Edge> es;
  for (auto [i, j, l, c] : edges) es.push_back({i, j, l, c});
  return Network::build(std::move(vs), std::move(es));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Adaptive transport networks: graph model, continuum model and consistency checks";

  static py::exception<Error> error(m, "NetadaptError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  py::enum_<MetabolicForm>(m, "MetabolicForm")
      .value("nu_over_gamma", MetabolicForm::nu_over_gamma)
      .value("nu", MetabolicForm::nu);
  py::enum_<StepMode>(m, "StepMode").value("explicit", StepMode::explicit_euler).value("proximal", StepMode::proximal);
  py::enum_<SolverBackend>(m, "SolverBackend")
      .value("direct", SolverBackend::direct)
      .value("cg", SolverBackend::cg)
      .value("least_squares", SolverBackend::least_squares);

  py::class_<Network>(m, "Network")
      .def(py::init(&make_network), py::arg("vertices"), py::arg("edges"),
           "vertices: [(x, y)], edges: [(i, j, length, conductivity)]")
      .def_property_readonly("num_vertices", &Network::num_vertices)
      .def_property_readonly("num_edges", &Network::num_edges)
      .def_property_readonly("conductivities", &Network::conductivities)
      .def_property_readonly("lengths", &Network::lengths)
      .def_property_readonly("vertices",
                             [](const Network& n) {
                               std::vector<std::pair<double, double>> out;
                               for (const auto& v : n.vertices()) out.emplace_back(v.x, v.y);
                               return out;
                             })
      .def_property_readonly("edges",
                             [](const Network& n) {
                               std::vector<std::tuple<std::size_t, std::size_t, double, double>> out;
                               for (const auto& e : n.edges()) out.emplace_back(e.i, e.j, e.length, e.conductivity);
                               return out;
                             })
      .def("with_conductivities",
           [](const Network& n, const std::vector<double>& c) { return n.with_conductivities(c); })
      .def("cycle_count", &cycle_count, py::arg("threshold") = 0.0)
      .def("active_edge_count", &active_edge_count, py::arg("threshold") = 0.0)
      .def("active_components", &active_components, py::arg("threshold") = 0.0);

  py::class_<EnergyParams>(m, "EnergyParams")
      .def(py::init([](double gamma, double nu, std::optional<double> alpha, MetabolicForm form) {
             EnergyParams p = EnergyParams::hu_cai(gamma, nu, form);
             if (alpha) p.alpha = *alpha;
             p.validate();
             return p;
           }),
           py::arg("gamma") = 0.5, py::arg("nu") = 1.0, py::arg("alpha") = py::none(),
           py::arg("form") = MetabolicForm::nu_over_gamma)
      .def_readwrite("gamma", &EnergyParams::gamma)
      .def_readwrite("nu", &EnergyParams::nu)
      .def_readwrite("alpha", &EnergyParams::alpha)
      .def_readwrite("form", &EnergyParams::form);

  auto options = [](int m_exp, SolverBackend backend) {
    ModelOptions o;
    o.length_exponent = m_exp;
    o.backend = backend;
    return o;
  };

  m.def(
      "solve_pressures",
      [options](const Network& n, const std::vector<double>& s, int length_exponent, SolverBackend backend) {
        const auto st = solve_pressures(n, SourceVector(s), options(length_exponent, backend).kirchhoff());
        return py::make_tuple(st.pressures, st.fluxes);
      },
      py::arg("network"), py::arg("sources"), py::arg("length_exponent") = 1,
      py::arg("backend") = SolverBackend::direct, "Returns (pressures, fluxes).");
  m.def(
      "discrete_energy",
      [options](const Network& n, const std::vector<double>& s, const EnergyParams& p, int length_exponent) {
        const auto e = discrete_energy(n, SourceVector(s), p, options(length_exponent, SolverBackend::direct));
        return py::dict(py::arg("pumping") = e.pumping, py::arg("metabolic") = e.metabolic,
                        py::arg("total") = e.total());
      },
      py::arg("network"), py::arg("sources"), py::arg("params"), py::arg("length_exponent") = 1);
  m.def(
      "energy_gradient",
      [options](const Network& n, const std::vector<double>& s, const EnergyParams& p, int length_exponent) {
        return energy_gradient(n, SourceVector(s), p, options(length_exponent, SolverBackend::direct));
      },
      py::arg("network"), py::arg("sources"), py::arg("params"), py::arg("length_exponent") = 1);
  m.def(
      "run_to_steady_state",
      [](const Network& n, const std::vector<double>& s, const EnergyParams& p, double tau, double tol,
         StepMode mode, int length_exponent, std::size_t max_iters) {
        DynamicsConfig cfg;
        cfg.energy = p;
        cfg.tau = tau;
        cfg.tol = tol;
        cfg.mode = mode;
        cfg.length_exponent = length_exponent;
        cfg.max_iters = max_iters;
        const auto t = run_to_steady_state(n, SourceVector(s), cfg);
        std::vector<double> energies;
        for (const auto& r : t.records) energies.push_back(r.energy.total());
        return py::dict(py::arg("network") = t.final_network, py::arg("energies") = energies,
                        py::arg("iterations") = t.iterations,
                        py::arg("termination") = std::string(to_string(t.termination)),
                        py::arg("error") = t.error_message);
      },
      py::arg("network"), py::arg("sources"), py::arg("params"), py::arg("tau") = 0.025, py::arg("tol") = 1e-6,
      py::arg("mode") = StepMode::proximal, py::arg("length_exponent") = 1, py::arg("max_iters") = 20000);

  m.def("generate_diamond", &generate_diamond, py::arg("preset") = "small-diamond");
  m.def(
      "build_sources", [](const Network& n) {
        const auto s = build_sources(n);
        return std::vector<double>(s.values().begin(), s.values().end());
      },
      py::arg("network"));
  m.def(
      "init_tree",
      [](const Network& n, double delta, double background, double epsilon, std::size_t extra_loops,
         std::uint64_t seed) {
        InitSpec spec;
        spec.delta = delta;
        spec.background = background;
        spec.epsilon = epsilon;
        spec.extra_loops = extra_loops;
        spec.seed = seed;
        return init_conductivities(n, spec);
      },
      py::arg("network"), py::arg("delta") = 5.0, py::arg("background") = 1e-10, py::arg("epsilon") = 0.0,
      py::arg("extra_loops") = 0, py::arg("seed") = 0);
  m.def(
      "cut_bound",
      [](const Network& n, const std::vector<VertexId>& first, const std::vector<double>& s, const EnergyParams& p) {
        const auto b = cut_bound(n, CutPartition::from_first(n.num_vertices(), first), SourceVector(s), p);
        return py::dict(py::arg("kappa1") = b.kappa1, py::arg("kappa2") = b.kappa2, py::arg("u0") = b.u0,
                        py::arg("bound") = b.bound);
      },
      py::arg("network"), py::arg("first"), py::arg("sources"), py::arg("params"));

  m.def(
      "run_scenario_json",
      [](const std::string& text, const std::filesystem::path& out) {
        auto cfg = parse_scenario(text);
        if (!out.empty()) cfg.output_dir = out;
        py::gil_scoped_release release;
        return report_json(run_scenario(cfg));
      },
      py::arg("config"), py::arg("output_dir") = std::filesystem::path(),
      "Runs a scenario from JSON text and returns the report as JSON text.");
  m.def(
      "run_pde_json",
      [](const std::string& text, const std::filesystem::path& out) {
        auto cfg = parse_pde_config(text);
        if (!out.empty()) cfg.output_dir = out;
        py::gil_scoped_release release;
        return run_pde_scenario(cfg);
      },
      py::arg("config") = "{}", py::arg("output_dir") = std::filesystem::path());
  m.def(
      "run_bridge_studies_json",
      [](const std::filesystem::path& out) {
        py::gil_scoped_release release;
        return run_bridge_studies(out);
      },
      py::arg("output_dir") = std::filesystem::path());
}
