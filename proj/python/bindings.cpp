#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "facetmpc/bench.hpp"

namespace py = pybind11;
using namespace facetmpc;

namespace {

ExplicitArtifacts artifacts_for(const Plant& p, const CostWeights& w, ControllerKind kind,
                                const std::vector<MpSolution>& solutions) {
  if (!is_explicit(kind)) return {};
  if (solutions.empty()) return build_artifacts(p, w, kind);
  ExplicitArtifacts art;
  art.solutions = solutions;
  if (is_iteration_free(kind)) {
    art.graphs = build_graphs(solutions, kind == ControllerKind::Facet ? NeighborMode::Facet : NeighborMode::Hyperplane);
  }
  return art;
}

Mat stack_rows(const std::vector<Vec>& rows, Eigen::Index cols) {
  Mat out(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = rows[k].transpose();
  return out;
}

py::dict summary_dict(const RunSummary& s) {
  py::dict d;
  d["max_iterations"] = s.max_iterations;
  d["avg_iterations"] = s.avg_iterations;
  d["total_transfers"] = s.total_transfers;
  d["total_combos"] = s.total_combos;
  d["fallback_count"] = s.fallback_count;
  d["settling_steps"] = s.settling_steps;
  d["max_dev_vs_reference"] = s.max_dev_vs_reference;
  d["nonconverged_steps"] = s.nonconverged_steps;
  d["bootstrap_transfers"] = s.bootstrap_transfers;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Explicit and distributed MPC for coupled linear subsystems";

  py::register_exception<Error>(m, "FacetMpcError", PyExc_RuntimeError);

  py::class_<Plant>(m, "Plant")
      .def_property_readonly("num_subsystems", &Plant::num_subsystems)
      .def_readonly("horizon", &Plant::horizon)
      .def_property_readonly("nx", &Plant::nx)
      .def_property_readonly("nu", &Plant::nu)
      .def_property_readonly("x_lb", &Plant::x_lb)
      .def_property_readonly("x_ub", &Plant::x_ub)
      .def_property_readonly("hash", [](const Plant& p) { return plant_hash(p); })
      .def("to_json", [](const Plant& p) { return plant_to_json(p).dump(); })
      .def_static("from_json", [](const std::string& s) { return plant_from_json(Json::parse(s)); })
      .def("step", [](const Plant& p, const Vec& x, const Vec& u) { return step(p, x, u); });

  m.def("generate_plant", [](int m_, std::uint64_t seed) { return generate_plant(m_, seed); }, py::arg("m"),
        py::arg("seed"));
  m.def("sample_plant", &sample_plant);

  m.def(
      "feasible_initial_state",
      [](const Plant& p, std::uint64_t seed, double frac) {
        return feasible_initial_state(p, CostWeights::identity(p), seed, frac);
      },
      py::arg("plant"), py::arg("seed"), py::arg("frac") = 0.4);

  py::class_<MpSolution>(m, "Solution")
      .def_property_readonly("num_regions", &MpSolution::num_regions)
      .def_readonly("theta_dim", &MpSolution::theta_dim)
      .def_property_readonly("controller", [](const MpSolution& s) { return s.controller; })
      .def("evaluate",
           [](const MpSolution& s, const Vec& theta) {
             const auto v = evaluate_explicit(s, theta);
             return py::make_tuple(v.u, v.region_id);
           })
      .def("to_json", [](const MpSolution& s) { return solution_to_json(s).dump(); });

  m.def("solve_local", [](const Plant& p) { return solve_local(p, CostWeights::identity(p)); }, py::arg("plant"),
        "Explicit solution of every local controller under identity weights.");

  m.def(
      "facet_lp",
      [](const Mat& a1, const Vec& b1, const Mat& a2, const Vec& b2, int j) {
        const auto r = facet_lp(Polytope{a1, b1}, Polytope{a2, b2}, j);
        return py::make_tuple(std::string(to_string(r.status)), r.t_star, r.witness);
      },
      py::arg("a1"), py::arg("b1"), py::arg("a2"), py::arg("b2"), py::arg("j"));

  m.def(
      "simulate",
      [](const Plant& p, const std::string& controller, const Vec& x0, int steps, double epsilon, int p_max,
         const std::vector<MpSolution>& solutions) {
        const ControllerKind kind = parse_controller_kind(controller);
        const CostWeights w = CostWeights::identity(p);
        IterConfig cfg;
        cfg.epsilon = epsilon;
        cfg.p_max = p_max;
        Trace t;
        {
          py::gil_scoped_release release;
          t = run_closed_loop(p, kind, x0, steps, w, cfg, artifacts_for(p, w, kind, solutions));
        }
        py::dict d;
        d["status"] = t.status;
        d["x"] = stack_rows(t.x, p.nx());
        d["u"] = stack_rows(t.u, p.nu());
        std::vector<long> transfers, combos;
        std::vector<int> iterations;
        for (const auto& s : t.metrics) {
          transfers.push_back(s.data_transfers);
          combos.push_back(s.combos_checked);
          iterations.push_back(s.iterations);
        }
        d["iterations"] = iterations;
        d["transfers"] = transfers;
        d["combos"] = combos;
        d["summary"] = summary_dict(summarize(t));
        return d;
      },
      py::arg("plant"), py::arg("controller"), py::arg("x0"), py::arg("steps") = 100, py::arg("epsilon") = 1e-8,
      py::arg("p_max") = 100, py::arg("solutions") = std::vector<MpSolution>{},
      "Closed-loop run. Explicit kinds reuse `solutions` when given.");

  m.def(
      "run_bench",
      [](const std::string& config_json) {
        const BenchConfig cfg = bench_config_from_json(Json::parse(config_json));
        BenchResult r;
        {
          py::gil_scoped_release release;
          r = run_bench(cfg);
        }
        return py::make_tuple(summary_csv(r.rows), r.manifest.dump());
      },
      py::arg("config_json") = "{}", "Returns (summary CSV text, manifest JSON text).");
}
