#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "edghdg/cases.hpp"
#include "edghdg/errors.hpp"
#include "edghdg/mesh.hpp"
#include "edghdg/solve.hpp"
#include "edghdg/verify.hpp"

namespace py = pybind11;
using namespace edghdg;

namespace {

py::dict region_errors_dict(const RegionErrors& e) {
  py::dict d;
  d["err_u"] = e.err_u;
  d["err_p"] = e.err_p;
  d["energy_u"] = e.energy_u;
  d["div_residual"] = e.div_residual;
  d["jump_residual"] = e.jump_residual;
  d["cells"] = e.cells;
  return d;
}

py::dict report_dict(const ErrorReport& rep) {
  py::dict d;
  d["free_flow"] = region_errors_dict(rep.s);
  d["porous"] = region_errors_dict(rep.d);
  d["energy_u_total"] = rep.energy_u_total;
  d["h"] = rep.h;
  d["total_cells"] = rep.total_cells;
  d["solver_residual"] = rep.solver_residual;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Coupled free-flow / porous-medium solver with facet unknowns";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::class_<Mesh>(m, "Mesh")
      .def_property_readonly("n_vertices",
                             [](const Mesh& mesh) { return mesh.vertices.size(); })
      .def_property_readonly("n_cells", [](const Mesh& mesh) { return mesh.cells.size(); })
      .def("n_region_cells",
           [](const Mesh& mesh, const std::string& region) {
             if (region == "free-flow") return mesh.n_cells(Region::Stokes);
             if (region == "porous") return mesh.n_cells(Region::Darcy);
             throw InputError("region must be 'free-flow' or 'porous'");
           })
      .def_property_readonly("n_interface_facets",
                             [](const Mesh& mesh) { return mesh.n_facets(FacetClass::Interface); })
      .def("write", [](const Mesh& mesh, const std::string& path) { write_mesh(mesh, path); });

  m.def("generate_mesh", &generate_mesh, py::arg("n"), py::arg("perturb") = false,
        py::arg("seed") = 1,
        "Structured unit-square mesh: n x n squares split into triangles, lower "
        "half porous, upper half free flow");
  m.def("read_mesh", &read_mesh, py::arg("path"));

  m.def("demo_permeability", [](double x, double y) { return demo_permeability({x, y}); },
        py::arg("x"), py::arg("y"), "Oscillatory permeability of the demo case");

  m.def(
      "exact_solution",
      [](double mu, double kappa) {
        const ExactSolution ex = manufactured_solution(mu, kappa);
        py::dict d;
        d["alpha"] = ex.alpha;
        d["velocity_free_flow"] = py::cpp_function([ex](double x, double y) {
          const Vec2 u = ex.u_s({x, y});
          return py::make_tuple(u.x, u.y);
        });
        d["velocity_porous"] = py::cpp_function([ex](double x, double y) {
          const Vec2 u = ex.u_d({x, y});
          return py::make_tuple(u.x, u.y);
        });
        d["pressure_free_flow"] =
            py::cpp_function([ex](double x, double y) { return ex.p_s({x, y}); });
        d["pressure_porous"] =
            py::cpp_function([ex](double x, double y) { return ex.p_d({x, y}); });
        d["momentum_source"] = py::cpp_function([ex](double x, double y) {
          const Vec2 f = ex.f_s({x, y});
          return py::make_tuple(f.x, f.y);
        });
        d["mass_source"] = py::cpp_function([ex](double x, double y) { return ex.f_d({x, y}); });
        return d;
      },
      py::arg("mu"), py::arg("kappa"),
      "Closed-form benchmark fields as callables of (x, y)");

  m.def(
      "solve_benchmark",
      [](int n, int k, double mu, double kappa, double beta_coeff, bool perturb,
         unsigned seed) {
        Mesh mesh = generate_mesh(n, perturb, seed);
        const CaseDefinition def = manufactured_case(mu, kappa, beta_coeff);
        const DofLayout layout = build_layout(mesh, k);
        const LinearSystem sys = assemble_system(mesh, layout, def.config);
        const SolveResult sol = solve_direct(sys);
        const SolutionFields fields(mesh, layout, sol.x);
        ErrorReport rep = compute_errors(fields, *def.exact);
        rep.h = 1.0 / n;
        rep.solver_residual = sol.rel_residual;
        py::dict d = report_dict(rep);
        d["n_dofs"] = layout.n_total;
        return d;
      },
      py::arg("n"), py::arg("k"), py::arg("mu") = 1.0, py::arg("kappa") = 1.0,
      py::arg("beta_coeff") = 10.0, py::arg("perturb") = false, py::arg("seed") = 1,
      "One benchmark solve; returns errors and residuals per region");

  m.def(
      "convergence_csv",
      [](const std::vector<int>& levels, int k, double mu, double kappa, double beta_coeff) {
        return to_csv(convergence_sweep(levels, k, mu, kappa, beta_coeff));
      },
      py::arg("levels"), py::arg("k"), py::arg("mu") = 1.0, py::arg("kappa") = 1.0,
      py::arg("beta_coeff") = 10.0, "Rate study as a CSV string, two rows per level");

  m.def(
      "patch_test",
      [](int n, int k, double mu, double kappa, double bottom_flux) {
        const PatchResult r = patch_test(n, k, mu, kappa, bottom_flux);
        py::dict d;
        d["pass"] = r.pass;
        d["max_deviation"] = r.max_deviation;
        d["multiplier"] = r.multiplier;
        return d;
      },
      py::arg("n") = 2, py::arg("k") = 1, py::arg("mu") = 1.0, py::arg("kappa") = 1.0,
      py::arg("bottom_flux") = -1.0,
      "Uniform-flow reproduction check; bottom_flux != -1 makes the data incompatible");

  m.def(
      "run_demo",
      [](int n, int k, const std::string& vtk_path, double beta_coeff) {
        const Mesh mesh = generate_mesh(n);
        const DemoResult r = run_demo(mesh, k, vtk_path, beta_coeff);
        py::dict d;
        d["balance"] = r.flux.balance;
        d["inflow_scale"] = r.flux.inflow_scale;
        d["interface_flux"] = r.flux.interface_flux;
        d["max_interface_pressure_jump"] = r.flux.max_interface_pressure_jump;
        d["max_normal_jump"] = r.flux.max_normal_jump;
        d["solver_residual"] = r.solver_residual;
        d["n_dofs"] = r.n_dofs;
        d["n_cells"] = r.n_cells;
        return d;
      },
      py::arg("n") = 52, py::arg("k") = 2, py::arg("vtk_path") = std::string(),
      py::arg("beta_coeff") = 10.0,
      "Heterogeneous-permeability flow; returns the flux report");
}
