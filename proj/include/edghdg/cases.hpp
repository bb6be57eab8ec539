#pragma once

#include <map>
#include <optional>
#include <string>

#include "edghdg/assembly.hpp"
#include "edghdg/solve.hpp"
#include "edghdg/verify.hpp"

namespace edghdg {

struct CaseDefinition {
  std::string id;
  BoundarySplit split = BoundarySplit::Collapsed;
  ProblemConfig config;
  std::optional<ExactSolution> exact;
};

// Benchmark case: constant coefficients, boundary data taken from the
// manufactured solution (velocity on the free-flow boundary, normal flux on
// the porous boundary), pressure mean pinned.
CaseDefinition manufactured_case(double mu, double kappa, double beta_coeff = 10.0);

// Heterogeneous flow case: mu = 0.1, alpha = 0.5, oscillatory permeability,
// parabolic inflow at x1 = 0, traction-free outflow at x1 = 1, slip wall on
// top, impermeable lateral walls, fixed pressure -0.05 on the bottom.
CaseDefinition demo_case(double beta_coeff = 10.0);

// Oscillatory permeability field of the heterogeneous case; range [100, 1500].
double demo_permeability(Vec2 x);

struct FluxReport {
  std::map<FacetClass, double> boundary;  // integral of u.n per exterior class
  double balance = 0.0;                   // sum over exterior classes
  double inflow_scale = 0.0;              // integral of |u.n| over the inflow
  double interface_flux = 0.0;            // integral of u.n across the interface
  double max_interface_pressure_jump = 0.0;   // facet pressure mismatch on the interface
  double max_normal_jump = 0.0;               // normal-trace mismatch, all interior facets
  double max_interface_tangential_jump = 0.0; // physical slip across the interface
};

FluxReport flux_report(const SolutionFields& fields);
std::string format_flux_report(const FluxReport& report);

struct DemoResult {
  FluxReport flux;
  double solver_residual = 0.0;
  long n_dofs = 0;
  int n_cells = 0;
};

// Solves the heterogeneous case on the given mesh (classified internally) and
// optionally writes the flow field to a legacy VTK file.
DemoResult run_demo(const Mesh& mesh, int k, const std::string& vtk_path = "",
                    double beta_coeff = 10.0);

}  // namespace edghdg
