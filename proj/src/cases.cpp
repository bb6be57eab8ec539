#include "edghdg/cases.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "edghdg/errors.hpp"
#include "edghdg/vtk.hpp"

namespace edghdg {

namespace {

constexpr double kPi = std::numbers::pi;

const char* class_name(FacetClass cls) {
  switch (cls) {
    case FacetClass::GammaS: return "free-flow boundary";
    case FacetClass::GammaD: return "porous boundary";
    case FacetClass::GammaS1: return "inflow";
    case FacetClass::GammaS2: return "outflow";
    case FacetClass::GammaS3: return "top wall";
    case FacetClass::GammaD1: return "porous side walls";
    case FacetClass::GammaD2: return "porous bottom";
    default: return "interior";
  }
}

}  // namespace

CaseDefinition manufactured_case(double mu, double kappa, double beta_coeff) {
  CaseDefinition def;
  def.id = "manufactured";
  def.split = BoundarySplit::Collapsed;
  def.exact = manufactured_solution(mu, kappa);
  def.config = manufactured_config(*def.exact, beta_coeff);
  return def;
}

double demo_permeability(Vec2 x) {
  const double osc = std::sin(10.0 * kPi * x.x) * std::cos(20.0 * kPi * x.y * x.y) +
                     std::pow(std::cos(6.4 * kPi * x.x), 2) * std::sin(9.2 * kPi * x.y);
  return 700.0 * (1.0 + 0.5 * osc) + 100.0;
}

CaseDefinition demo_case(double beta_coeff) {
  CaseDefinition def;
  def.id = "demo";
  def.split = BoundarySplit::HeterogeneousCase;
  ProblemConfig& config = def.config;
  config.mu = 0.1;
  config.alpha = 0.5;
  config.beta_coeff = beta_coeff;
  config.kappa = demo_permeability;

  BoundaryCondition inflow;
  inflow.kind = BcKind::VelocityDirichlet;
  inflow.velocity = [](Vec2 x) -> Vec2 { return {x.y * (1.5 - x.y) / 5.0, 0.0}; };
  config.bc[FacetClass::GammaS1] = inflow;
  config.bc[FacetClass::GammaS2].kind = BcKind::TractionOutflow;
  config.bc[FacetClass::GammaS3].kind = BcKind::SlipWall;
  config.bc[FacetClass::GammaD1].kind = BcKind::NormalFlux;  // impermeable
  BoundaryCondition bottom;
  bottom.kind = BcKind::PressureDirichlet;
  bottom.pressure = -0.05;
  config.bc[FacetClass::GammaD2] = bottom;
  return def;
}

FluxReport flux_report(const SolutionFields& fields) {
  const Mesh& mesh = fields.mesh();
  const int k = fields.layout().k;
  const QuadRule rule = segment_rule(2 * k + 2);

  FluxReport rep;
  for (std::size_t fid = 0; fid < mesh.facets.size(); ++fid) {
    const Facet& f = mesh.facets[fid];
    const Vec2 a = mesh.vertices[f.v0];
    const Vec2 b = mesh.vertices[f.v1];

    if (is_exterior(f.cls)) {
      double flux = 0.0, inflow = 0.0;
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const double w = rule.weights[q] * f.length;
        const double t = rule.points[q].x;
        const Vec2 x = a + t * (b - a);
        const double un = dot(fields.velocity(f.owner, x), f.normal);
        flux += w * un;
        inflow += w * std::max(0.0, -un);
      }
      rep.boundary[f.cls] += flux;
      rep.balance += flux;
      rep.inflow_scale += inflow;
      continue;
    }

    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double w = rule.weights[q] * f.length;
      const double t = rule.points[q].x;
      const Vec2 x = a + t * (b - a);
      const double un_o = dot(fields.velocity(f.owner, x), f.normal);
      const double un_n = dot(fields.velocity(f.neighbor, x), f.normal);
      if (f.cls == FacetClass::Interface) {
        const Vec2 ubar = fields.facet_velocity(static_cast<int>(fid), t);
        const double ubn = dot(ubar, f.normal);
        rep.interface_flux += w * ubn;
        rep.max_normal_jump = std::max(rep.max_normal_jump,
                                       std::max(std::abs(un_o - ubn), std::abs(un_n - ubn)));
        const double ps = fields.facet_pressure(Region::Stokes, static_cast<int>(fid), t);
        const double pd = fields.facet_pressure(Region::Darcy, static_cast<int>(fid), t);
        rep.max_interface_pressure_jump =
            std::max(rep.max_interface_pressure_jump, std::abs(ps - pd));
        const Vec2 slip = tangential(fields.velocity(f.owner, x) -
                                         fields.velocity(f.neighbor, x),
                                     f.normal);
        rep.max_interface_tangential_jump =
            std::max(rep.max_interface_tangential_jump, norm(slip));
      } else {
        rep.max_normal_jump = std::max(rep.max_normal_jump, std::abs(un_o - un_n));
      }
    }
  }
  return rep;
}

std::string format_flux_report(const FluxReport& rep) {
  char buf[160];
  std::string out = "boundary fluxes (integral of u.n):\n";
  for (const auto& [cls, flux] : rep.boundary) {
    std::snprintf(buf, sizeof buf, "  %-20s %+.6e\n", class_name(cls), flux);
    out += buf;
  }
  const double rel = rep.inflow_scale > 0.0 ? std::abs(rep.balance) / rep.inflow_scale
                                            : std::abs(rep.balance);
  std::snprintf(buf, sizeof buf, "net boundary flux      %+.6e  (%.3e relative to inflow)\n",
                rep.balance, rel);
  out += buf;
  std::snprintf(buf, sizeof buf, "interface flux         %+.6e\n", rep.interface_flux);
  out += buf;
  std::snprintf(buf, sizeof buf, "max facet pressure jump on the interface  %.6e\n",
                rep.max_interface_pressure_jump);
  out += buf;
  std::snprintf(buf, sizeof buf, "max normal-trace mismatch                 %.6e\n",
                rep.max_normal_jump);
  out += buf;
  std::snprintf(buf, sizeof buf, "max tangential slip across the interface  %.6e\n",
                rep.max_interface_tangential_jump);
  out += buf;
  return out;
}

DemoResult run_demo(const Mesh& mesh, int k, const std::string& vtk_path,
                    double beta_coeff) {
  Mesh local = mesh;
  classify_facets(local, BoundarySplit::HeterogeneousCase);
  const CaseDefinition def = demo_case(beta_coeff);
  const DofLayout layout = build_layout(local, k);
  const LinearSystem sys = assemble_system(local, layout, def.config);
  const SolveResult sol = solve_direct(sys);
  const SolutionFields fields(local, layout, sol.x);

  DemoResult result;
  result.flux = flux_report(fields);
  result.solver_residual = sol.rel_residual;
  result.n_dofs = layout.n_total;
  result.n_cells = static_cast<int>(local.cells.size());
  if (!vtk_path.empty()) write_vtk(vtk_path, fields, def.config.kappa);
  return result;
}

}  // namespace edghdg
