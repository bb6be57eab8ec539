#include "edghdg/verify.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "edghdg/errors.hpp"

namespace edghdg {

namespace {

constexpr double kPi = std::numbers::pi;

Vec2 facet_point(const Mesh& mesh, int facet, double t) {
  const Facet& f = mesh.facets[facet];
  return mesh.vertices[f.v0] + t * (mesh.vertices[f.v1] - mesh.vertices[f.v0]);
}

}  // namespace

ExactSolution manufactured_solution(double mu, double kappa) {
  ExactSolution ex;
  ex.mu = mu;
  ex.kappa = kappa;
  ex.alpha = mu * std::sqrt(kappa) * (1.0 + 4.0 * kPi * kPi) / 2.0;

  ex.u_s = [](Vec2 p) -> Vec2 {
    const double s = std::sin(kPi * p.x), c = std::cos(kPi * p.x);
    const double E = std::exp(0.5 * p.y);
    return {-s * E / (2.0 * kPi * kPi), c * E / kPi};
  };
  ex.grad_u_s = [](Vec2 p) {
    const double s = std::sin(kPi * p.x), c = std::cos(kPi * p.x);
    const double E = std::exp(0.5 * p.y);
    Eigen::Matrix2d G;
    G(0, 0) = -c * E / (2.0 * kPi);
    G(0, 1) = -s * E / (4.0 * kPi * kPi);
    G(1, 0) = -s * E;
    G(1, 1) = c * E / (2.0 * kPi);
    return G;
  };
  ex.p_s = [mu, kappa](Vec2 p) {
    return (kappa * mu - 2.0) / (kappa * kPi) * std::cos(kPi * p.x) * std::exp(0.5 * p.y);
  };

  ex.u_d = [](Vec2 p) -> Vec2 {
    const double s = std::sin(kPi * p.x), c = std::cos(kPi * p.x);
    const double E = std::exp(0.5 * p.y);
    return {-2.0 * s * E, c * E / kPi};
  };
  ex.grad_u_d = [](Vec2 p) {
    const double s = std::sin(kPi * p.x), c = std::cos(kPi * p.x);
    const double E = std::exp(0.5 * p.y);
    Eigen::Matrix2d G;
    G(0, 0) = -2.0 * kPi * c * E;
    G(0, 1) = -s * E;
    G(1, 0) = -s * E;
    G(1, 1) = c * E / (2.0 * kPi);
    return G;
  };
  ex.p_d = [kappa](Vec2 p) {
    return -2.0 / (kappa * kPi) * std::cos(kPi * p.x) * std::exp(0.5 * p.y);
  };

  // Momentum source -div(2 mu eps(u)) + grad p in the free-flow region; the
  // porous momentum balance is source free by construction.
  ex.f_s = [mu, kappa](Vec2 p) -> Vec2 {
    const double s = std::sin(kPi * p.x), c = std::cos(kPi * p.x);
    const double E = std::exp(0.5 * p.y);
    const double pres = (kappa * mu - 2.0) / kappa;
    const double fx = s * E * (-mu * (0.5 - 1.0 / (8.0 * kPi * kPi)) - pres);
    const double fy = c * E * (mu * (kPi - 1.0 / (4.0 * kPi)) + pres / (2.0 * kPi));
    return {fx, fy};
  };
  // Mass source -div u in the porous region.
  ex.f_d = [](Vec2 p) {
    return (4.0 * kPi * kPi - 1.0) / (2.0 * kPi) * std::cos(kPi * p.x) *
           std::exp(0.5 * p.y);
  };
  return ex;
}

ProblemConfig manufactured_config(const ExactSolution& exact, double beta_coeff) {
  ProblemConfig config;
  config.mu = exact.mu;
  const double kappa = exact.kappa;
  config.kappa = [kappa](Vec2) { return kappa; };
  config.alpha = exact.alpha;
  config.beta_coeff = beta_coeff;
  config.f_s = exact.f_s;
  config.f_d = exact.f_d;
  BoundaryCondition dirichlet;
  dirichlet.kind = BcKind::VelocityDirichlet;
  dirichlet.velocity = exact.u_s;
  config.bc[FacetClass::GammaS] = dirichlet;
  BoundaryCondition flux;
  flux.kind = BcKind::NormalFlux;
  flux.normal_flux = [u = exact.u_d](Vec2 x, Vec2 n) { return dot(u(x), n); };
  config.bc[FacetClass::GammaD] = flux;
  return config;
}

ErrorReport compute_errors(const SolutionFields& fields, const ExactSolution& exact) {
  const Mesh& mesh = fields.mesh();
  const DofLayout& layout = fields.layout();
  const int k = layout.k;
  const QuadRule cell_rule = triangle_rule(std::min(2 * k + 6, 20));
  const QuadRule facet_rule = segment_rule(std::min(2 * k + 6, 20));

  TriangleBasis basis_q(k - 1);
  const int nq = layout.nq;
  std::vector<std::vector<double>> q_vals(cell_rule.points.size());
  for (std::size_t q = 0; q < cell_rule.points.size(); ++q) {
    basis_q.eval(cell_rule.points[q], q_vals[q]);
  }
  // The mass source is projected with the assembly rule so the divergence
  // residual measures the scheme's algebraic identity, not the gap between
  // two quadrature approximations of the projection.
  const QuadRule proj_rule = triangle_rule(2 * k + 2);
  std::vector<std::vector<double>> q_vals_proj(proj_rule.points.size());
  for (std::size_t q = 0; q < proj_rule.points.size(); ++q) {
    basis_q.eval(proj_rule.points[q], q_vals_proj[q]);
  }

  ErrorReport rep;
  rep.total_cells = static_cast<int>(mesh.cells.size());
  double err_u2[2] = {0.0, 0.0}, err_p2[2] = {0.0, 0.0};
  double div2[2] = {0.0, 0.0};
  double grad2_s = 0.0, facet2_s = 0.0, interface_t2 = 0.0;
  double energy_p2[2] = {0.0, 0.0};

  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const Cell& cell = mesh.cells[c];
    const int r = (cell.region == Region::Stokes) ? 0 : 1;
    const Vec2 p0 = mesh.vertices[cell.v[0]];
    const Vec2 p1 = mesh.vertices[cell.v[1]];
    const Vec2 p2 = mesh.vertices[cell.v[2]];
    const double det = 2.0 * cell.area;

    if (r == 0) {
      rep.s.cells += 1;
      rep.s.h_max = std::max(rep.s.h_max, cell.h);
    } else {
      rep.d.cells += 1;
      rep.d.h_max = std::max(rep.d.h_max, cell.h);
    }

    // Cellwise projection of the mass source, entering the divergence residual.
    Eigen::VectorXd proj = Eigen::VectorXd::Zero(nq);
    if (r == 1 && exact.f_d) {
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nq, nq);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nq);
      for (std::size_t q = 0; q < proj_rule.points.size(); ++q) {
        const double w = proj_rule.weights[q] * det;
        const Vec2 x = p0 + proj_rule.points[q].x * (p1 - p0) + proj_rule.points[q].y * (p2 - p0);
        const double f = exact.f_d(x);
        for (int i = 0; i < nq; ++i) {
          rhs[i] += w * f * q_vals_proj[q][i];
          for (int j = 0; j < nq; ++j) M(i, j) += w * q_vals_proj[q][i] * q_vals_proj[q][j];
        }
      }
      proj = M.ldlt().solve(rhs);
    }

    for (std::size_t q = 0; q < cell_rule.points.size(); ++q) {
      const double w = cell_rule.weights[q] * det;
      const Vec2 x = p0 + cell_rule.points[q].x * (p1 - p0) + cell_rule.points[q].y * (p2 - p0);
      const Vec2 uh = fields.velocity(static_cast<int>(c), x);
      const double ph = fields.pressure(static_cast<int>(c), x);
      const Vec2 ue = exact.velocity(cell.region, x);
      const double pe = exact.pressure(cell.region, x);
      err_u2[r] += w * (dot(uh - ue, uh - ue));
      err_p2[r] += w * (ph - pe) * (ph - pe);
      energy_p2[r] += w * (ph - pe) * (ph - pe);

      const Eigen::Matrix2d Gh = fields.velocity_gradient(static_cast<int>(c), x);
      const double divh = Gh(0, 0) + Gh(1, 1);
      if (r == 0) {
        const Eigen::Matrix2d Ge = exact.grad_u_s(x);
        grad2_s += w * (Gh - Ge).squaredNorm();
        div2[0] += w * divh * divh;
      } else {
        double pf = 0.0;
        for (int i = 0; i < nq; ++i) pf += proj[i] * q_vals[q][i];
        const double resid = divh + pf;
        div2[1] += w * resid * resid;
      }
    }

    // Facet shares, summed per cell so shared facets are visited twice.
    for (int e = 0; e < 3; ++e) {
      const int fid = mesh.cell_facets[c][e];
      const Facet& f = mesh.facets[fid];
      const Region side = cell.region;
      double pen2 = 0.0, pbar2 = 0.0;
      for (std::size_t q = 0; q < facet_rule.points.size(); ++q) {
        const double w = facet_rule.weights[q] * f.length;
        const double t = facet_rule.points[q].x;
        const Vec2 x = facet_point(mesh, fid, t);
        if (r == 0) {
          const Vec2 diff = fields.velocity(static_cast<int>(c), x) -
                            fields.facet_velocity(fid, t);
          pen2 += w * dot(diff, diff);
        }
        const double pbe = exact.pressure(side, x);
        const double pbh = fields.facet_pressure(side, fid, t);
        pbar2 += w * (pbe - pbh) * (pbe - pbh);
      }
      if (r == 0) facet2_s += pen2 / cell.h;
      energy_p2[r] += cell.h * pbar2;
    }
  }

  // Normal-trace mismatch and the interface tangential error term.
  double jump[2] = {0.0, 0.0};
  for (std::size_t fid = 0; fid < mesh.facets.size(); ++fid) {
    const Facet& f = mesh.facets[fid];
    if (f.cls == FacetClass::InteriorS || f.cls == FacetClass::InteriorD) {
      const int r = (f.cls == FacetClass::InteriorS) ? 0 : 1;
      for (std::size_t q = 0; q < facet_rule.points.size(); ++q) {
        const double t = facet_rule.points[q].x;
        const Vec2 x = facet_point(mesh, static_cast<int>(fid), t);
        const double un_o = dot(fields.velocity(f.owner, x), f.normal);
        const double un_n = dot(fields.velocity(f.neighbor, x), f.normal);
        jump[r] = std::max(jump[r], std::abs(un_o - un_n));
      }
    } else if (f.cls == FacetClass::Interface) {
      for (std::size_t q = 0; q < facet_rule.points.size(); ++q) {
        const double w = facet_rule.weights[q] * f.length;
        const double t = facet_rule.points[q].x;
        const Vec2 x = facet_point(mesh, static_cast<int>(fid), t);
        const Vec2 ubar = fields.facet_velocity(static_cast<int>(fid), t);
        const double un_s = dot(fields.velocity(f.owner, x), f.normal);
        const double un_d = dot(fields.velocity(f.neighbor, x), f.normal);
        const double ubn = dot(ubar, f.normal);
        jump[0] = std::max(jump[0], std::abs(un_s - ubn));
        jump[1] = std::max(jump[1], std::abs(un_d - ubn));
        const Vec2 et = tangential(exact.u_s(x) - ubar, f.normal);
        interface_t2 += w * dot(et, et);
      }
    }
  }

  rep.s.err_u = std::sqrt(err_u2[0]);
  rep.d.err_u = std::sqrt(err_u2[1]);
  rep.s.err_p = std::sqrt(err_p2[0]);
  rep.d.err_p = std::sqrt(err_p2[1]);
  rep.s.div_residual = std::sqrt(div2[0]);
  rep.d.div_residual = std::sqrt(div2[1]);
  rep.s.jump_residual = jump[0];
  rep.d.jump_residual = jump[1];
  rep.s.energy_u = std::sqrt(grad2_s + facet2_s + interface_t2);
  rep.d.energy_u = std::sqrt(err_u2[1]);
  rep.energy_u_total = std::sqrt(grad2_s + facet2_s + interface_t2 + err_u2[1]);
  rep.s.energy_p = std::sqrt(energy_p2[0]);
  rep.d.energy_p = std::sqrt(energy_p2[1]);
  return rep;
}

ConvergenceStudy convergence_sweep(const std::vector<int>& levels, int k, double mu,
                                   double kappa, double beta_coeff, bool perturb,
                                   unsigned seed) {
  if (levels.empty()) throw InputError("convergence sweep needs at least one level");
  ConvergenceStudy study;
  study.k = k;
  study.mu = mu;
  study.kappa = kappa;
  study.levels = levels;

  const ExactSolution exact = manufactured_solution(mu, kappa);
  const ProblemConfig config = manufactured_config(exact, beta_coeff);
  for (const int n : levels) {
    Mesh mesh = generate_mesh(n, perturb, seed);
    classify_facets(mesh, BoundarySplit::Collapsed);
    const DofLayout layout = build_layout(mesh, k);
    const LinearSystem sys = assemble_system(mesh, layout, config);
    const SolveResult sol = solve_direct(sys);
    const SolutionFields fields(mesh, layout, sol.x);
    ErrorReport rep = compute_errors(fields, exact);
    rep.h = 1.0 / n;
    rep.solver_residual = sol.rel_residual;
    study.reports.push_back(rep);
  }
  return study;
}

double observed_rate(double err_coarse, double err_fine, double h_coarse, double h_fine) {
  return std::log(err_coarse / err_fine) / std::log(h_coarse / h_fine);
}

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace

std::string to_csv(const ConvergenceStudy& study) {
  std::string csv = "cells,h,err_u,rate_u,err_p,rate_p,div_residual,jump_residual,region\n";
  for (std::size_t i = 0; i < study.reports.size(); ++i) {
    const ErrorReport& rep = study.reports[i];
    for (const int r : {0, 1}) {
      const RegionErrors& e = (r == 0) ? rep.s : rep.d;
      std::string rate_u, rate_p;
      if (i > 0) {
        const ErrorReport& prev = study.reports[i - 1];
        const RegionErrors& pe = (r == 0) ? prev.s : prev.d;
        rate_u = sci(observed_rate(pe.err_u, e.err_u, prev.h, rep.h));
        rate_p = sci(observed_rate(pe.err_p, e.err_p, prev.h, rep.h));
      }
      csv += std::to_string(rep.total_cells) + "," + sci(rep.h) + "," + sci(e.err_u) +
             "," + rate_u + "," + sci(e.err_p) + "," + rate_p + "," +
             sci(e.div_residual) + "," + sci(e.jump_residual) + "," +
             (r == 0 ? "s" : "d") + "\n";
    }
  }
  return csv;
}

PatchResult patch_test(int n, int k, double mu, double kappa, double bottom_flux) {
  Mesh mesh = generate_mesh(n);
  classify_facets(mesh, BoundarySplit::Collapsed);
  const DofLayout layout = build_layout(mesh, k);

  ProblemConfig config;
  config.mu = mu;
  config.kappa = [kappa](Vec2) { return kappa; };
  config.alpha = 1.0;  // exercised but inert: the exact tangential slip is zero
  BoundaryCondition dirichlet;
  dirichlet.kind = BcKind::VelocityDirichlet;
  dirichlet.velocity = [](Vec2) -> Vec2 { return {0.0, 1.0}; };
  config.bc[FacetClass::GammaS] = dirichlet;
  BoundaryCondition flux;
  flux.kind = BcKind::NormalFlux;
  flux.normal_flux = [bottom_flux](Vec2, Vec2 nrm) {
    return (nrm.y < -0.5) ? bottom_flux : 0.0;
  };
  config.bc[FacetClass::GammaD] = flux;

  const LinearSystem sys = assemble_system(mesh, layout, config);
  const SolveResult sol = solve_direct(sys);

  // Exact fields: unit vertical flow, hydrostatic porous pressure with the
  // constant fixed by the zero-mean condition.
  const auto pressure = [kappa](Region r, Vec2 x) {
    return (r == Region::Stokes) ? -1.0 / (8.0 * kappa) : -(x.y - 0.375) / kappa;
  };

  TriangleBasis basis_q(k - 1);
  PatchResult result;
  result.multiplier = layout.has_multiplier() ? sol.x[layout.multiplier_dof()] : 0.0;
  double dev = std::abs(result.multiplier);

  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const Cell& cell = mesh.cells[c];
    const Vec2 p0 = mesh.vertices[cell.v[0]];
    const Vec2 p1 = mesh.vertices[cell.v[1]];
    const Vec2 p2 = mesh.vertices[cell.v[2]];
    for (int i = 0; i < layout.nb; ++i) {
      dev = std::max(dev, std::abs(sol.x[layout.cell_velocity_dof(static_cast<int>(c), 0, i)]));
      dev = std::max(dev,
                     std::abs(sol.x[layout.cell_velocity_dof(static_cast<int>(c), 1, i)] - 1.0));
    }
    const TriangleBasis& bq = basis_q;
    for (int i = 0; i < layout.nq; ++i) {
      const Vec2 node = bq.nodes()[i];
      const Vec2 x = p0 + node.x * (p1 - p0) + node.y * (p2 - p0);
      const double expected = pressure(cell.region, x);
      dev = std::max(dev,
                     std::abs(sol.x[layout.cell_pressure_dof(static_cast<int>(c), i)] - expected));
    }
  }

  for (std::size_t fid = 0; fid < mesh.facets.size(); ++fid) {
    const Facet& f = mesh.facets[fid];
    for (int m = 0; m <= k; ++m) {
      const double t = static_cast<double>(m) / k;
      const Vec2 x = (m == 0) ? mesh.vertices[f.v0]
                              : (m == k ? mesh.vertices[f.v1]
                                        : mesh.vertices[f.v0] +
                                              t * (mesh.vertices[f.v1] - mesh.vertices[f.v0]));
      if (layout.vbar_facet[fid] >= 0) {
        dev = std::max(dev, std::abs(sol.x[layout.facet_velocity_dof(mesh, static_cast<int>(fid), 0, m)]));
        dev = std::max(dev, std::abs(sol.x[layout.facet_velocity_dof(mesh, static_cast<int>(fid), 1, m)] - 1.0));
      }
      if (layout.qbar_s[fid] >= 0) {
        dev = std::max(dev, std::abs(sol.x[layout.facet_pressure_dof(Region::Stokes, static_cast<int>(fid), m)] -
                                     pressure(Region::Stokes, x)));
      }
      if (layout.qbar_d[fid] >= 0) {
        dev = std::max(dev, std::abs(sol.x[layout.facet_pressure_dof(Region::Darcy, static_cast<int>(fid), m)] -
                                     pressure(Region::Darcy, x)));
      }
    }
  }

  result.max_deviation = dev;
  result.pass = dev <= 1e-9;
  return result;
}

}  // namespace edghdg
