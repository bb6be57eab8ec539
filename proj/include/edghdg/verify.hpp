#pragma once

#include <optional>
#include <string>
#include <vector>

#include "edghdg/assembly.hpp"
#include "edghdg/solve.hpp"

namespace edghdg {

using MatrixField = std::function<Eigen::Matrix2d(Vec2)>;  // rows: component

// Region-wise closed-form solution with gradients and matching source terms.
struct ExactSolution {
  double mu = 1.0;
  double kappa = 1.0;
  double alpha = 0.0;
  VectorField u_s, u_d;
  MatrixField grad_u_s, grad_u_d;
  ScalarField p_s, p_d;
  VectorField f_s;
  ScalarField f_d;

  Vec2 velocity(Region r, Vec2 x) const { return r == Region::Stokes ? u_s(x) : u_d(x); }
  double pressure(Region r, Vec2 x) const { return r == Region::Stokes ? p_s(x) : p_d(x); }
};

// The smooth trigonometric-exponential benchmark solution; the slip coefficient
// is mu sqrt(kappa) (1 + 4 pi^2) / 2, which makes all interface conditions hold.
ExactSolution manufactured_solution(double mu, double kappa);

// Problem data driven by that solution on the collapsed boundary split:
// prescribed velocity on the free-flow boundary, prescribed normal flux on the
// porous boundary, matching sources and slip coefficient.
ProblemConfig manufactured_config(const ExactSolution& exact, double beta_coeff = 10.0);

struct RegionErrors {
  double err_u = 0.0;     // L2 velocity error
  double err_p = 0.0;     // L2 pressure error
  double energy_u = 0.0;  // region share of the mesh-dependent velocity norm
  double energy_p = 0.0;  // pressure norm share: L2 plus scaled facet deviation
  double div_residual = 0.0;   // |div u_h| (free flow), |div u_h + proj f| (porous)
  double jump_residual = 0.0;  // max normal-trace mismatch at facet quad points
  int cells = 0;
  double h_max = 0.0;
};

struct ErrorReport {
  RegionErrors s, d;
  double energy_u_total = 0.0;
  double h = 0.0;  // refinement parameter 1/n for the structured family
  int total_cells = 0;
  double solver_residual = 0.0;
};

ErrorReport compute_errors(const SolutionFields& fields, const ExactSolution& exact);

struct ConvergenceStudy {
  int k = 1;
  double mu = 1.0;
  double kappa = 1.0;
  std::vector<int> levels;          // mesh parameter n per level
  std::vector<ErrorReport> reports;  // one per level
};

ConvergenceStudy convergence_sweep(const std::vector<int>& levels, int k, double mu,
                                   double kappa, double beta_coeff = 10.0,
                                   bool perturb = false, unsigned seed = 1);

double observed_rate(double err_coarse, double err_fine, double h_coarse, double h_fine);

// CSV rows "cells,h,err_u,rate_u,err_p,rate_p,div_residual,jump_residual,region",
// floats in scientific notation with four significant digits, rates empty on
// the first level. Deterministic byte for byte.
std::string to_csv(const ConvergenceStudy& study);

struct PatchResult {
  bool pass = false;
  double max_deviation = 0.0;  // worst coefficient deviation over all blocks
  double multiplier = 0.0;     // mean-constraint multiplier, ~0 for compatible data
};

// Uniform-flow reproduction test: vertical unit velocity, piecewise-linear
// hydrostatic pressure. The discrete solution must match the interpolated
// exact fields to 1e-9 (pressure against its cellwise L2 projection). Setting
// bottom_flux to anything other than -1 makes the data incompatible and the
// test must fail.
PatchResult patch_test(int n, int k, double mu, double kappa, double bottom_flux = -1.0);

}  // namespace edghdg
