#pragma once

#include <functional>
#include <map>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "edghdg/mesh.hpp"
#include "edghdg/refelem.hpp"
#include "edghdg/spaces.hpp"

namespace edghdg {

using ScalarField = std::function<double(Vec2)>;
using VectorField = std::function<Vec2(Vec2)>;
// Prescribed normal component of the velocity, evaluated as (x, outward n).
using NormalFluxField = std::function<double(Vec2, Vec2)>;

enum class BcKind {
  None,               // interior and interface classes
  VelocityDirichlet,  // facet velocity pinned to the datum, normal trace enforced
  NormalFlux,         // u.n datum enforced through the facet pressure equation
  SlipWall,           // zero normal velocity, tangential traction-free
  TractionOutflow,    // facet pressure coupled to the facet velocity, zero traction
  PressureDirichlet,  // facet pressure pinned (porous outflow)
};

struct BoundaryCondition {
  BcKind kind = BcKind::None;
  VectorField velocity;       // VelocityDirichlet
  NormalFluxField normal_flux;  // NormalFlux
  double pressure = 0.0;      // PressureDirichlet
};

struct ProblemConfig {
  double mu = 1.0;
  ScalarField kappa;   // permeability on the porous closure (interface included)
  double alpha = 0.0;  // tangential slip coefficient on the interface
  double beta_coeff = 10.0;  // penalty is beta_coeff * k^2
  VectorField f_s;     // momentum source, free-flow region (null = zero)
  ScalarField f_d;     // mass source, porous region (null = zero)
  std::map<FacetClass, BoundaryCondition> bc;
};

struct LinearSystem {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  const Mesh* mesh = nullptr;
  const DofLayout* layout = nullptr;
  // Dofs eliminated symmetrically, with their prescribed values.
  std::vector<std::pair<long, double>> constrained;
};

// Accumulates triplets form by form; duplicate entries are summed by the final
// sparse compression in emission order, so assembly is reproducible bit for bit.
class Assembler {
 public:
  Assembler(const Mesh& mesh, const DofLayout& layout, const ProblemConfig& config);
  ~Assembler();

  // Viscous bilinear form on the free-flow region: cell strain term plus facet
  // penalty and symmetric consistency terms against the facet velocity.
  void assemble_ah_s();
  // Porous weighted vector mass term.
  void assemble_ah_d();
  // Interface tangential slip term on the facet velocity.
  void assemble_ah_interface();
  // Pressure-velocity coupling of one region: cell divergence term plus facet
  // pressure times normal trace, together with the transpose.
  void assemble_bh(Region side);
  // Facet-pressure / facet-velocity coupling on the interface (and, for the
  // free-flow side, on traction-outflow facets), with the transpose.
  void assemble_bh_interface(Region side);
  void assemble_rhs();

  // Applies essential constraints symmetrically (rhs lifting, identity rows),
  // appends the mean-pinning row/column when the layout carries it, and
  // compresses to CSC.
  LinearSystem finalize();

  const std::vector<Eigen::Triplet<double>>& triplets() const { return trips_; }
  const Eigen::VectorXd& rhs() const { return rhs_; }

  double beta() const;

 private:
  struct FacetTables;
  void add(long r, long c, double v) { trips_.emplace_back(r, c, v); }
  void add_sym(long r, long c, double v);
  std::vector<std::pair<long, double>> constrained_values() const;

  const Mesh& mesh_;
  const DofLayout& layout_;
  const ProblemConfig& config_;
  std::vector<Eigen::Triplet<double>> trips_;
  Eigen::VectorXd rhs_;

  QuadRule cell_rule_;
  QuadRule facet_rule_;
  TriangleBasis basis_v_;
  TriangleBasis basis_q_;
  SegmentBasis basis_f_;
  // Basis tables at cell rule points and at facet rule points for the six
  // (local edge, orientation) variants.
  std::vector<std::vector<double>> v_at_cell_;
  std::vector<std::vector<Vec2>> dv_at_cell_;
  std::vector<std::vector<double>> q_at_cell_;
  std::unique_ptr<FacetTables> facet_tables_;
};

// Convenience driver running every form plus the right-hand side.
LinearSystem assemble_system(const Mesh& mesh, const DofLayout& layout,
                             const ProblemConfig& config);

}  // namespace edghdg
