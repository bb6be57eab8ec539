#pragma once

#include <Eigen/Dense>

#include "edghdg/assembly.hpp"
#include "edghdg/mesh.hpp"
#include "edghdg/spaces.hpp"

namespace edghdg {

struct SolveResult {
  Eigen::VectorXd x;
  double rel_residual = 0.0;  // |b - A x| / |b| (0 for b = 0)
};

// Sparse direct factorization with one step of iterative refinement. Throws
// SolverError on breakdown, naming the offending dof when the factorization
// reports one. Deterministic: repeated calls return bit-identical vectors.
SolveResult solve_direct(const LinearSystem& sys);

// Coefficient views over a solved system, with point evaluation. Cell fields
// are evaluated in physical coordinates within a given cell; facet fields at
// parameter t in [0,1] along the facet from its lower to its higher vertex.
class SolutionFields {
 public:
  SolutionFields(const Mesh& mesh, const DofLayout& layout, Eigen::VectorXd x);

  Vec2 velocity(int cell, Vec2 p) const;
  Eigen::Matrix2d velocity_gradient(int cell, Vec2 p) const;  // rows: component
  double divergence(int cell, Vec2 p) const;
  double pressure(int cell, Vec2 p) const;
  Vec2 facet_velocity(int facet, double t) const;
  double facet_pressure(Region side, int facet, double t) const;
  double multiplier() const;

  const Eigen::VectorXd& coefficients() const { return x_; }
  const Mesh& mesh() const { return *mesh_; }
  const DofLayout& layout() const { return *layout_; }

 private:
  Vec2 to_reference(int cell, Vec2 p) const;

  const Mesh* mesh_;
  const DofLayout* layout_;
  Eigen::VectorXd x_;
  TriangleBasis basis_v_;
  TriangleBasis basis_q_;
  SegmentBasis basis_f_;
};

}  // namespace edghdg
