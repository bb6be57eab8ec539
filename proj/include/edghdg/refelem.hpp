#pragma once

#include <vector>

#include "edghdg/geometry.hpp"

namespace edghdg {

// Quadrature rule on the reference triangle {x >= 0, y >= 0, x + y <= 1} or on
// the reference segment [0,1] (points stored in .x with .y = 0). Weights sum to
// the reference measure and are strictly positive.
struct QuadRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int exactness = 0;
};

// Exact for all polynomials of total degree <= degree. Supported range 0..20.
QuadRule triangle_rule(int degree);
QuadRule segment_rule(int degree);

// Nodal Lagrange basis of degree k on the reference triangle, equispaced nodes
// (a/k, b/k), a + b <= k, ordered row-major in b then a. Evaluation uses the
// closed-form equispaced product representation, so the Kronecker property is
// exact to rounding. Supported degrees 1..6 (0 allowed for pressure at k = 1).
class TriangleBasis {
 public:
  explicit TriangleBasis(int degree);

  int degree() const { return k_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Vec2>& nodes() const { return nodes_; }

  void eval(Vec2 p, std::vector<double>& values) const;
  void eval_grad(Vec2 p, std::vector<Vec2>& grads) const;

 private:
  int k_;
  std::vector<Vec2> nodes_;
};

// Nodal Lagrange basis of degree k on [0,1], nodes i/k (node 0 at t = 0).
class SegmentBasis {
 public:
  explicit SegmentBasis(int degree);

  int degree() const { return k_; }
  int size() const { return k_ + 1; }
  const std::vector<double>& nodes() const { return nodes_; }

  void eval(double t, std::vector<double>& values) const;

 private:
  int k_;
  std::vector<double> nodes_;
};

}  // namespace edghdg
