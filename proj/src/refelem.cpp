#include "edghdg/refelem.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "edghdg/errors.hpp"

namespace edghdg {

namespace {

// Gauss-Legendre nodes and weights on [-1,1] by the Golub-Welsch eigenvalue
// method: nodes are eigenvalues of the symmetric Jacobi matrix, weights are
// 2 (first eigenvector component)^2. Deterministic and accurate to rounding.
void gauss_legendre(int m, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(m, 0.0);
  weights.assign(m, 0.0);
  if (m == 1) {
    nodes[0] = 0.0;
    weights[0] = 2.0;
    return;
  }
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
  for (int i = 1; i < m; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    J(i - 1, i) = b;
    J(i, i - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  for (int i = 0; i < m; ++i) {
    nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = 2.0 * v0 * v0;
  }
}

}  // namespace

QuadRule segment_rule(int degree) {
  if (degree < 0 || degree > 20) {
    throw InputError("segment quadrature degree must be in 0..20, got " +
                     std::to_string(degree));
  }
  const int m = degree / 2 + 1;  // exactness 2m - 1 >= degree
  std::vector<double> x, w;
  gauss_legendre(m, x, w);
  QuadRule rule;
  rule.exactness = 2 * m - 1;
  rule.points.resize(m);
  rule.weights.resize(m);
  for (int i = 0; i < m; ++i) {
    rule.points[i] = {0.5 * (x[i] + 1.0), 0.0};
    rule.weights[i] = 0.5 * w[i];
  }
  return rule;
}

QuadRule triangle_rule(int degree) {
  if (degree < 0 || degree > 20) {
    throw InputError("triangle quadrature degree must be in 0..20, got " +
                     std::to_string(degree));
  }
  // Conical product rule: map the unit square onto the triangle with
  // x = s (1 - t), y = t; the Jacobian (1 - t) joins the weight. A polynomial
  // of total degree d becomes degree d in s and d + 1 in t, so m Gauss points
  // with 2m - 1 >= d + 1 are exact in both directions.
  const int m = (degree + 1) / 2 + 1;
  std::vector<double> x, w;
  gauss_legendre(m, x, w);
  QuadRule rule;
  rule.exactness = degree;
  rule.points.reserve(static_cast<std::size_t>(m) * m);
  rule.weights.reserve(static_cast<std::size_t>(m) * m);
  for (int a = 0; a < m; ++a) {
    const double s = 0.5 * (x[a] + 1.0);
    const double ws = 0.5 * w[a];
    for (int b = 0; b < m; ++b) {
      const double t = 0.5 * (x[b] + 1.0);
      const double wt = 0.5 * w[b];
      rule.points.push_back({s * (1.0 - t), t});
      rule.weights.push_back(ws * wt * (1.0 - t));
    }
  }
  return rule;
}

namespace {

// Equispaced-node one-dimensional Lagrange factor and its derivative:
// P_m(u) = prod_{r=0}^{m-1} (k u - r) / (m - r), exact Kronecker at u = i/k.
double silvester(int m, int k, double u) {
  double p = 1.0;
  for (int r = 0; r < m; ++r) p *= (k * u - r) / static_cast<double>(m - r);
  return p;
}

double silvester_deriv(int m, int k, double u) {
  double sum = 0.0;
  for (int s = 0; s < m; ++s) {
    double term = static_cast<double>(k) / (m - s);
    for (int r = 0; r < m; ++r) {
      if (r == s) continue;
      term *= (k * u - r) / static_cast<double>(m - r);
    }
    sum += term;
  }
  return sum;
}

}  // namespace

TriangleBasis::TriangleBasis(int degree) : k_(degree) {
  if (degree < 0 || degree > 6) {
    throw InputError("triangle basis degree must be in 0..6, got " +
                     std::to_string(degree));
  }
  if (degree == 0) {
    nodes_.push_back({1.0 / 3.0, 1.0 / 3.0});
    return;
  }
  for (int b = 0; b <= k_; ++b) {
    for (int a = 0; a + b <= k_; ++a) {
      nodes_.push_back({static_cast<double>(a) / k_, static_cast<double>(b) / k_});
    }
  }
}

void TriangleBasis::eval(Vec2 p, std::vector<double>& values) const {
  values.assign(nodes_.size(), 0.0);
  if (k_ == 0) {
    values[0] = 1.0;
    return;
  }
  const double l0 = 1.0 - p.x - p.y;
  int idx = 0;
  for (int b = 0; b <= k_; ++b) {
    for (int a = 0; a + b <= k_; ++a, ++idx) {
      const int c = k_ - a - b;
      values[idx] = silvester(c, k_, l0) * silvester(a, k_, p.x) * silvester(b, k_, p.y);
    }
  }
}

void TriangleBasis::eval_grad(Vec2 p, std::vector<Vec2>& grads) const {
  grads.assign(nodes_.size(), Vec2{});
  if (k_ == 0) return;
  const double l0 = 1.0 - p.x - p.y;
  int idx = 0;
  for (int b = 0; b <= k_; ++b) {
    for (int a = 0; a + b <= k_; ++a, ++idx) {
      const int c = k_ - a - b;
      const double pc = silvester(c, k_, l0);
      const double pa = silvester(a, k_, p.x);
      const double pb = silvester(b, k_, p.y);
      const double dc = silvester_deriv(c, k_, l0);
      const double da = silvester_deriv(a, k_, p.x);
      const double db = silvester_deriv(b, k_, p.y);
      // l0 depends on both coordinates with d l0 / dx = d l0 / dy = -1.
      grads[idx] = {-dc * pa * pb + pc * da * pb, -dc * pa * pb + pc * pa * db};
    }
  }
}

SegmentBasis::SegmentBasis(int degree) : k_(degree) {
  if (degree < 1 || degree > 6) {
    throw InputError("segment basis degree must be in 1..6, got " +
                     std::to_string(degree));
  }
  for (int i = 0; i <= k_; ++i) nodes_.push_back(static_cast<double>(i) / k_);
}

void SegmentBasis::eval(double t, std::vector<double>& values) const {
  values.assign(k_ + 1, 0.0);
  for (int i = 0; i <= k_; ++i) {
    double p = 1.0;
    for (int r = 0; r <= k_; ++r) {
      if (r == i) continue;
      p *= (k_ * t - r) / static_cast<double>(i - r);
    }
    values[i] = p;
  }
}

}  // namespace edghdg
