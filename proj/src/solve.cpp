#include "edghdg/solve.hpp"

#include <cctype>
#include <string>

#ifdef EDGHDG_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#else
#include <Eigen/SparseLU>
#endif

#include "edghdg/errors.hpp"

namespace edghdg {

namespace {

#ifdef EDGHDG_HAVE_UMFPACK
using DirectFactor = Eigen::UmfPackLU<Eigen::SparseMatrix<double>>;
#else
using DirectFactor = Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>;

// The factorization reports zero pivots in prose; pull out the first integer so
// it can be mapped back to an unknown.
long parse_first_integer(const std::string& message) {
  std::size_t i = 0;
  while (i < message.size() && !std::isdigit(static_cast<unsigned char>(message[i]))) ++i;
  if (i == message.size()) return -1;
  long value = 0;
  while (i < message.size() && std::isdigit(static_cast<unsigned char>(message[i]))) {
    value = value * 10 + (message[i] - '0');
    ++i;
  }
  return value;
}
#endif

void factorize_checked(DirectFactor& lu, const Eigen::SparseMatrix<double>& A,
                       const LinearSystem& sys) {
#ifdef EDGHDG_HAVE_UMFPACK
  (void)sys;
  lu.compute(A);
  if (lu.info() != Eigen::Success) {
    throw SolverError("sparse factorization failed: matrix is singular or badly scaled");
  }
#else
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success) {
    std::string msg = "sparse factorization failed";
    const std::string detail = lu.lastErrorMessage();
    if (!detail.empty()) msg += ": " + detail;
    const long col = parse_first_integer(detail);
    if (col >= 0 && col < A.cols() && sys.layout && sys.mesh) {
      msg += " [" + sys.layout->describe(*sys.mesh, col) + "]";
    }
    throw SolverError(msg);
  }
#endif
}

}  // namespace

SolveResult solve_direct(const LinearSystem& sys) {
  if (sys.A.rows() != sys.A.cols() || sys.A.rows() != sys.b.size()) {
    throw SolverError("system dimensions are inconsistent");
  }

  const DofLayout* layout = sys.layout;
  const bool bordered =
      layout && layout->has_multiplier() && sys.A.rows() == layout->n_total;

  if (!bordered) {
    DirectFactor lu;
    factorize_checked(lu, sys.A, sys);
    SolveResult result;
    result.x = lu.solve(sys.b);
    if (lu.info() != Eigen::Success) throw SolverError("sparse backsolve failed");

    // One step of iterative refinement tightens the residual at negligible
    // cost and keeps the algorithm fixed, so repeated solves are bit-identical.
    Eigen::VectorXd r = sys.b - sys.A * result.x;
    result.x += lu.solve(r);
    r = sys.b - sys.A * result.x;
    const double bnorm = sys.b.norm();
    result.rel_residual = (bnorm > 0.0) ? r.norm() / bnorm : r.norm();
    return result;
  }

  // The mean constraint couples the multiplier to every cell pressure dof, and
  // factoring that dense row destroys sparsity. Solve the bordered system
  // instead: the multiplier equals the pairing of the load with the
  // constant-pressure mode, one pressure dof is pinned to make the remaining
  // block regular, and the solution is shifted along the constant mode to
  // restore the zero-mean normalization. The pinned equation is redundant for
  // compatible data, so nothing is lost.
  const long n = layout->n_total;
  const long mdof = layout->multiplier_dof();
  const long pinned = layout->offset[2];  // first cell pressure dof

  Eigen::VectorXd constant_mode = Eigen::VectorXd::Zero(n);
  for (int block = 2; block <= 4; ++block) {
    for (long d = 0; d < layout->size[block]; ++d) {
      constant_mode[layout->offset[block] + d] = 1.0;
    }
  }

  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);  // mean-constraint column
  for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, mdof); it; ++it) {
    z[it.row()] = it.value();
  }
  const double volume = z.dot(constant_mode);
  if (volume <= 0.0) throw SolverError("mean constraint has no volume pairing");
  const double lambda = constant_mode.dot(sys.b) / volume;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(sys.A.nonZeros()) + 2);
  for (long col = 0; col < n; ++col) {
    if (col == mdof || col == pinned) continue;
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, col); it; ++it) {
      if (it.row() == mdof || it.row() == pinned) continue;
      trips.emplace_back(it.row(), col, it.value());
    }
  }
  trips.emplace_back(mdof, mdof, 1.0);
  trips.emplace_back(pinned, pinned, 1.0);
  Eigen::SparseMatrix<double> reduced(n, n);
  reduced.setFromTriplets(trips.begin(), trips.end());
  reduced.makeCompressed();

  Eigen::VectorXd rb = sys.b - lambda * z;
  rb[mdof] = 0.0;
  rb[pinned] = 0.0;

  DirectFactor lu;
  factorize_checked(lu, reduced, sys);
  Eigen::VectorXd y = lu.solve(rb);
  if (lu.info() != Eigen::Success) throw SolverError("sparse backsolve failed");
  Eigen::VectorXd rr = rb - reduced * y;
  y += lu.solve(rr);

  SolveResult result;
  const double shift = -z.dot(y) / volume;
  result.x = y + shift * constant_mode;
  result.x[mdof] = lambda;

  const Eigen::VectorXd r = sys.b - sys.A * result.x;
  const double bnorm = sys.b.norm();
  result.rel_residual = (bnorm > 0.0) ? r.norm() / bnorm : r.norm();
  return result;
}

SolutionFields::SolutionFields(const Mesh& mesh, const DofLayout& layout,
                               Eigen::VectorXd x)
    : mesh_(&mesh),
      layout_(&layout),
      x_(std::move(x)),
      basis_v_(layout.k),
      basis_q_(layout.k - 1),
      basis_f_(layout.k) {
  if (x_.size() != layout.n_total) {
    throw InputError("coefficient vector does not match the layout");
  }
}

Vec2 SolutionFields::to_reference(int cell, Vec2 p) const {
  const Cell& c = mesh_->cells[cell];
  const Vec2 p0 = mesh_->vertices[c.v[0]];
  const Vec2 p1 = mesh_->vertices[c.v[1]];
  const Vec2 p2 = mesh_->vertices[c.v[2]];
  const double j00 = p1.x - p0.x, j01 = p2.x - p0.x;
  const double j10 = p1.y - p0.y, j11 = p2.y - p0.y;
  const double det = j00 * j11 - j01 * j10;
  const Vec2 d = p - p0;
  return {(j11 * d.x - j01 * d.y) / det, (-j10 * d.x + j00 * d.y) / det};
}

Vec2 SolutionFields::velocity(int cell, Vec2 p) const {
  std::vector<double> vals;
  basis_v_.eval(to_reference(cell, p), vals);
  Vec2 u{0.0, 0.0};
  for (int i = 0; i < layout_->nb; ++i) {
    u.x += x_[layout_->cell_velocity_dof(cell, 0, i)] * vals[i];
    u.y += x_[layout_->cell_velocity_dof(cell, 1, i)] * vals[i];
  }
  return u;
}

Eigen::Matrix2d SolutionFields::velocity_gradient(int cell, Vec2 p) const {
  const Cell& c = mesh_->cells[cell];
  const Vec2 p0 = mesh_->vertices[c.v[0]];
  const Vec2 p1 = mesh_->vertices[c.v[1]];
  const Vec2 p2 = mesh_->vertices[c.v[2]];
  const double j00 = p1.x - p0.x, j01 = p2.x - p0.x;
  const double j10 = p1.y - p0.y, j11 = p2.y - p0.y;
  const double det = j00 * j11 - j01 * j10;

  std::vector<Vec2> grads;
  basis_v_.eval_grad(to_reference(cell, p), grads);
  Eigen::Matrix2d G = Eigen::Matrix2d::Zero();
  for (int i = 0; i < layout_->nb; ++i) {
    const Vec2 g{(j11 * grads[i].x - j10 * grads[i].y) / det,
                 (-j01 * grads[i].x + j00 * grads[i].y) / det};
    const double c0 = x_[layout_->cell_velocity_dof(cell, 0, i)];
    const double c1 = x_[layout_->cell_velocity_dof(cell, 1, i)];
    G(0, 0) += c0 * g.x;
    G(0, 1) += c0 * g.y;
    G(1, 0) += c1 * g.x;
    G(1, 1) += c1 * g.y;
  }
  return G;
}

double SolutionFields::divergence(int cell, Vec2 p) const {
  const Eigen::Matrix2d G = velocity_gradient(cell, p);
  return G(0, 0) + G(1, 1);
}

double SolutionFields::pressure(int cell, Vec2 p) const {
  std::vector<double> vals;
  basis_q_.eval(to_reference(cell, p), vals);
  double value = 0.0;
  for (int i = 0; i < layout_->nq; ++i) {
    value += x_[layout_->cell_pressure_dof(cell, i)] * vals[i];
  }
  return value;
}

Vec2 SolutionFields::facet_velocity(int facet, double t) const {
  std::vector<double> vals;
  basis_f_.eval(t, vals);
  Vec2 u{0.0, 0.0};
  for (int m = 0; m <= layout_->k; ++m) {
    u.x += x_[layout_->facet_velocity_dof(*mesh_, facet, 0, m)] * vals[m];
    u.y += x_[layout_->facet_velocity_dof(*mesh_, facet, 1, m)] * vals[m];
  }
  return u;
}

double SolutionFields::facet_pressure(Region side, int facet, double t) const {
  std::vector<double> vals;
  basis_f_.eval(t, vals);
  double value = 0.0;
  for (int m = 0; m <= layout_->k; ++m) {
    value += x_[layout_->facet_pressure_dof(side, facet, m)] * vals[m];
  }
  return value;
}

double SolutionFields::multiplier() const {
  return layout_->has_multiplier() ? x_[layout_->multiplier_dof()] : 0.0;
}

}  // namespace edghdg
