#include "edghdg/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "edghdg/errors.hpp"

namespace edghdg {

namespace {

struct CellGeom {
  Vec2 p0;
  double j[2][2];    // Jacobian columns p1 - p0, p2 - p0
  double det = 0.0;  // twice the area, positive for counterclockwise cells
  double itj[2][2];  // inverse transpose, pushes reference gradients forward
};

CellGeom cell_geom(const Mesh& mesh, int c) {
  const Cell& cell = mesh.cells[c];
  const Vec2 p0 = mesh.vertices[cell.v[0]];
  const Vec2 p1 = mesh.vertices[cell.v[1]];
  const Vec2 p2 = mesh.vertices[cell.v[2]];
  CellGeom g;
  g.p0 = p0;
  g.j[0][0] = p1.x - p0.x;
  g.j[0][1] = p2.x - p0.x;
  g.j[1][0] = p1.y - p0.y;
  g.j[1][1] = p2.y - p0.y;
  g.det = g.j[0][0] * g.j[1][1] - g.j[0][1] * g.j[1][0];
  const double inv = 1.0 / g.det;
  g.itj[0][0] = g.j[1][1] * inv;
  g.itj[0][1] = -g.j[1][0] * inv;
  g.itj[1][0] = -g.j[0][1] * inv;
  g.itj[1][1] = g.j[0][0] * inv;
  return g;
}

inline Vec2 push_grad(const CellGeom& g, Vec2 ref) {
  return {g.itj[0][0] * ref.x + g.itj[0][1] * ref.y,
          g.itj[1][0] * ref.x + g.itj[1][1] * ref.y};
}

inline Vec2 map_point(const CellGeom& g, Vec2 ref) {
  return {g.p0.x + g.j[0][0] * ref.x + g.j[0][1] * ref.y,
          g.p0.y + g.j[1][0] * ref.x + g.j[1][1] * ref.y};
}

// Strain inner product of two scalar-basis gradients attached to components
// d and c: eps(phi_i e_d) : eps(phi_j e_c).
inline double strain_product(Vec2 gi, int d, Vec2 gj, int c) {
  if (d == 0 && c == 0) return gi.x * gj.x + 0.5 * gi.y * gj.y;
  if (d == 1 && c == 1) return gi.y * gj.y + 0.5 * gi.x * gj.x;
  if (d == 0) return 0.5 * gi.y * gj.x;  // d = 0, c = 1
  return 0.5 * gi.x * gj.y;              // d = 1, c = 0
}

// eps(phi e_d) n for a scalar-basis gradient g.
inline Vec2 strain_normal(Vec2 g, int d, Vec2 n) {
  if (d == 0) return {g.x * n.x + 0.5 * g.y * n.y, 0.5 * g.y * n.x};
  return {0.5 * g.x * n.y, 0.5 * g.x * n.x + g.y * n.y};
}

Vec2 facet_node_position(const Mesh& mesh, int facet, int node, int k) {
  const Facet& f = mesh.facets[facet];
  if (node == 0) return mesh.vertices[f.v0];
  if (node == k) return mesh.vertices[f.v1];
  const double t = static_cast<double>(node) / k;
  return mesh.vertices[f.v0] + t * (mesh.vertices[f.v1] - mesh.vertices[f.v0]);
}

const BoundaryCondition* find_bc(const ProblemConfig& config, FacetClass cls) {
  auto it = config.bc.find(cls);
  return it == config.bc.end() ? nullptr : &it->second;
}

}  // namespace

// Cell-basis traces at facet quadrature points for the six (local edge, flip)
// variants. flip set means the facet parameter runs against the local edge
// direction. Segment-basis values are orientation independent because the
// facet parameter is global.
struct Assembler::FacetTables {
  std::vector<double> t;  // rule parameters
  std::vector<double> w;
  std::vector<double> v_vals[3][2];  // q * nb + i
  std::vector<Vec2> v_grads[3][2];
  std::vector<double> seg_vals;  // q * (k + 1) + m
};

Assembler::Assembler(const Mesh& mesh, const DofLayout& layout,
                     const ProblemConfig& config)
    : mesh_(mesh),
      layout_(layout),
      config_(config),
      rhs_(Eigen::VectorXd::Zero(layout.n_total)),
      cell_rule_(triangle_rule(2 * layout.k + 2)),
      facet_rule_(segment_rule(2 * layout.k + 2)),
      basis_v_(layout.k),
      basis_q_(layout.k - 1),
      basis_f_(layout.k) {
  const int nb = layout_.nb;
  const std::size_t ncq = cell_rule_.points.size();
  v_at_cell_.resize(ncq);
  dv_at_cell_.resize(ncq);
  q_at_cell_.resize(ncq);
  for (std::size_t q = 0; q < ncq; ++q) {
    basis_v_.eval(cell_rule_.points[q], v_at_cell_[q]);
    basis_v_.eval_grad(cell_rule_.points[q], dv_at_cell_[q]);
    basis_q_.eval(cell_rule_.points[q], q_at_cell_[q]);
  }

  facet_tables_ = std::make_unique<FacetTables>();
  FacetTables& ft = *facet_tables_;
  const std::size_t nfq = facet_rule_.points.size();
  ft.t.resize(nfq);
  ft.w = facet_rule_.weights;
  ft.seg_vals.resize(nfq * (layout_.k + 1));
  std::vector<double> seg;
  for (std::size_t q = 0; q < nfq; ++q) {
    ft.t[q] = facet_rule_.points[q].x;
    basis_f_.eval(ft.t[q], seg);
    std::copy(seg.begin(), seg.end(), ft.seg_vals.begin() + q * (layout_.k + 1));
  }
  const Vec2 ref[3] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  std::vector<double> vals;
  std::vector<Vec2> grads;
  for (int e = 0; e < 3; ++e) {
    const Vec2 a = ref[(e + 1) % 3];
    const Vec2 b = ref[(e + 2) % 3];
    for (int flip = 0; flip < 2; ++flip) {
      ft.v_vals[e][flip].resize(nfq * nb);
      ft.v_grads[e][flip].resize(nfq * nb);
      for (std::size_t q = 0; q < nfq; ++q) {
        const double t = flip ? 1.0 - ft.t[q] : ft.t[q];
        const Vec2 p = a + t * (b - a);
        basis_v_.eval(p, vals);
        basis_v_.eval_grad(p, grads);
        std::copy(vals.begin(), vals.end(), ft.v_vals[e][flip].begin() + q * nb);
        std::copy(grads.begin(), grads.end(), ft.v_grads[e][flip].begin() + q * nb);
      }
    }
  }
}

Assembler::~Assembler() = default;

double Assembler::beta() const { return config_.beta_coeff * layout_.k * layout_.k; }

void Assembler::add_sym(long r, long c, double v) {
  trips_.emplace_back(r, c, v);
  trips_.emplace_back(c, r, v);
}

void Assembler::assemble_ah_s() {
  const int nb = layout_.nb;
  const int k = layout_.k;
  const int nfn = k + 1;  // facet nodes
  const double mu = config_.mu;
  const double bet = beta();
  const FacetTables& ft = *facet_tables_;
  const std::size_t nfq = ft.t.size();

  std::vector<double> local(4 * nb * nb);
  std::vector<Vec2> pg(nb);  // physical gradients at one quadrature point
  const int ncomb = 2 * nb + 2 * nfn;
  std::vector<double> pen(static_cast<std::size_t>(ncomb) * ncomb);
  std::vector<double> cons(static_cast<std::size_t>(ncomb) * 2 * nb);
  std::vector<long> gdof(ncomb);

  for (std::size_t c = 0; c < mesh_.cells.size(); ++c) {
    if (mesh_.cells[c].region != Region::Stokes) continue;
    const CellGeom geom = cell_geom(mesh_, static_cast<int>(c));

    // Viscous cell term 2 mu (eps(u), eps(v)). Upper triangle mirrored so the
    // emitted block is symmetric bit for bit.
    std::fill(local.begin(), local.end(), 0.0);
    for (std::size_t q = 0; q < cell_rule_.points.size(); ++q) {
      const double w = cell_rule_.weights[q] * geom.det;
      for (int i = 0; i < nb; ++i) pg[i] = push_grad(geom, dv_at_cell_[q][i]);
      for (int A = 0; A < 2 * nb; ++A) {
        const int d = A / nb, i = A % nb;
        for (int B = A; B < 2 * nb; ++B) {
          const int e = B / nb, j = B % nb;
          local[static_cast<std::size_t>(A) * 2 * nb + B] +=
              2.0 * mu * w * strain_product(pg[i], d, pg[j], e);
        }
      }
    }
    for (int A = 0; A < 2 * nb; ++A) {
      for (int B = A; B < 2 * nb; ++B) {
        local[static_cast<std::size_t>(B) * 2 * nb + A] =
            local[static_cast<std::size_t>(A) * 2 * nb + B];
      }
    }
    for (int A = 0; A < 2 * nb; ++A) {
      const long ga = layout_.cell_velocity_dof(static_cast<int>(c), A / nb, A % nb);
      for (int B = 0; B < 2 * nb; ++B) {
        const long gb = layout_.cell_velocity_dof(static_cast<int>(c), B / nb, B % nb);
        add(ga, gb, local[static_cast<std::size_t>(A) * 2 * nb + B]);
      }
    }

    // Facet penalty and consistency terms. Combined test/trial set per facet:
    // cell dofs first (sign +1), then facet-velocity dofs (sign -1).
    for (int e = 0; e < 3; ++e) {
      const int fid = mesh_.cell_facets[c][e];
      const Facet& f = mesh_.facets[fid];
      const int a_loc = mesh_.cells[c].v[(e + 1) % 3];
      const int flip = (a_loc == f.v0) ? 0 : 1;
      const double sgn = mesh_.outward_sign(static_cast<int>(c), fid);
      const Vec2 n{sgn * f.normal.x, sgn * f.normal.y};
      const double hk = mesh_.cells[c].h;
      const double pen_coef = 2.0 * bet * mu / hk;

      for (int A = 0; A < 2 * nb; ++A) {
        gdof[A] = layout_.cell_velocity_dof(static_cast<int>(c), A / nb, A % nb);
      }
      for (int d = 0; d < 2; ++d) {
        for (int m = 0; m < nfn; ++m) {
          gdof[2 * nb + d * nfn + m] = layout_.facet_velocity_dof(mesh_, fid, d, m);
        }
      }

      std::fill(pen.begin(), pen.end(), 0.0);
      std::fill(cons.begin(), cons.end(), 0.0);
      const double* vv = ft.v_vals[e][flip].data();
      const Vec2* vg = ft.v_grads[e][flip].data();
      for (std::size_t q = 0; q < nfq; ++q) {
        const double w = ft.w[q] * f.length;
        const double* phi = vv + q * nb;
        const double* seg = ft.seg_vals.data() + q * nfn;
        for (int i = 0; i < nb; ++i) pg[i] = push_grad(geom, vg[q * nb + i]);

        // penalty (2 beta mu / h) (u - ubar).(v - vbar): same-component pairs
        for (int d = 0; d < 2; ++d) {
          for (int a = 0; a < nb + nfn; ++a) {
            const int Ai = (a < nb) ? d * nb + a : 2 * nb + d * nfn + (a - nb);
            const double va = (a < nb) ? phi[a] : -seg[a - nb];
            for (int b = a; b < nb + nfn; ++b) {
              const int Bi = (b < nb) ? d * nb + b : 2 * nb + d * nfn + (b - nb);
              const double vb = (b < nb) ? phi[b] : -seg[b - nb];
              pen[static_cast<std::size_t>(Ai) * ncomb + Bi] += pen_coef * w * va * vb;
            }
          }
        }

        // consistency -2 mu eps(u) n . (v - vbar), columns are cell dofs
        for (int d = 0; d < 2; ++d) {
          for (int i = 0; i < nb; ++i) {
            const Vec2 en = strain_normal(pg[i], d, n);
            const int col = d * nb + i;
            for (int cmp = 0; cmp < 2; ++cmp) {
              const double enc = (cmp == 0) ? en.x : en.y;
              for (int j = 0; j < nb; ++j) {
                cons[static_cast<std::size_t>(cmp * nb + j) * 2 * nb + col] -=
                    2.0 * mu * w * enc * phi[j];
              }
              for (int m = 0; m < nfn; ++m) {
                cons[static_cast<std::size_t>(2 * nb + cmp * nfn + m) * 2 * nb + col] +=
                    2.0 * mu * w * enc * seg[m];
              }
            }
          }
        }
      }

      for (int a = 0; a < ncomb; ++a) {
        for (int b = a; b < ncomb; ++b) {
          pen[static_cast<std::size_t>(b) * ncomb + a] =
              pen[static_cast<std::size_t>(a) * ncomb + b];
        }
      }
      for (int a = 0; a < ncomb; ++a) {
        for (int b = 0; b < ncomb; ++b) {
          const double v = pen[static_cast<std::size_t>(a) * ncomb + b];
          if (v != 0.0) add(gdof[a], gdof[b], v);
        }
      }
      for (int a = 0; a < ncomb; ++a) {
        for (int col = 0; col < 2 * nb; ++col) {
          const double v = cons[static_cast<std::size_t>(a) * 2 * nb + col];
          if (v != 0.0) add_sym(gdof[a], gdof[col], v);
        }
      }
    }
  }
}

void Assembler::assemble_ah_d() {
  const int nb = layout_.nb;
  std::vector<double> local(static_cast<std::size_t>(nb) * nb);
  for (std::size_t c = 0; c < mesh_.cells.size(); ++c) {
    if (mesh_.cells[c].region != Region::Darcy) continue;
    const CellGeom geom = cell_geom(mesh_, static_cast<int>(c));
    std::fill(local.begin(), local.end(), 0.0);
    for (std::size_t q = 0; q < cell_rule_.points.size(); ++q) {
      const double w = cell_rule_.weights[q] * geom.det;
      const double ik = 1.0 / config_.kappa(map_point(geom, cell_rule_.points[q]));
      const double* phi = v_at_cell_[q].data();
      for (int i = 0; i < nb; ++i) {
        for (int j = i; j < nb; ++j) {
          local[static_cast<std::size_t>(i) * nb + j] += w * ik * phi[i] * phi[j];
        }
      }
    }
    for (int i = 0; i < nb; ++i) {
      for (int j = i; j < nb; ++j) {
        local[static_cast<std::size_t>(j) * nb + i] =
            local[static_cast<std::size_t>(i) * nb + j];
      }
    }
    for (int d = 0; d < 2; ++d) {
      for (int i = 0; i < nb; ++i) {
        const long gi = layout_.cell_velocity_dof(static_cast<int>(c), d, i);
        for (int j = 0; j < nb; ++j) {
          add(gi, layout_.cell_velocity_dof(static_cast<int>(c), d, j),
              local[static_cast<std::size_t>(i) * nb + j]);
        }
      }
    }
  }
}

void Assembler::assemble_ah_interface() {
  if (config_.alpha == 0.0) return;
  const int nfn = layout_.k + 1;
  const FacetTables& ft = *facet_tables_;
  const int ncomb = 2 * nfn;
  std::vector<double> local(static_cast<std::size_t>(ncomb) * ncomb);
  std::vector<long> gdof(ncomb);

  for (std::size_t fid = 0; fid < mesh_.facets.size(); ++fid) {
    const Facet& f = mesh_.facets[fid];
    if (f.cls != FacetClass::Interface) continue;
    const Vec2 n = f.normal;  // free-flow side normal
    const Vec2 a = mesh_.vertices[f.v0];
    const Vec2 b = mesh_.vertices[f.v1];
    for (int d = 0; d < 2; ++d) {
      for (int m = 0; m < nfn; ++m) {
        gdof[d * nfn + m] =
            layout_.facet_velocity_dof(mesh_, static_cast<int>(fid), d, m);
      }
    }
    std::fill(local.begin(), local.end(), 0.0);
    for (std::size_t q = 0; q < ft.t.size(); ++q) {
      const double w = ft.w[q] * f.length;
      const Vec2 x = a + ft.t[q] * (b - a);
      const double coef = config_.alpha / std::sqrt(config_.kappa(x));
      const double* seg = ft.seg_vals.data() + q * nfn;
      for (int A = 0; A < ncomb; ++A) {
        const int d = A / nfn, m = A % nfn;
        for (int B = A; B < ncomb; ++B) {
          const int e = B / nfn, m2 = B % nfn;
          const double proj = (d == e ? 1.0 : 0.0) - (d == 0 ? n.x : n.y) * (e == 0 ? n.x : n.y);
          local[static_cast<std::size_t>(A) * ncomb + B] +=
              coef * w * seg[m] * seg[m2] * proj;
        }
      }
    }
    for (int A = 0; A < ncomb; ++A) {
      for (int B = A; B < ncomb; ++B) {
        local[static_cast<std::size_t>(B) * ncomb + A] =
            local[static_cast<std::size_t>(A) * ncomb + B];
      }
    }
    for (int A = 0; A < ncomb; ++A) {
      for (int B = 0; B < ncomb; ++B) {
        const double v = local[static_cast<std::size_t>(A) * ncomb + B];
        if (v != 0.0) add(gdof[A], gdof[B], v);
      }
    }
  }
}

void Assembler::assemble_bh(Region side) {
  const int nb = layout_.nb;
  const int nq = layout_.nq;
  const int nfn = layout_.k + 1;
  const FacetTables& ft = *facet_tables_;
  std::vector<Vec2> pg(nb);

  for (std::size_t c = 0; c < mesh_.cells.size(); ++c) {
    if (mesh_.cells[c].region != side) continue;
    const CellGeom geom = cell_geom(mesh_, static_cast<int>(c));

    // - (p, div v) over the cell
    for (std::size_t q = 0; q < cell_rule_.points.size(); ++q) {
      const double w = cell_rule_.weights[q] * geom.det;
      for (int i = 0; i < nb; ++i) pg[i] = push_grad(geom, dv_at_cell_[q][i]);
      const double* qs = q_at_cell_[q].data();
      for (int m = 0; m < nq; ++m) {
        const long gp = layout_.cell_pressure_dof(static_cast<int>(c), m);
        for (int d = 0; d < 2; ++d) {
          for (int i = 0; i < nb; ++i) {
            const double div = (d == 0) ? pg[i].x : pg[i].y;
            const double v = -w * qs[m] * div;
            if (v != 0.0) {
              add_sym(layout_.cell_velocity_dof(static_cast<int>(c), d, i), gp, v);
            }
          }
        }
      }
    }

    // + (pbar, v.n) over the cell boundary
    for (int e = 0; e < 3; ++e) {
      const int fid = mesh_.cell_facets[c][e];
      const Facet& f = mesh_.facets[fid];
      const int a_loc = mesh_.cells[c].v[(e + 1) % 3];
      const int flip = (a_loc == f.v0) ? 0 : 1;
      const double sgn = mesh_.outward_sign(static_cast<int>(c), fid);
      const Vec2 n{sgn * f.normal.x, sgn * f.normal.y};
      const double* vv = ft.v_vals[e][flip].data();
      for (std::size_t q = 0; q < ft.t.size(); ++q) {
        const double w = ft.w[q] * f.length;
        const double* phi = vv + q * nb;
        const double* seg = ft.seg_vals.data() + q * nfn;
        for (int m = 0; m < nfn; ++m) {
          const long gp = layout_.facet_pressure_dof(side, fid, m);
          for (int d = 0; d < 2; ++d) {
            const double nd = (d == 0) ? n.x : n.y;
            for (int i = 0; i < nb; ++i) {
              const double v = w * seg[m] * phi[i] * nd;
              if (v != 0.0) {
                add_sym(layout_.cell_velocity_dof(static_cast<int>(c), d, i), gp, v);
              }
            }
          }
        }
      }
    }
  }
}

void Assembler::assemble_bh_interface(Region side) {
  const int nfn = layout_.k + 1;
  const FacetTables& ft = *facet_tables_;
  // - (pbar^s, vbar.n^s) on the free-flow side; the porous normal is opposite,
  // so that side flips sign relative to the stored free-flow normal.
  const double orient = (side == Region::Stokes) ? -1.0 : 1.0;

  for (std::size_t fid = 0; fid < mesh_.facets.size(); ++fid) {
    const Facet& f = mesh_.facets[fid];
    bool active = (f.cls == FacetClass::Interface);
    if (!active && side == Region::Stokes) {
      const BoundaryCondition* bc = find_bc(config_, f.cls);
      active = bc && bc->kind == BcKind::TractionOutflow;
    }
    if (!active) continue;

    for (std::size_t q = 0; q < ft.t.size(); ++q) {
      const double w = ft.w[q] * f.length;
      const double* seg = ft.seg_vals.data() + q * nfn;
      for (int m = 0; m < nfn; ++m) {
        const long gp = layout_.facet_pressure_dof(side, static_cast<int>(fid), m);
        for (int d = 0; d < 2; ++d) {
          const double nd = (d == 0) ? f.normal.x : f.normal.y;
          for (int mb = 0; mb < nfn; ++mb) {
            const double v = orient * w * seg[m] * seg[mb] * nd;
            if (v != 0.0) {
              add_sym(layout_.facet_velocity_dof(mesh_, static_cast<int>(fid), d, mb),
                      gp, v);
            }
          }
        }
      }
    }
  }
}

void Assembler::assemble_rhs() {
  const int nb = layout_.nb;
  const int nq = layout_.nq;
  const int nfn = layout_.k + 1;
  const FacetTables& ft = *facet_tables_;

  for (std::size_t c = 0; c < mesh_.cells.size(); ++c) {
    const CellGeom geom = cell_geom(mesh_, static_cast<int>(c));
    if (mesh_.cells[c].region == Region::Stokes) {
      if (!config_.f_s) continue;
      for (std::size_t q = 0; q < cell_rule_.points.size(); ++q) {
        const double w = cell_rule_.weights[q] * geom.det;
        const Vec2 fs = config_.f_s(map_point(geom, cell_rule_.points[q]));
        const double* phi = v_at_cell_[q].data();
        for (int i = 0; i < nb; ++i) {
          rhs_[layout_.cell_velocity_dof(static_cast<int>(c), 0, i)] += w * fs.x * phi[i];
          rhs_[layout_.cell_velocity_dof(static_cast<int>(c), 1, i)] += w * fs.y * phi[i];
        }
      }
    } else {
      if (!config_.f_d) continue;
      for (std::size_t q = 0; q < cell_rule_.points.size(); ++q) {
        const double w = cell_rule_.weights[q] * geom.det;
        const double fd = config_.f_d(map_point(geom, cell_rule_.points[q]));
        const double* qs = q_at_cell_[q].data();
        for (int m = 0; m < nq; ++m) {
          rhs_[layout_.cell_pressure_dof(static_cast<int>(c), m)] += w * fd * qs[m];
        }
      }
    }
  }

  // Prescribed normal-trace data enters through the facet-pressure equations.
  for (std::size_t fid = 0; fid < mesh_.facets.size(); ++fid) {
    const Facet& f = mesh_.facets[fid];
    if (!is_exterior(f.cls)) continue;
    const BoundaryCondition* bc = find_bc(config_, f.cls);
    if (!bc) continue;
    if (bc->kind != BcKind::VelocityDirichlet && bc->kind != BcKind::NormalFlux) continue;
    // Absent data means a homogeneous datum, which contributes nothing.
    if (bc->kind == BcKind::VelocityDirichlet && !bc->velocity) continue;
    if (bc->kind == BcKind::NormalFlux && !bc->normal_flux) continue;
    const Region side = is_stokes_facet(f.cls) ? Region::Stokes : Region::Darcy;
    const Vec2 a = mesh_.vertices[f.v0];
    const Vec2 b = mesh_.vertices[f.v1];
    for (std::size_t q = 0; q < ft.t.size(); ++q) {
      const double w = ft.w[q] * f.length;
      const Vec2 x = a + ft.t[q] * (b - a);
      const double gn = (bc->kind == BcKind::VelocityDirichlet)
                            ? dot(bc->velocity(x), f.normal)
                            : bc->normal_flux(x, f.normal);
      const double* seg = ft.seg_vals.data() + q * nfn;
      for (int m = 0; m < nfn; ++m) {
        rhs_[layout_.facet_pressure_dof(side, static_cast<int>(fid), m)] += w * gn * seg[m];
      }
    }
  }
}

std::vector<std::pair<long, double>> Assembler::constrained_values() const {
  const int k = layout_.k;
  std::map<long, double> values;
  auto set_value = [&](long dof, double v) {
    auto [it, inserted] = values.emplace(dof, v);
    if (!inserted && std::abs(it->second - v) >
                         1e-12 * std::max({1.0, std::abs(v), std::abs(it->second)})) {
      throw InputError("conflicting essential data at dof " + std::to_string(dof));
    }
  };

  for (std::size_t fid = 0; fid < mesh_.facets.size(); ++fid) {
    const Facet& f = mesh_.facets[fid];
    if (!is_exterior(f.cls)) continue;
    const BoundaryCondition* bc = find_bc(config_, f.cls);
    const BcKind kind = bc ? bc->kind : BcKind::None;

    switch (f.cls) {
      case FacetClass::GammaS:
      case FacetClass::GammaS1:
        // Facet velocity pinned; missing data means the homogeneous space.
        for (int node = 0; node <= k; ++node) {
          Vec2 g{0.0, 0.0};
          if (kind == BcKind::VelocityDirichlet && bc->velocity) {
            g = bc->velocity(facet_node_position(mesh_, static_cast<int>(fid), node, k));
          }
          set_value(layout_.facet_velocity_dof(mesh_, static_cast<int>(fid), 0, node), g.x);
          set_value(layout_.facet_velocity_dof(mesh_, static_cast<int>(fid), 1, node), g.y);
        }
        break;
      case FacetClass::GammaS3:
        if (kind != BcKind::SlipWall && kind != BcKind::None) {
          throw InputError("top wall supports only the slip condition");
        }
        if (std::abs(f.normal.x) > 1e-8) {
          throw InputError("slip facets must be horizontal");
        }
        for (int node = 0; node <= k; ++node) {
          set_value(layout_.facet_velocity_dof(mesh_, static_cast<int>(fid), 1, node), 0.0);
        }
        break;
      case FacetClass::GammaD2: {
        // The facet pressure is always pinned here; that is what removes the
        // mean constraint from the layout.
        const double value = (kind == BcKind::PressureDirichlet) ? bc->pressure : 0.0;
        for (int node = 0; node <= k; ++node) {
          set_value(layout_.facet_pressure_dof(Region::Darcy, static_cast<int>(fid), node),
                    value);
        }
        break;
      }
      default:
        break;
    }
  }
  return {values.begin(), values.end()};
}

LinearSystem Assembler::finalize() {
  const long n = layout_.n_total;
  std::vector<std::pair<long, double>> constrained = constrained_values();

  std::vector<std::uint8_t> fixed(n, 0);
  Eigen::VectorXd lift = Eigen::VectorXd::Zero(n);
  for (const auto& [dof, value] : constrained) {
    fixed[dof] = 1;
    lift[dof] = value;
  }

  Eigen::VectorXd b = rhs_;
  for (const Eigen::Triplet<double>& t : trips_) {
    if (!fixed[t.row()] && fixed[t.col()]) b[t.row()] -= t.value() * lift[t.col()];
  }
  for (const auto& [dof, value] : constrained) b[dof] = value;

  std::vector<Eigen::Triplet<double>> final_trips;
  final_trips.reserve(trips_.size() + constrained.size() +
                      2 * static_cast<std::size_t>(mesh_.cells.size()) * layout_.nq);
  for (const Eigen::Triplet<double>& t : trips_) {
    if (!fixed[t.row()] && !fixed[t.col()]) final_trips.push_back(t);
  }
  for (const auto& [dof, value] : constrained) {
    final_trips.emplace_back(dof, dof, 1.0);
    (void)value;
  }

  if (layout_.has_multiplier()) {
    // The constant-pressure mode pairs the rhs with the net mass defect of the
    // data. Inexact quadrature of smooth data leaves a small defect that the
    // multiplier would otherwise spread over every cell as a uniform spurious
    // divergence; remove it from the prescribed-flux rows instead, where it
    // only perturbs boundary data below discretization accuracy.
    const int nfn = layout_.k + 1;
    double defect = 0.0;
    for (std::size_t c = 0; c < mesh_.cells.size(); ++c) {
      for (int m = 0; m < layout_.nq; ++m) {
        defect += b[layout_.cell_pressure_dof(static_cast<int>(c), m)];
      }
    }
    std::vector<std::pair<long, double>> flux_rows;
    double total_weight = 0.0;
    for (std::size_t fid = 0; fid < mesh_.facets.size(); ++fid) {
      const Facet& f = mesh_.facets[fid];
      for (Region side : {Region::Stokes, Region::Darcy}) {
        const int entity = side == Region::Stokes ? layout_.qbar_s[fid] : layout_.qbar_d[fid];
        if (entity < 0) continue;
        for (int m = 0; m < nfn; ++m) {
          const long dof = layout_.facet_pressure_dof(side, static_cast<int>(fid), m);
          defect += b[dof];
          if (!is_exterior(f.cls)) continue;
          double node_weight = 0.0;
          for (std::size_t q = 0; q < facet_tables_->t.size(); ++q) {
            node_weight += facet_tables_->w[q] * facet_tables_->seg_vals[q * nfn + m];
          }
          node_weight *= f.length;
          flux_rows.emplace_back(dof, node_weight);
          total_weight += node_weight;
        }
      }
    }
    if (total_weight > 0.0) {
      for (const auto& [dof, weight] : flux_rows) b[dof] -= defect * weight / total_weight;
    }

    const long mrow = layout_.multiplier_dof();
    const int nq = layout_.nq;
    for (std::size_t c = 0; c < mesh_.cells.size(); ++c) {
      const CellGeom geom = cell_geom(mesh_, static_cast<int>(c));
      std::vector<double> integrals(nq, 0.0);
      for (std::size_t q = 0; q < cell_rule_.points.size(); ++q) {
        const double w = cell_rule_.weights[q] * geom.det;
        for (int m = 0; m < nq; ++m) integrals[m] += w * q_at_cell_[q][m];
      }
      for (int m = 0; m < nq; ++m) {
        const long gp = layout_.cell_pressure_dof(static_cast<int>(c), m);
        final_trips.emplace_back(mrow, gp, integrals[m]);
        final_trips.emplace_back(gp, mrow, integrals[m]);
      }
    }
    b[mrow] = 0.0;
  }

  LinearSystem sys;
  sys.A.resize(n, n);
  sys.A.setFromTriplets(final_trips.begin(), final_trips.end());
  sys.A.makeCompressed();
  sys.b = std::move(b);
  sys.mesh = &mesh_;
  sys.layout = &layout_;
  sys.constrained = std::move(constrained);
  return sys;
}

LinearSystem assemble_system(const Mesh& mesh, const DofLayout& layout,
                             const ProblemConfig& config) {
  if (!config.kappa) throw InputError("permeability field is required");
  Assembler assembler(mesh, layout, config);
  assembler.assemble_ah_s();
  assembler.assemble_ah_d();
  assembler.assemble_ah_interface();
  assembler.assemble_bh(Region::Stokes);
  assembler.assemble_bh(Region::Darcy);
  assembler.assemble_bh_interface(Region::Stokes);
  assembler.assemble_bh_interface(Region::Darcy);
  assembler.assemble_rhs();
  return assembler.finalize();
}

}  // namespace edghdg
