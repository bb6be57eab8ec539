#include "edghdg/spaces.hpp"

#include <sstream>

#include "edghdg/errors.hpp"

namespace edghdg {

long DofLayout::facet_velocity_dof(const Mesh& mesh, int facet, int comp,
                                   int node) const {
  const Facet& f = mesh.facets[facet];
  if (node == 0 || node == k) {
    const int v = (node == 0) ? f.v0 : f.v1;
    return offset[1] + static_cast<long>(vbar_vertex[v]) * 2 + comp;
  }
  const long interior_base = offset[1] + static_cast<long>(n_vbar_vertices) * 2;
  return interior_base + static_cast<long>(vbar_facet[facet]) * 2 * (k - 1) +
         static_cast<long>(comp) * (k - 1) + (node - 1);
}

long DofLayout::facet_pressure_dof(Region side, int facet, int node) const {
  if (side == Region::Stokes) {
    return offset[3] + static_cast<long>(qbar_s[facet]) * nf + node;
  }
  return offset[4] + static_cast<long>(qbar_d[facet]) * nf + node;
}

Block DofLayout::block_of(long dof) const {
  for (int b = 5; b >= 0; --b) {
    if (size[b] > 0 && dof >= offset[b]) return static_cast<Block>(b);
  }
  return Block::CellVelocity;
}

std::string DofLayout::describe(const Mesh& mesh, long dof) const {
  std::ostringstream os;
  const Block b = block_of(dof);
  const long rel = dof - offset[static_cast<int>(b)];
  switch (b) {
    case Block::CellVelocity:
      os << "cell velocity, cell " << rel / (2 * nb) << ", component "
         << (rel % (2 * nb)) / nb << ", node " << rel % nb;
      break;
    case Block::FacetVelocity: {
      const long nvd = static_cast<long>(n_vbar_vertices) * 2;
      if (rel < nvd) {
        const long vid = rel / 2;
        int vertex = -1;
        for (std::size_t v = 0; v < vbar_vertex.size(); ++v) {
          if (vbar_vertex[v] == vid) {
            vertex = static_cast<int>(v);
            break;
          }
        }
        os << "facet velocity, vertex " << vertex << ", component " << rel % 2;
      } else {
        const long r = rel - nvd;
        const long fid = r / (2 * (k - 1));
        int facet = -1;
        for (std::size_t f = 0; f < vbar_facet.size(); ++f) {
          if (vbar_facet[f] == fid) {
            facet = static_cast<int>(f);
            break;
          }
        }
        const long inner = r % (2 * (k - 1));
        os << "facet velocity, facet " << facet << ", component " << inner / (k - 1)
           << ", interior node " << inner % (k - 1);
      }
      break;
    }
    case Block::CellPressure:
      os << "cell pressure, cell " << rel / nq << ", node " << rel % nq;
      break;
    case Block::FacetPressureS:
    case Block::FacetPressureD: {
      const bool stokes = (b == Block::FacetPressureS);
      const std::vector<int>& map = stokes ? qbar_s : qbar_d;
      const long fid = rel / nf;
      int facet = -1;
      for (std::size_t f = 0; f < map.size(); ++f) {
        if (map[f] == fid) {
          facet = static_cast<int>(f);
          break;
        }
      }
      os << (stokes ? "free-flow" : "porous") << " facet pressure, facet " << facet
         << ", node " << rel % nf;
      break;
    }
    case Block::MeanMultiplier:
      os << "pressure mean multiplier";
      break;
  }
  (void)mesh;
  return os.str();
}

DofLayout build_layout(const Mesh& mesh, int k) {
  if (k < 1 || k > 6) {
    throw InputError("polynomial degree must be in 1..6, got " + std::to_string(k));
  }

  DofLayout L;
  L.k = k;
  L.nb = (k + 1) * (k + 2) / 2;
  L.nq = k * (k + 1) / 2;
  L.nf = k + 1;

  const int n_cells = static_cast<int>(mesh.cells.size());
  const int n_facets = static_cast<int>(mesh.facets.size());

  L.vbar_vertex.assign(mesh.vertices.size(), -1);
  L.vbar_facet.assign(n_facets, -1);
  L.qbar_s.assign(n_facets, -1);
  L.qbar_d.assign(n_facets, -1);

  int n_qbar_s = 0, n_qbar_d = 0;
  bool pressure_pinned = false;
  for (int f = 0; f < n_facets; ++f) {
    const FacetClass c = mesh.facets[f].cls;
    if (is_stokes_facet(c)) {
      L.vbar_facet[f] = L.n_vbar_facets++;
      for (const int v : {mesh.facets[f].v0, mesh.facets[f].v1}) {
        if (L.vbar_vertex[v] < 0) L.vbar_vertex[v] = L.n_vbar_vertices++;
      }
      L.qbar_s[f] = n_qbar_s++;
    }
    if (is_darcy_facet(c)) L.qbar_d[f] = n_qbar_d++;
    if (c == FacetClass::GammaD2) pressure_pinned = true;
  }

  L.size[0] = static_cast<long>(n_cells) * 2 * L.nb;
  L.size[1] = static_cast<long>(L.n_vbar_vertices) * 2 +
              static_cast<long>(L.n_vbar_facets) * 2 * (k - 1);
  L.size[2] = static_cast<long>(n_cells) * L.nq;
  L.size[3] = static_cast<long>(n_qbar_s) * L.nf;
  L.size[4] = static_cast<long>(n_qbar_d) * L.nf;
  L.size[5] = pressure_pinned ? 0 : 1;

  long off = 0;
  for (int b = 0; b < 6; ++b) {
    L.offset[b] = off;
    off += L.size[b];
  }
  L.n_total = off;

  // Prescribed-velocity flags on exterior free-flow facets. Vertex dofs are
  // shared, so the closure rule (corners of the interface or of outflow facets
  // adjacent to a constrained class) is automatic.
  L.vbar_constrained.assign(L.size[1], 0);
  auto constrain = [&](int facet, int comp) {
    for (int node = 0; node <= k; ++node) {
      L.vbar_constrained[L.facet_velocity_dof(mesh, facet, comp, node) - L.offset[1]] = 1;
    }
  };
  for (int f = 0; f < n_facets; ++f) {
    switch (mesh.facets[f].cls) {
      case FacetClass::GammaS:
      case FacetClass::GammaS1:
        constrain(f, 0);
        constrain(f, 1);
        break;
      case FacetClass::GammaS3:
        // slip wall at x2 = 1: only the normal (vertical) component is pinned
        constrain(f, 1);
        break;
      default:
        break;
    }
  }

  return L;
}

}  // namespace edghdg
