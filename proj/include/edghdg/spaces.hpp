#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "edghdg/mesh.hpp"

namespace edghdg {

// Unknown blocks, in storage order. CellVelocity and CellPressure are broken
// per cell (vector P_k and scalar P_{k-1}); FacetVelocity is the continuous
// vector P_k trace space on the free-flow skeleton (vertex dofs shared between
// facets); the two facet pressure blocks are discontinuous P_k per facet on
// the closure of their region, with independent dofs on the interface. The
// optional last block is the scalar multiplier pinning the pressure mean.
enum class Block : int {
  CellVelocity = 0,
  FacetVelocity = 1,
  CellPressure = 2,
  FacetPressureS = 3,
  FacetPressureD = 4,
  MeanMultiplier = 5,
};

struct DofLayout {
  int k = 1;
  int nb = 0;  // scalar P_k triangle basis size
  int nq = 0;  // scalar P_{k-1} triangle basis size
  int nf = 0;  // P_k segment basis size, k + 1

  long n_total = 0;
  std::array<long, 6> offset{};
  std::array<long, 6> size{};

  // Entity numbering for the facet spaces; -1 where the entity carries no dofs.
  std::vector<int> vbar_vertex;  // mesh vertex -> skeleton vertex id
  std::vector<int> vbar_facet;   // mesh facet -> skeleton facet id
  std::vector<int> qbar_s;       // mesh facet -> free-flow facet pressure id
  std::vector<int> qbar_d;       // mesh facet -> porous facet pressure id
  int n_vbar_vertices = 0;
  int n_vbar_facets = 0;

  // Essential constraint flags over the FacetVelocity block (prescribed
  // velocity components on exterior free-flow facets, vertex closure included).
  std::vector<std::uint8_t> vbar_constrained;

  long cell_velocity_dof(int cell, int comp, int node) const {
    return offset[0] + static_cast<long>(cell) * 2 * nb + static_cast<long>(comp) * nb + node;
  }
  long cell_pressure_dof(int cell, int node) const {
    return offset[2] + static_cast<long>(cell) * nq + node;
  }
  // node runs 0..k along the facet from its lower to its higher vertex.
  long facet_velocity_dof(const Mesh& mesh, int facet, int comp, int node) const;
  long facet_pressure_dof(Region side, int facet, int node) const;
  long multiplier_dof() const { return size[5] > 0 ? offset[5] : -1; }
  bool has_multiplier() const { return size[5] > 0; }

  Block block_of(long dof) const;
  // Human-readable "(block, entity, local)" description for diagnostics.
  std::string describe(const Mesh& mesh, long dof) const;
};

// The multiplier block is present exactly when no boundary facet prescribes a
// pressure (class GammaD2 under the heterogeneous split), i.e. when the
// pressure is only determined up to a constant.
DofLayout build_layout(const Mesh& mesh, int k);

}  // namespace edghdg
