#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "edghdg/geometry.hpp"

namespace edghdg {

enum class Region : std::uint8_t { Stokes, Darcy };

// Facet labels. The manufactured-solution setup collapses all exterior facets
// into GammaS / GammaD; the heterogeneous flow case splits them further:
//   GammaS1 inflow (x1 = 0), GammaS2 outflow (x1 = 1), GammaS3 top wall (x2 = 1),
//   GammaD1 lateral walls (x1 in {0,1}), GammaD2 bottom (x2 = 0).
enum class FacetClass : std::uint8_t {
  InteriorS,
  InteriorD,
  Interface,
  GammaS,
  GammaD,
  GammaS1,
  GammaS2,
  GammaS3,
  GammaD1,
  GammaD2,
};

enum class BoundarySplit { Collapsed, HeterogeneousCase };

inline bool is_exterior(FacetClass c) {
  return c != FacetClass::InteriorS && c != FacetClass::InteriorD &&
         c != FacetClass::Interface;
}

// True for facets carried by the free-flow region closure (facet velocity and
// free-flow facet pressure live here).
inline bool is_stokes_facet(FacetClass c) {
  switch (c) {
    case FacetClass::InteriorS:
    case FacetClass::Interface:
    case FacetClass::GammaS:
    case FacetClass::GammaS1:
    case FacetClass::GammaS2:
    case FacetClass::GammaS3:
      return true;
    default:
      return false;
  }
}

inline bool is_darcy_facet(FacetClass c) {
  switch (c) {
    case FacetClass::InteriorD:
    case FacetClass::Interface:
    case FacetClass::GammaD:
    case FacetClass::GammaD1:
    case FacetClass::GammaD2:
      return true;
    default:
      return false;
  }
}

struct Cell {
  std::array<int, 3> v{};  // vertex indices, counterclockwise
  Region region = Region::Stokes;
  double area = 0.0;
  double h = 0.0;  // longest edge
};

struct Facet {
  int v0 = -1;  // v0 < v1 (global indices); parameterized from v0 to v1
  int v1 = -1;
  int owner = -1;     // for interface facets always the Stokes-side cell
  int neighbor = -1;  // -1 on the boundary
  Vec2 normal;        // unit normal pointing owner -> neighbor (outward on the boundary)
  double length = 0.0;
  FacetClass cls = FacetClass::InteriorS;
};

struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<Cell> cells;
  std::vector<Facet> facets;
  // facet id per local edge; local edge i is opposite vertex i
  std::vector<std::array<int, 3>> cell_facets;

  int n_cells(Region r) const;
  int n_facets(FacetClass c) const;

  // +1 if the stored facet normal is outward for this cell, -1 otherwise.
  double outward_sign(int cell, int facet) const {
    return facets[facet].owner == cell ? 1.0 : -1.0;
  }

  Vec2 centroid(int cell) const {
    const Cell& c = cells[cell];
    return (1.0 / 3.0) * (vertices[c.v[0]] + vertices[c.v[1]] + vertices[c.v[2]]);
  }
};

// Builds facet connectivity, orientations, areas and diameters from raw cell
// data. Checks purely topological/metric invariants: indices in range, strictly
// positive counterclockwise areas, consistent orientation between neighbors.
// Exterior facets get the collapsed GammaS/GammaD labels.
Mesh build_topology(std::vector<Vec2> vertices,
                    std::vector<std::array<int, 3>> cell_vertices,
                    std::vector<Region> regions);

// Structured family on [0,1]^2: n x n squares, each split into two triangles,
// free-flow region on top of y = 1/2. n must be even and >= 2 so the interface
// is a mesh line. With perturb set, interior vertices away from the interface
// are displaced deterministically (seeded) by at most 0.2 h per coordinate.
Mesh generate_mesh(int n, bool perturb = false, unsigned seed = 1);

// Text format, single header line "vertices N cells M", then N lines "x y",
// then M lines "v0 v1 v2 region" with region in {s, d}. Parse errors carry the
// line number. Duplicate vertex coordinates are accepted with a warning.
Mesh read_mesh(const std::string& path);
void write_mesh(const Mesh& mesh, const std::string& path);

// Canonical-geometry validation: regions tile [0,1]x[1/2,1] and [0,1]x[0,1/2],
// no cell crosses y = 1/2, exterior facets lie on the unit-square boundary.
void validate(const Mesh& mesh);

// Assigns boundary facet classes. Collapsed labeling works on any region-tagged
// mesh; the heterogeneous split requires the canonical unit-square boundary and
// rejects exterior facets matching no sub-boundary.
void classify_facets(Mesh& mesh, BoundarySplit split);

}  // namespace edghdg
