#include "edghdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "edghdg/errors.hpp"

namespace edghdg {

namespace {

constexpr double kGeomTol = 1e-10;

double edge_length(const Mesh& m, int a, int b) {
  return norm(m.vertices[b] - m.vertices[a]);
}

void compute_cell_metrics(Mesh& mesh) {
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    Cell& cell = mesh.cells[c];
    const Vec2 p0 = mesh.vertices[cell.v[0]];
    const Vec2 p1 = mesh.vertices[cell.v[1]];
    const Vec2 p2 = mesh.vertices[cell.v[2]];
    const double doubled = cross(p1 - p0, p2 - p0);
    if (doubled <= 0.0) {
      throw InputError("cell " + std::to_string(c) +
                       " is degenerate or not counterclockwise");
    }
    cell.area = 0.5 * doubled;
    cell.h = std::max({norm(p1 - p0), norm(p2 - p1), norm(p0 - p2)});
  }
}

}  // namespace

int Mesh::n_cells(Region r) const {
  int n = 0;
  for (const Cell& c : cells) n += (c.region == r) ? 1 : 0;
  return n;
}

int Mesh::n_facets(FacetClass c) const {
  int n = 0;
  for (const Facet& f : facets) n += (f.cls == c) ? 1 : 0;
  return n;
}

Mesh build_topology(std::vector<Vec2> vertices,
                    std::vector<std::array<int, 3>> cell_vertices,
                    std::vector<Region> regions) {
  if (vertices.empty() || cell_vertices.empty()) {
    throw InputError("mesh must contain at least one vertex and one cell");
  }
  if (regions.size() != cell_vertices.size()) {
    throw InputError("one region tag per cell required");
  }

  Mesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.cells.resize(cell_vertices.size());
  const int nv = static_cast<int>(mesh.vertices.size());
  for (std::size_t c = 0; c < cell_vertices.size(); ++c) {
    for (int i = 0; i < 3; ++i) {
      const int v = cell_vertices[c][i];
      if (v < 0 || v >= nv) {
        throw InputError("cell " + std::to_string(c) + " references vertex " +
                         std::to_string(v) + " out of range");
      }
    }
    mesh.cells[c].v = cell_vertices[c];
    mesh.cells[c].region = regions[c];
  }
  compute_cell_metrics(mesh);

  // Edge map keyed by sorted endpoints. Counterclockwise cells traverse a
  // shared edge in opposite directions; seeing the same direction twice means
  // inconsistent orientation.
  std::map<std::pair<int, int>, int> edge_to_facet;
  mesh.cell_facets.assign(mesh.cells.size(), {-1, -1, -1});
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const std::array<int, 3>& v = mesh.cells[c].v;
    for (int e = 0; e < 3; ++e) {
      // local edge e is opposite vertex e
      const int a = v[(e + 1) % 3];
      const int b = v[(e + 2) % 3];
      const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
      auto it = edge_to_facet.find(key);
      if (it == edge_to_facet.end()) {
        Facet f;
        f.v0 = key.first;
        f.v1 = key.second;
        f.owner = static_cast<int>(c);
        f.length = edge_length(mesh, f.v0, f.v1);
        const int fid = static_cast<int>(mesh.facets.size());
        mesh.facets.push_back(f);
        edge_to_facet.emplace(key, fid);
        mesh.cell_facets[c][e] = fid;
      } else {
        Facet& f = mesh.facets[it->second];
        if (f.neighbor != -1) {
          throw InputError("facet between vertices " + std::to_string(key.first) +
                           " and " + std::to_string(key.second) +
                           " is shared by more than two cells");
        }
        f.neighbor = static_cast<int>(c);
        mesh.cell_facets[c][e] = it->second;
      }
    }
  }

  // Orientation consistency: two counterclockwise cells must traverse a shared
  // edge in opposite directions; the same direction twice means overlapping or
  // duplicated cells.
  {
    std::map<std::pair<int, int>, int> directed;
    for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
      const std::array<int, 3>& v = mesh.cells[c].v;
      for (int e = 0; e < 3; ++e) {
        const std::pair<int, int> key{v[(e + 1) % 3], v[(e + 2) % 3]};
        auto [it, inserted] = directed.emplace(key, static_cast<int>(c));
        if (!inserted) {
          throw InputError("cells " + std::to_string(it->second) + " and " +
                           std::to_string(c) +
                           " traverse a shared facet in the same direction");
        }
      }
    }
  }

  // Interface facets keep the free-flow cell as owner so the stored normal
  // points from the free-flow region into the porous one.
  for (Facet& f : mesh.facets) {
    if (f.neighbor != -1) {
      const Region ro = mesh.cells[f.owner].region;
      const Region rn = mesh.cells[f.neighbor].region;
      if (ro != rn) {
        if (ro == Region::Darcy) std::swap(f.owner, f.neighbor);
        f.cls = FacetClass::Interface;
      } else {
        f.cls = (ro == Region::Stokes) ? FacetClass::InteriorS : FacetClass::InteriorD;
      }
    } else {
      f.cls = (mesh.cells[f.owner].region == Region::Stokes) ? FacetClass::GammaS
                                                             : FacetClass::GammaD;
    }
  }

  // Normals: rotate the edge direction so the result points out of the owner.
  for (Facet& f : mesh.facets) {
    const Vec2 t = mesh.vertices[f.v1] - mesh.vertices[f.v0];
    Vec2 n{t.y / f.length, -t.x / f.length};
    const Cell& cell = mesh.cells[f.owner];
    const Vec2 other = (1.0 / 3.0) * (mesh.vertices[cell.v[0]] + mesh.vertices[cell.v[1]] +
                                      mesh.vertices[cell.v[2]]);
    if (dot(n, mesh.vertices[f.v0] - other) < 0.0) n = {-n.x, -n.y};
    f.normal = n;
  }

  return mesh;
}

Mesh generate_mesh(int n, bool perturb, unsigned seed) {
  if (n < 2 || n % 2 != 0) {
    throw InputError("mesh parameter n must be even and at least 2, got " +
                     std::to_string(n));
  }

  const int nv1 = n + 1;
  std::vector<Vec2> vertices(static_cast<std::size_t>(nv1) * nv1);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      vertices[static_cast<std::size_t>(j) * nv1 + i] = {static_cast<double>(i) / n,
                                                         static_cast<double>(j) / n};
    }
  }

  if (perturb) {
    // Interior vertices only; the interface line and the boundary stay put so
    // region geometry is preserved. Displacement bounded by 0.2 h per
    // coordinate keeps all cells valid.
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> shift(-0.2 / n, 0.2 / n);
    for (int j = 1; j < n; ++j) {
      for (int i = 1; i < n; ++i) {
        const double dx = shift(rng);
        const double dy = shift(rng);
        if (j == n / 2) continue;  // keep the interface straight
        Vec2& v = vertices[static_cast<std::size_t>(j) * nv1 + i];
        v.x += dx;
        v.y += dy;
      }
    }
  }

  std::vector<std::array<int, 3>> cells;
  std::vector<Region> regions;
  cells.reserve(static_cast<std::size_t>(2) * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = j * nv1 + i;
      const int v10 = j * nv1 + i + 1;
      const int v01 = (j + 1) * nv1 + i;
      const int v11 = (j + 1) * nv1 + i + 1;
      // Alternate the split diagonal in a checkerboard for isotropy.
      if ((i + j) % 2 == 0) {
        cells.push_back({v00, v10, v11});
        cells.push_back({v00, v11, v01});
      } else {
        cells.push_back({v00, v10, v01});
        cells.push_back({v10, v11, v01});
      }
      const Region r = (2 * j < n) ? Region::Darcy : Region::Stokes;
      regions.push_back(r);
      regions.push_back(r);
    }
  }

  Mesh mesh = build_topology(std::move(vertices), std::move(cells), std::move(regions));
  validate(mesh);
  return mesh;
}

void validate(const Mesh& mesh) {
  double area_s = 0.0, area_d = 0.0;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const Cell& cell = mesh.cells[c];
    double ymin = 1e300, ymax = -1e300;
    for (int i = 0; i < 3; ++i) {
      const Vec2 p = mesh.vertices[cell.v[i]];
      if (p.x < -kGeomTol || p.x > 1.0 + kGeomTol || p.y < -kGeomTol ||
          p.y > 1.0 + kGeomTol) {
        throw InputError("cell " + std::to_string(c) +
                         " has a vertex outside the unit square");
      }
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
    if (cell.region == Region::Stokes) {
      if (ymin < 0.5 - kGeomTol) {
        throw InputError("cell " + std::to_string(c) + " crosses the interface");
      }
      area_s += cell.area;
    } else {
      if (ymax > 0.5 + kGeomTol) {
        throw InputError("cell " + std::to_string(c) + " crosses the interface");
      }
      area_d += cell.area;
    }
  }
  if (std::abs(area_s - 0.5) > 1e-8 || std::abs(area_d - 0.5) > 1e-8) {
    throw InputError("region areas do not tile the unit square halves (free flow " +
                     std::to_string(area_s) + ", porous " + std::to_string(area_d) + ")");
  }

  for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
    const Facet& facet = mesh.facets[f];
    if (facet.neighbor != -1) continue;
    const Vec2 a = mesh.vertices[facet.v0];
    const Vec2 b = mesh.vertices[facet.v1];
    const bool on_side = (std::abs(a.x) < kGeomTol && std::abs(b.x) < kGeomTol) ||
                         (std::abs(a.x - 1.0) < kGeomTol && std::abs(b.x - 1.0) < kGeomTol) ||
                         (std::abs(a.y) < kGeomTol && std::abs(b.y) < kGeomTol) ||
                         (std::abs(a.y - 1.0) < kGeomTol && std::abs(b.y - 1.0) < kGeomTol);
    if (!on_side) {
      throw InputError("boundary facet " + std::to_string(f) +
                       " does not lie on the unit-square boundary");
    }
  }
}

void classify_facets(Mesh& mesh, BoundarySplit split) {
  for (std::size_t fi = 0; fi < mesh.facets.size(); ++fi) {
    Facet& f = mesh.facets[fi];
    if (f.neighbor != -1) continue;  // interior labels fixed by build_topology
    const Region r = mesh.cells[f.owner].region;
    if (split == BoundarySplit::Collapsed) {
      f.cls = (r == Region::Stokes) ? FacetClass::GammaS : FacetClass::GammaD;
      continue;
    }
    const Vec2 a = mesh.vertices[f.v0];
    const Vec2 b = mesh.vertices[f.v1];
    auto on = [&](double av, double bv, double target) {
      return std::abs(av - target) < kGeomTol && std::abs(bv - target) < kGeomTol;
    };
    if (r == Region::Stokes) {
      if (on(a.x, b.x, 0.0)) {
        f.cls = FacetClass::GammaS1;
      } else if (on(a.x, b.x, 1.0)) {
        f.cls = FacetClass::GammaS2;
      } else if (on(a.y, b.y, 1.0)) {
        f.cls = FacetClass::GammaS3;
      } else {
        throw InputError("free-flow boundary facet " + std::to_string(fi) +
                         " matches no sub-boundary");
      }
    } else {
      if (on(a.x, b.x, 0.0) || on(a.x, b.x, 1.0)) {
        f.cls = FacetClass::GammaD1;
      } else if (on(a.y, b.y, 0.0)) {
        f.cls = FacetClass::GammaD2;
      } else {
        throw InputError("porous boundary facet " + std::to_string(fi) +
                         " matches no sub-boundary");
      }
    }
  }
}

Mesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open mesh file '" + path + "'");

  std::string line;
  int line_no = 0;
  auto next_line = [&]() -> std::string {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r\n") != std::string::npos) return line;
    }
    throw InputError(path + ": unexpected end of file after line " +
                     std::to_string(line_no));
  };

  // Header "vertices N cells M"; a literal '/' between the pairs is tolerated.
  std::istringstream header(next_line());
  std::string kw_v, kw_c, sep;
  long nv = -1, nc = -1;
  header >> kw_v >> nv >> sep;
  if (sep != "/") {
    kw_c = sep;
  } else {
    header >> kw_c;
  }
  header >> nc;
  if (kw_v != "vertices" || kw_c != "cells" || nv <= 0 || nc <= 0 || header.fail()) {
    throw InputError(path + ":" + std::to_string(line_no) +
                     ": expected header 'vertices N cells M'");
  }

  std::vector<Vec2> vertices;
  vertices.reserve(nv);
  for (long i = 0; i < nv; ++i) {
    std::istringstream ls(next_line());
    Vec2 p;
    ls >> p.x >> p.y;
    if (ls.fail()) {
      throw InputError(path + ":" + std::to_string(line_no) +
                       ": expected vertex line 'x y'");
    }
    vertices.push_back(p);
  }

  std::vector<std::array<int, 3>> cells;
  std::vector<Region> regions;
  cells.reserve(nc);
  for (long i = 0; i < nc; ++i) {
    std::istringstream ls(next_line());
    std::array<int, 3> v{};
    std::string tag;
    ls >> v[0] >> v[1] >> v[2] >> tag;
    if (ls.fail() || (tag != "s" && tag != "d")) {
      throw InputError(path + ":" + std::to_string(line_no) +
                       ": expected cell line 'v0 v1 v2 region' with region s or d");
    }
    cells.push_back(v);
    regions.push_back(tag == "s" ? Region::Stokes : Region::Darcy);
  }

  // Exact coordinate duplicates are legal but usually a meshing mistake.
  {
    std::vector<std::pair<std::pair<double, double>, int>> coords;
    coords.reserve(vertices.size());
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      coords.push_back({{vertices[i].x, vertices[i].y}, static_cast<int>(i)});
    }
    std::sort(coords.begin(), coords.end());
    for (std::size_t i = 1; i < coords.size(); ++i) {
      if (coords[i].first == coords[i - 1].first) {
        std::cerr << "warning: " << path << ": vertices " << coords[i - 1].second
                  << " and " << coords[i].second << " share coordinates ("
                  << coords[i].first.first << ", " << coords[i].first.second << ")\n";
      }
    }
  }

  Mesh mesh = build_topology(std::move(vertices), std::move(cells), std::move(regions));
  validate(mesh);
  return mesh;
}

void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out.precision(17);
  out << "vertices " << mesh.vertices.size() << " cells " << mesh.cells.size() << "\n";
  for (const Vec2& v : mesh.vertices) out << v.x << " " << v.y << "\n";
  for (const Cell& c : mesh.cells) {
    out << c.v[0] << " " << c.v[1] << " " << c.v[2] << " "
        << (c.region == Region::Stokes ? "s" : "d") << "\n";
  }
  if (!out) throw InputError("failed writing mesh to '" + path + "'");
}

}  // namespace edghdg
