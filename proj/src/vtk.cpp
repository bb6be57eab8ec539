#include "edghdg/vtk.hpp"

#include <fstream>
#include <vector>

#include "edghdg/errors.hpp"
#include "edghdg/refelem.hpp"

namespace edghdg {

void write_vtk(const std::string& path, const SolutionFields& fields,
               const ScalarField& kappa) {
  const Mesh& mesh = fields.mesh();
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out.precision(9);

  out << "# vtk DataFile Version 3.0\n";
  out << "coupled free-flow / porous-medium solution\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";

  out << "POINTS " << mesh.vertices.size() << " double\n";
  for (const Vec2& v : mesh.vertices) out << v.x << " " << v.y << " 0\n";

  out << "CELLS " << mesh.cells.size() << " " << 4 * mesh.cells.size() << "\n";
  for (const Cell& c : mesh.cells) out << "3 " << c.v[0] << " " << c.v[1] << " " << c.v[2] << "\n";
  out << "CELL_TYPES " << mesh.cells.size() << "\n";
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) out << "5\n";

  // Vertex-averaged velocity, display only: the field is discontinuous.
  std::vector<Vec2> avg(mesh.vertices.size(), Vec2{0.0, 0.0});
  std::vector<int> count(mesh.vertices.size(), 0);
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    for (int i = 0; i < 3; ++i) {
      const int v = mesh.cells[c].v[i];
      avg[v] = avg[v] + fields.velocity(static_cast<int>(c), mesh.vertices[v]);
      count[v] += 1;
    }
  }
  out << "POINT_DATA " << mesh.vertices.size() << "\n";
  out << "VECTORS velocity double\n";
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const Vec2 u = (count[v] > 0) ? (1.0 / count[v]) * avg[v] : Vec2{0.0, 0.0};
    out << u.x << " " << u.y << " 0\n";
  }

  out << "CELL_DATA " << mesh.cells.size() << "\n";
  out << "SCALARS region int 1\nLOOKUP_TABLE default\n";
  for (const Cell& c : mesh.cells) out << (c.region == Region::Stokes ? 0 : 1) << "\n";

  const QuadRule rule = triangle_rule(2 * fields.layout().k);
  out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const Cell& cell = mesh.cells[c];
    const Vec2 p0 = mesh.vertices[cell.v[0]];
    const Vec2 p1 = mesh.vertices[cell.v[1]];
    const Vec2 p2 = mesh.vertices[cell.v[2]];
    double mean = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Vec2 x = p0 + rule.points[q].x * (p1 - p0) + rule.points[q].y * (p2 - p0);
      mean += 2.0 * rule.weights[q] * fields.pressure(static_cast<int>(c), x);
    }
    out << mean << "\n";
  }

  out << "SCALARS permeability double 1\nLOOKUP_TABLE default\n";
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const Cell& cell = mesh.cells[c];
    out << (cell.region == Region::Darcy && kappa ? kappa(mesh.centroid(static_cast<int>(c)))
                                                  : 0.0)
        << "\n";
  }
  if (!out) throw InputError("failed while writing " + path);
}

}  // namespace edghdg
