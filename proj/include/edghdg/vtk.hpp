#pragma once

#include <string>

#include "edghdg/solve.hpp"

namespace edghdg {

// Legacy ASCII unstructured-grid file: mesh vertices as points, triangles as
// cells, vertex-averaged velocity vectors as point data (display only), and
// region tag, cell-mean pressure and permeability at the centroid (zero in the
// free-flow region) as cell data.
void write_vtk(const std::string& path, const SolutionFields& fields,
               const ScalarField& kappa);

}  // namespace edghdg
