#pragma once

#include "limitcurve/fem/mesh.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

namespace limitcurve::fem {

/// Legacy ASCII VTK unstructured grid: corner nodes as points, triangles as
/// cells, nodal displacement vectors (z = 0) and a per-cell deviatoric
/// strain scalar.
void write_vtk(std::ostream& os, const Mesh& mesh,
               const std::vector<Eigen::Vector2d>& displacement,
               const std::vector<double>& deviatoric_strain,
               const std::string& title = "limitcurve fields");

}  // namespace limitcurve::fem
