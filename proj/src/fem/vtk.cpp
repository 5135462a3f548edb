#include "limitcurve/fem/vtk.hpp"

#include "limitcurve/format.hpp"

#include <ostream>
#include <stdexcept>

namespace limitcurve::fem {

void write_vtk(std::ostream& os, const Mesh& mesh,
               const std::vector<Eigen::Vector2d>& displacement,
               const std::vector<double>& deviatoric_strain, const std::string& title) {
    if (static_cast<int>(displacement.size()) < mesh.n_corner) {
        throw std::invalid_argument("write_vtk: displacement field smaller than the corner count");
    }
    if (deviatoric_strain.size() != mesh.elements.size()) {
        throw std::invalid_argument("write_vtk: cell field size mismatch");
    }

    os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";

    os << "POINTS " << mesh.n_corner << " double\n";
    for (int a = 0; a < mesh.n_corner; ++a) {
        os << format_double(mesh.nodes[a].x()) << ' ' << format_double(mesh.nodes[a].y())
           << " 0\n";
    }

    os << "CELLS " << mesh.n_elements() << ' ' << 4 * mesh.n_elements() << '\n';
    for (const auto& el : mesh.elements) {
        os << "3 " << el.n[0] << ' ' << el.n[1] << ' ' << el.n[2] << '\n';
    }
    os << "CELL_TYPES " << mesh.n_elements() << '\n';
    for (int e = 0; e < mesh.n_elements(); ++e) {
        os << "5\n";
    }

    os << "POINT_DATA " << mesh.n_corner << "\nVECTORS displacement double\n";
    for (int a = 0; a < mesh.n_corner; ++a) {
        os << format_double(displacement[a].x()) << ' ' << format_double(displacement[a].y())
           << " 0\n";
    }

    os << "CELL_DATA " << mesh.n_elements()
       << "\nSCALARS deviatoric_strain double 1\nLOOKUP_TABLE default\n";
    for (double v : deviatoric_strain) {
        os << format_double(v) << '\n';
    }
}

}  // namespace limitcurve::fem
