#include "limitcurve/fem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace limitcurve::fem {

namespace {

double signed_area2(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, int line, const std::string& what) {
    throw std::runtime_error("mesh parse error (" + path.string() + ":" + std::to_string(line) +
                             "): " + what);
}

}  // namespace

void Mesh::validate() const {
    double scale = 0.0;
    for (const auto& p : nodes) {
        scale = std::max(scale, p.cwiseAbs().maxCoeff());
    }
    scale = std::max(scale, 1e-12);

    for (std::size_t e = 0; e < elements.size(); ++e) {
        const auto& el = elements[e];
        for (int a : el.n) {
            if (a < 0 || a >= n_nodes()) {
                throw std::runtime_error("mesh: node index out of range in element " +
                                         std::to_string(e));
            }
        }
        const double area2 = signed_area2(nodes[el.n[0]], nodes[el.n[1]], nodes[el.n[2]]);
        if (!(area2 > 1e-12 * scale * scale)) {
            throw std::runtime_error("mesh: element " + std::to_string(e) +
                                     " is degenerate or clockwise");
        }
        const std::array<std::pair<int, int>, 3> pairs = {
            std::make_pair(el.n[0], el.n[1]), std::make_pair(el.n[1], el.n[2]),
            std::make_pair(el.n[2], el.n[0])};
        for (int k = 0; k < 3; ++k) {
            const Eigen::Vector2d mid =
                0.5 * (nodes[pairs[k].first] + nodes[pairs[k].second]);
            const double edge_len =
                (nodes[pairs[k].first] - nodes[pairs[k].second]).norm();
            if ((nodes[el.n[3 + k]] - mid).norm() > 1e-9 * std::max(edge_len, 1e-12)) {
                throw std::runtime_error("mesh: midside node off the edge midpoint in element " +
                                         std::to_string(e));
            }
        }
    }
    if (fixed.size() != nodes.size()) {
        throw std::runtime_error("mesh: fixity table size mismatch");
    }
}

Mesh lift_to_p2(std::vector<Eigen::Vector2d> corners,
                std::vector<std::array<int, 3>> triangles,
                std::vector<std::array<bool, 2>> corner_fixed,
                std::vector<std::string>* warnings) {
    if (corner_fixed.size() != corners.size()) {
        throw std::invalid_argument("lift_to_p2: fixity table must match the corner count");
    }
    Mesh mesh;
    mesh.nodes = std::move(corners);
    mesh.n_corner = mesh.n_nodes();
    mesh.fixed = std::move(corner_fixed);

    for (std::size_t e = 0; e < triangles.size(); ++e) {
        auto& tri = triangles[e];
        for (int a : tri) {
            if (a < 0 || a >= mesh.n_corner) {
                throw std::runtime_error("lift_to_p2: corner index out of range in element " +
                                         std::to_string(e));
            }
        }
        if (signed_area2(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]) < 0.0) {
            std::swap(tri[1], tri[2]);
            if (warnings) {
                warnings->push_back("element " + std::to_string(e) +
                                    " had clockwise corners; reordered");
            }
        }
    }

    std::map<std::pair<int, int>, int> edge_midside;
    auto midside = [&](int a, int b) {
        const auto key = std::minmax(a, b);
        auto it = edge_midside.find(key);
        if (it != edge_midside.end()) {
            return it->second;
        }
        const int id = mesh.n_nodes();
        mesh.nodes.push_back(0.5 * (mesh.nodes[a] + mesh.nodes[b]));
        mesh.fixed.push_back({mesh.fixed[a][0] && mesh.fixed[b][0],
                              mesh.fixed[a][1] && mesh.fixed[b][1]});
        edge_midside.emplace(key, id);
        return id;
    };

    mesh.elements.reserve(triangles.size());
    for (const auto& tri : triangles) {
        Mesh::Element el;
        el.n[0] = tri[0];
        el.n[1] = tri[1];
        el.n[2] = tri[2];
        el.n[3] = midside(tri[0], tri[1]);
        el.n[4] = midside(tri[1], tri[2]);
        el.n[5] = midside(tri[2], tri[0]);
        mesh.elements.push_back(el);
    }

    mesh.validate();
    return mesh;
}

Mesh load_mesh(const std::filesystem::path& path, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("mesh file not found: " + path.string());
    }

    int line_no = 0;
    auto next_line = [&](std::string& line) {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (line.find_first_not_of(" \t") != std::string::npos && line[0] != '#') {
                return true;
            }
        }
        return false;
    };

    auto read_count = [&](const std::string& keyword) {
        std::string line;
        if (!next_line(line)) {
            parse_fail(path, line_no, "missing section '" + keyword + "'");
        }
        std::istringstream ss(line);
        std::string word;
        long count = -1;
        ss >> word >> count;
        if (word != keyword || count < 0) {
            parse_fail(path, line_no, "expected '" + keyword + " <count>', got '" + line + "'");
        }
        return count;
    };

    const long n_nodes = read_count("nodes");
    std::vector<Eigen::Vector2d> corners(n_nodes);
    for (long i = 0; i < n_nodes; ++i) {
        std::string line;
        if (!next_line(line)) {
            parse_fail(path, line_no, "truncated nodes section");
        }
        std::istringstream ss(line);
        if (!(ss >> corners[i].x() >> corners[i].y())) {
            parse_fail(path, line_no, "bad node line '" + line + "'");
        }
    }

    const long n_elements = read_count("elements");
    std::vector<std::array<int, 3>> triangles(n_elements);
    for (long i = 0; i < n_elements; ++i) {
        std::string line;
        if (!next_line(line)) {
            parse_fail(path, line_no, "truncated elements section");
        }
        std::istringstream ss(line);
        if (!(ss >> triangles[i][0] >> triangles[i][1] >> triangles[i][2])) {
            parse_fail(path, line_no, "bad element line '" + line + "'");
        }
    }

    const long n_dirichlet = read_count("dirichlet");
    std::vector<std::array<bool, 2>> fixed(n_nodes, {false, false});
    for (long i = 0; i < n_dirichlet; ++i) {
        std::string line;
        if (!next_line(line)) {
            parse_fail(path, line_no, "truncated dirichlet section");
        }
        std::istringstream ss(line);
        long node = -1;
        int fx = 0;
        int fy = 0;
        if (!(ss >> node >> fx >> fy) || node < 0 || node >= n_nodes) {
            parse_fail(path, line_no, "bad dirichlet line '" + line + "'");
        }
        fixed[node] = {fx != 0, fy != 0};
    }

    return lift_to_p2(std::move(corners), std::move(triangles), std::move(fixed), warnings);
}

Mesh unit_square_fixture() {
    std::vector<Eigen::Vector2d> corners = {
        {0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
    std::vector<std::array<int, 3>> tris = {{0, 1, 2}, {0, 2, 3}};
    std::vector<std::array<bool, 2>> fixed = {
        {true, true}, {true, true}, {false, false}, {false, false}};
    return lift_to_p2(std::move(corners), std::move(tris), std::move(fixed));
}

Mesh build_slope_mesh(const SlopeGeometry& geo) {
    if (!(geo.inclination_deg > 0.0 && geo.inclination_deg < 90.0)) {
        throw std::invalid_argument("build_slope_mesh: inclination must lie in (0, 90) degrees");
    }
    if (!(geo.height > 0.0 && geo.pad > 0.0 && geo.h_mesh > 0.0)) {
        throw std::invalid_argument("build_slope_mesh: height, pad and h_mesh must be positive");
    }

    const double depth = geo.pad;
    const double top = depth + geo.height;
    const double run = geo.height / std::tan(geo.inclination_deg * std::numbers::pi / 180.0);
    const double x_crest = geo.pad;
    const double x_toe = x_crest + run;
    const double x_right = x_toe + geo.pad;

    auto divisions = [&](double extent) {
        return std::max(1, static_cast<int>(std::lround(extent / geo.h_mesh)));
    };
    const int ny = std::max(2, static_cast<int>(std::lround(top / geo.h_mesh)));
    const int nx_a = divisions(x_crest);
    const int nx_b = divisions(run);
    const int nx_c = divisions(x_right - x_toe);
    const int n_col = nx_a + nx_b + nx_c + 1;

    // column abscissas and the ground surface above each column
    std::vector<double> xs(n_col);
    std::vector<double> surface(n_col);
    for (int c = 0; c <= nx_a; ++c) {
        xs[c] = x_crest * c / nx_a;
        surface[c] = top;
    }
    for (int c = 1; c <= nx_b; ++c) {
        const double frac = static_cast<double>(c) / nx_b;
        xs[nx_a + c] = x_crest + run * frac;
        surface[nx_a + c] = top - geo.height * frac;
    }
    for (int c = 1; c <= nx_c; ++c) {
        xs[nx_a + nx_b + c] = x_toe + (x_right - x_toe) * c / nx_c;
        surface[nx_a + nx_b + c] = depth;
    }

    std::vector<Eigen::Vector2d> corners;
    corners.reserve(static_cast<std::size_t>(n_col) * (ny + 1));
    for (int c = 0; c < n_col; ++c) {
        for (int j = 0; j <= ny; ++j) {
            corners.emplace_back(xs[c], surface[c] * j / ny);
        }
    }
    auto node_id = [&](int c, int j) { return c * (ny + 1) + j; };

    std::vector<std::array<int, 3>> tris;
    tris.reserve(static_cast<std::size_t>(n_col - 1) * ny * 2);
    for (int c = 0; c + 1 < n_col; ++c) {
        for (int j = 0; j < ny; ++j) {
            const int n00 = node_id(c, j);
            const int n10 = node_id(c + 1, j);
            const int n11 = node_id(c + 1, j + 1);
            const int n01 = node_id(c, j + 1);
            tris.push_back({n00, n10, n11});
            tris.push_back({n00, n11, n01});
        }
    }

    std::vector<std::array<bool, 2>> fixed(corners.size(), {false, false});
    const double tol = 1e-9 * std::max(x_right, top);
    for (std::size_t i = 0; i < corners.size(); ++i) {
        if (corners[i].y() <= tol) {
            fixed[i] = {true, true};
        } else if (corners[i].x() <= tol || corners[i].x() >= x_right - tol) {
            fixed[i][0] = true;
        }
    }

    return lift_to_p2(std::move(corners), std::move(tris), std::move(fixed));
}

}  // namespace limitcurve::fem
