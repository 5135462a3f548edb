#pragma once

#include <Eigen/Dense>

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace limitcurve::fem {

/// Plane-strain triangle mesh with quadratic elements. Corner nodes come
/// first, midside nodes are generated on the unique edges and appended.
/// Element connectivity is (c0, c1, c2, m01, m12, m20) with counterclockwise
/// corners.
struct Mesh {
    std::vector<Eigen::Vector2d> nodes;
    int n_corner = 0;

    struct Element {
        std::array<int, 6> n{};
    };
    std::vector<Element> elements;

    std::vector<std::array<bool, 2>> fixed;  // per node, per component

    int n_nodes() const { return static_cast<int>(nodes.size()); }
    int n_elements() const { return static_cast<int>(elements.size()); }

    /// Enforces the structural invariants: positive element areas, counter-
    /// clockwise corners, midside nodes at edge midpoints. Throws on violation.
    void validate() const;
};

/// Builds the quadratic mesh from corner data: orients elements counter-
/// clockwise (collecting a warning per flipped element), generates midside
/// nodes, and propagates boundary fixities onto midsides whose both edge
/// endpoints are fixed.
Mesh lift_to_p2(std::vector<Eigen::Vector2d> corners,
                std::vector<std::array<int, 3>> triangles,
                std::vector<std::array<bool, 2>> corner_fixed,
                std::vector<std::string>* warnings = nullptr);

/// Reads the native ASCII format:
///   nodes <N>        followed by N lines "x y"
///   elements <M>     followed by M lines "i j k" (0-based corner indices)
///   dirichlet <K>    followed by K lines "node fix_x fix_y" (0/1 flags)
/// Midside nodes are generated. Parse errors carry line numbers.
Mesh load_mesh(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

/// Two-triangle unit square with the bottom edge fully fixed.
Mesh unit_square_fixture();

struct SlopeGeometry {
    double height = 10.0;           // slope height (m)
    double inclination_deg = 31.0;  // slope face angle from horizontal
    double pad = 15.0;              // foundation depth, crest and toe extent (m)
    double h_mesh = 1.0;            // target element size (m)
};

/// Structured block mesh of a homogeneous slope cross-section: crest plateau,
/// inclined face, toe run, on top of a foundation layer of depth `pad`.
/// Bottom fixed in both components, vertical side faces fixed normally, the
/// remaining boundary free.
Mesh build_slope_mesh(const SlopeGeometry& geometry);

}  // namespace limitcurve::fem
