#pragma once

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "ccbm/geometry.hpp"

namespace ccbm {

struct BoundaryEdge {
    int a = -1, b = -1; // oriented so that a->b walks the boundary counterclockwise
    Vec2 normal;        // unit outward normal
};

// Conforming triangulation of the computational rectangle. Immutable after
// construction; all operations return new meshes.
struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles; // counterclockwise
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<std::uint8_t> element_region; // 1 = inside omega, 0 = outside
    Rect bounds;
    bool region_warning = false; // set when mark_region tagged nothing

    double triangle_area(int t) const {
        const auto& tr = triangles[t];
        return triangle_signed_area(vertices[tr[0]], vertices[tr[1]], vertices[tr[2]]);
    }
    Vec2 barycenter(int t) const {
        const auto& tr = triangles[t];
        return (1.0 / 3.0) * (vertices[tr[0]] + vertices[tr[1]] + vertices[tr[2]]);
    }
    double total_area() const;
    double region_area() const;
    std::vector<std::uint8_t> boundary_vertex_mask() const;
    std::vector<std::vector<int>> vertex_adjacency() const;
};

struct Disc {
    Vec2 center;
    double radius = 0;
};
struct Square {
    Vec2 center;
    double half_width = 0;
};
using ShapePrimitive = std::variant<Disc, Square>;

// Geometric description of the contact region omega together with the
// reaction coefficient mu0 defining mu = mu0 * chi_omega.
struct InclusionSpec {
    std::vector<ShapePrimitive> shapes;
    double mu0 = 10.0;

    bool empty() const { return shapes.empty(); }
    bool contains(Vec2 p) const;
    // unsigned distance from p to the region boundary (exact for disjoint primitives)
    double boundary_distance(Vec2 p) const;
};

// Validates mu0 > 0, nonempty with positive area, every primitive strictly
// inside the bounds. Throws std::invalid_argument on violation.
InclusionSpec make_inclusion_spec(std::vector<ShapePrimitive> shapes, double mu0, const Rect& bounds);

// Per-vertex displacement field.
struct VectorField {
    std::vector<Vec2> values;
};

// Structured triangulation with the parity-alternating diagonal split:
// invariant under x<->-x and y<->-y reflections for centered bounds and
// even nx, ny.
Mesh build_rect_mesh(int nx, int ny, const Rect& bounds);

// Tags element_region by barycenter membership; otherwise identical mesh.
Mesh mark_region(const Mesh& mesh, const InclusionSpec& spec);

// Fraction of each triangle covered by the region, by adaptive subdivision.
// Resolves inclusions below the mesh scale, unlike the barycenter test.
std::vector<double> element_coverage(const Mesh& mesh, const InclusionSpec& spec, int max_depth = 6);

// Moves every vertex by t * theta. Throws InvertedElement when any signed
// area drops to <= 1e-3 of its original value.
Mesh deform_mesh(const Mesh& mesh, const VectorField& theta, double t);

// min over triangles of inradius/circumradius, normalized to 1 for equilateral.
double min_triangle_quality(const Mesh& mesh);

// Region interface: the edges separating inside- from outside-tagged elements.
struct Interface {
    std::vector<std::array<int, 2>> edges; // vertex pairs
    std::vector<Vec2> edge_normals;        // unit, outward from the region
    std::vector<int> nodes;                // unique interface vertices
    std::vector<Vec2> node_normals;        // edge-averaged, unit
    std::vector<double> edge_lengths;
    double length() const;
};

// Throws InterfaceNotResolved when no region boundary exists.
Interface extract_interface(const Mesh& mesh);

} // namespace ccbm
