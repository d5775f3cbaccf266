#include "ccbm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include "ccbm/errors.hpp"

namespace ccbm {

double Mesh::total_area() const {
    double a = 0;
    for (std::size_t t = 0; t < triangles.size(); ++t) a += triangle_area(static_cast<int>(t));
    return a;
}

double Mesh::region_area() const {
    double a = 0;
    for (std::size_t t = 0; t < triangles.size(); ++t)
        if (element_region[t]) a += triangle_area(static_cast<int>(t));
    return a;
}

std::vector<std::uint8_t> Mesh::boundary_vertex_mask() const {
    std::vector<std::uint8_t> mask(vertices.size(), 0);
    for (const auto& e : boundary_edges) {
        mask[e.a] = 1;
        mask[e.b] = 1;
    }
    return mask;
}

std::vector<std::vector<int>> Mesh::vertex_adjacency() const {
    std::vector<std::set<int>> adj(vertices.size());
    for (const auto& tr : triangles) {
        for (int k = 0; k < 3; ++k) {
            int a = tr[k], b = tr[(k + 1) % 3];
            adj[a].insert(b);
            adj[b].insert(a);
        }
    }
    std::vector<std::vector<int>> out(vertices.size());
    for (std::size_t i = 0; i < adj.size(); ++i) out[i].assign(adj[i].begin(), adj[i].end());
    return out;
}

bool InclusionSpec::contains(Vec2 p) const {
    for (const auto& s : shapes) {
        if (std::holds_alternative<Disc>(s)) {
            const auto& d = std::get<Disc>(s);
            if (dist(p, d.center) <= d.radius) return true;
        } else {
            const auto& q = std::get<Square>(s);
            if (std::abs(p.x - q.center.x) <= q.half_width && std::abs(p.y - q.center.y) <= q.half_width)
                return true;
        }
    }
    return false;
}

double InclusionSpec::boundary_distance(Vec2 p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : shapes) {
        double sd;
        if (std::holds_alternative<Disc>(s)) {
            const auto& d = std::get<Disc>(s);
            sd = dist(p, d.center) - d.radius;
        } else {
            const auto& q = std::get<Square>(s);
            double dx = std::abs(p.x - q.center.x) - q.half_width;
            double dy = std::abs(p.y - q.center.y) - q.half_width;
            if (dx <= 0 && dy <= 0) {
                sd = std::max(dx, dy);
            } else {
                double ox = std::max(dx, 0.0), oy = std::max(dy, 0.0);
                sd = std::sqrt(ox * ox + oy * oy);
            }
        }
        best = std::min(best, std::abs(sd));
    }
    return best;
}

InclusionSpec make_inclusion_spec(std::vector<ShapePrimitive> shapes, double mu0, const Rect& bounds) {
    if (!(mu0 > 0)) throw std::invalid_argument("inclusion: mu0 must be positive");
    if (shapes.empty()) throw std::invalid_argument("inclusion: needs at least one shape");
    for (const auto& s : shapes) {
        if (std::holds_alternative<Disc>(s)) {
            const auto& d = std::get<Disc>(s);
            if (!(d.radius > 0)) throw std::invalid_argument("inclusion: disc radius must be positive");
            if (!bounds.contains(d.center) || !(bounds.side_distance(d.center) > d.radius))
                throw std::invalid_argument("inclusion: disc not strictly inside the domain");
        } else {
            const auto& q = std::get<Square>(s);
            if (!(q.half_width > 0)) throw std::invalid_argument("inclusion: square half-width must be positive");
            if (!bounds.contains(q.center) || !(bounds.side_distance(q.center) > q.half_width))
                throw std::invalid_argument("inclusion: square not strictly inside the domain");
        }
    }
    InclusionSpec spec;
    spec.shapes = std::move(shapes);
    spec.mu0 = mu0;
    return spec;
}

Mesh build_rect_mesh(int nx, int ny, const Rect& bounds) {
    if (nx < 1 || ny < 1) throw std::invalid_argument("build_rect_mesh: nx, ny must be >= 1");
    if (!(bounds.width() > 0) || !(bounds.height() > 0))
        throw std::invalid_argument("build_rect_mesh: degenerate bounds");

    Mesh m;
    m.bounds = bounds;
    const int npx = nx + 1, npy = ny + 1;
    m.vertices.reserve(static_cast<std::size_t>(npx) * npy);
    for (int j = 0; j < npy; ++j) {
        for (int i = 0; i < npx; ++i) {
            // exact endpoints so boundary coordinates compare bit-identically
            double x = (i == nx) ? bounds.xmax : bounds.xmin + bounds.width() * i / nx;
            double y = (j == ny) ? bounds.ymax : bounds.ymin + bounds.height() * j / ny;
            m.vertices.push_back({x, y});
        }
    }
    auto vid = [npx](int i, int j) { return j * npx + i; };

    m.triangles.reserve(2u * nx * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            int v00 = vid(i, j), v10 = vid(i + 1, j);
            int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            if ((i + j) % 2 == 0) {
                // diagonal v00-v11
                m.triangles.push_back({v00, v10, v11});
                m.triangles.push_back({v00, v11, v01});
            } else {
                // diagonal v10-v01
                m.triangles.push_back({v00, v10, v01});
                m.triangles.push_back({v10, v11, v01});
            }
        }
    }
    m.element_region.assign(m.triangles.size(), 0);

    // Boundary edges: triangle edges that occur exactly once, kept in the
    // triangle's own (counterclockwise) orientation.
    std::map<std::pair<int, int>, std::pair<int, int>> once; // sorted pair -> oriented pair
    for (const auto& tr : m.triangles) {
        for (int k = 0; k < 3; ++k) {
            int a = tr[k], b = tr[(k + 1) % 3];
            std::pair<int, int> key{std::min(a, b), std::max(a, b)};
            auto it = once.find(key);
            if (it == once.end())
                once.emplace(key, std::make_pair(a, b));
            else
                once.erase(it);
        }
    }
    for (const auto& [key, oriented] : once) {
        BoundaryEdge e;
        e.a = oriented.first;
        e.b = oriented.second;
        Vec2 d = m.vertices[e.b] - m.vertices[e.a];
        double len = norm(d);
        e.normal = {d.y / len, -d.x / len};
        m.boundary_edges.push_back(e);
    }
    return m;
}

Mesh mark_region(const Mesh& mesh, const InclusionSpec& spec) {
    Mesh out = mesh;
    out.region_warning = false;
    int tagged = 0;
    for (std::size_t t = 0; t < out.triangles.size(); ++t) {
        bool in = spec.contains(out.barycenter(static_cast<int>(t)));
        out.element_region[t] = in ? 1 : 0;
        tagged += in ? 1 : 0;
    }
    if (tagged == 0) out.region_warning = true;
    return out;
}

namespace {

double coverage_recurse(const InclusionSpec& spec, Vec2 a, Vec2 b, Vec2 c, int depth) {
    bool ia = spec.contains(a), ib = spec.contains(b), ic = spec.contains(c);
    Vec2 g = (1.0 / 3.0) * (a + b + c);
    bool ig = spec.contains(g);
    if (depth == 0) return ig ? 1.0 : 0.0;
    if (ia && ib && ic && ig) return 1.0;
    if (!ia && !ib && !ic && !ig) {
        // the region may still poke into the triangle interior; only recurse
        // when a primitive's bounding box overlaps the triangle's
        Vec2 lo{std::min({a.x, b.x, c.x}), std::min({a.y, b.y, c.y})};
        Vec2 hi{std::max({a.x, b.x, c.x}), std::max({a.y, b.y, c.y})};
        bool possible = false;
        for (const auto& s : spec.shapes) {
            Vec2 ctr;
            double reach;
            if (std::holds_alternative<Disc>(s)) {
                ctr = std::get<Disc>(s).center;
                reach = std::get<Disc>(s).radius;
            } else {
                ctr = std::get<Square>(s).center;
                reach = std::get<Square>(s).half_width * 1.4142135623730951;
            }
            if (!(ctr.x + reach < lo.x || ctr.x - reach > hi.x || ctr.y + reach < lo.y ||
                  ctr.y - reach > hi.y)) {
                possible = true;
                break;
            }
        }
        if (!possible) return 0.0;
    }
    Vec2 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
    return 0.25 * (coverage_recurse(spec, a, ab, ca, depth - 1) +
                   coverage_recurse(spec, ab, b, bc, depth - 1) +
                   coverage_recurse(spec, ca, bc, c, depth - 1) +
                   coverage_recurse(spec, ab, bc, ca, depth - 1));
}

} // namespace

std::vector<double> element_coverage(const Mesh& mesh, const InclusionSpec& spec, int max_depth) {
    std::vector<double> frac(mesh.triangles.size(), 0.0);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tr = mesh.triangles[t];
        frac[t] = coverage_recurse(spec, mesh.vertices[tr[0]], mesh.vertices[tr[1]],
                                   mesh.vertices[tr[2]], max_depth);
    }
    return frac;
}

Mesh deform_mesh(const Mesh& mesh, const VectorField& theta, double t) {
    if (theta.values.size() != mesh.vertices.size())
        throw MeshMismatch("deform_mesh: field size does not match vertex count");
    Mesh out = mesh;
    for (std::size_t i = 0; i < out.vertices.size(); ++i)
        out.vertices[i] = out.vertices[i] + t * theta.values[i];
    for (std::size_t k = 0; k < out.triangles.size(); ++k) {
        double a0 = mesh.triangle_area(static_cast<int>(k));
        double a1 = out.triangle_area(static_cast<int>(k));
        if (a1 <= 1e-3 * a0)
            throw InvertedElement("deform_mesh: triangle " + std::to_string(k) +
                                  " area fell below the quality floor");
    }
    // boundary normals are geometric, recompute after movement
    for (auto& e : out.boundary_edges) {
        Vec2 d = out.vertices[e.b] - out.vertices[e.a];
        double len = norm(d);
        e.normal = {d.y / len, -d.x / len};
    }
    return out;
}

double min_triangle_quality(const Mesh& mesh) {
    double q = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tr = mesh.triangles[t];
        Vec2 A = mesh.vertices[tr[0]], B = mesh.vertices[tr[1]], C = mesh.vertices[tr[2]];
        double a = dist(B, C), b = dist(C, A), c = dist(A, B);
        double area = triangle_signed_area(A, B, C);
        double s = 0.5 * (a + b + c);
        double inr = area / s;
        double circ = a * b * c / (4.0 * area);
        q = std::min(q, 2.0 * inr / circ); // = 1 for equilateral
    }
    return q;
}

double Interface::length() const {
    double L = 0;
    for (double l : edge_lengths) L += l;
    return L;
}

Interface extract_interface(const Mesh& mesh) {
    // edge (sorted pair) -> (inside count, outside count, oriented-from-inside pair)
    std::map<std::pair<int, int>, std::array<int, 2>> side;
    std::map<std::pair<int, int>, std::pair<int, int>> inside_orient;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tr = mesh.triangles[t];
        bool in = mesh.element_region[t] != 0;
        for (int k = 0; k < 3; ++k) {
            int a = tr[k], b = tr[(k + 1) % 3];
            std::pair<int, int> key{std::min(a, b), std::max(a, b)};
            side[key][in ? 0 : 1] += 1;
            if (in) inside_orient[key] = {a, b};
        }
    }
    Interface itf;
    std::set<int> node_set;
    for (const auto& [key, cnt] : side) {
        if (cnt[0] == 1 && cnt[1] == 1) {
            auto [a, b] = inside_orient[key];
            itf.edges.push_back({a, b});
            Vec2 d = mesh.vertices[b] - mesh.vertices[a];
            double len = norm(d);
            // inside triangle is on the left of a->b, so (d.y,-d.x) points out of omega
            itf.edge_normals.push_back({d.y / len, -d.x / len});
            itf.edge_lengths.push_back(len);
            node_set.insert(a);
            node_set.insert(b);
        }
    }
    if (itf.edges.empty()) throw InterfaceNotResolved("extract_interface: no region boundary in mesh");

    itf.nodes.assign(node_set.begin(), node_set.end());
    std::map<int, Vec2> acc;
    for (std::size_t e = 0; e < itf.edges.size(); ++e) {
        for (int v : itf.edges[e]) {
            Vec2& n = acc[v];
            n = n + itf.edge_lengths[e] * itf.edge_normals[e];
        }
    }
    itf.node_normals.reserve(itf.nodes.size());
    for (int v : itf.nodes) {
        Vec2 n = acc[v];
        double len = norm(n);
        itf.node_normals.push_back(len > 0 ? (1.0 / len) * n : Vec2{0, 0});
    }
    return itf;
}

} // namespace ccbm
