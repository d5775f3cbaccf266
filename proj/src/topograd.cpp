#include "ccbm/topograd.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "ccbm/errors.hpp"

namespace ccbm {

namespace {
// calibrated once against the centered r = 0.1 reference disc and frozen
constexpr double kRadiusCalibration = 0.1;
} // namespace

TopoField topo_gradient_field(const ComplexField& u, const ComplexField& v) {
    if (u.re.size() != v.re.size() || u.degree != v.degree)
        throw MeshMismatch("topo_gradient_field: fields live on different spaces");
    TopoField f;
    f.values = u.im.cwiseProduct(v.re) - u.re.cwiseProduct(v.im);
    f.min_value = f.values.minCoeff(&f.argmin_node);
    f.max_value = f.values.maxCoeff();
    return f;
}

std::vector<double> iso_levels(const TopoField& field, int n_levels) {
    if (n_levels < 2) throw std::invalid_argument("iso_levels: need at least 2 levels");
    std::vector<double> levels(n_levels);
    for (int k = 0; k < n_levels; ++k)
        levels[k] = field.min_value + (field.max_value - field.min_value) * k / (n_levels - 1);
    return levels;
}

std::vector<std::vector<int>> extract_basins(const TopoField& field, const Mesh& mesh,
                                             const std::vector<int>& minima_nodes,
                                             const std::vector<double>& levels) {
    auto adj = mesh.vertex_adjacency();
    std::vector<std::vector<int>> basins;
    basins.reserve(minima_nodes.size());
    for (int m : minima_nodes) {
        double v = field.values[m];
        // first level strictly above the minimum value
        double cap = field.max_value;
        for (double L : levels)
            if (L > v) {
                cap = L;
                break;
            }
        // flood fill below the cap
        std::vector<int> basin;
        std::set<int> seen{m};
        std::deque<int> queue{m};
        while (!queue.empty()) {
            int n = queue.front();
            queue.pop_front();
            basin.push_back(n);
            for (int nb : adj[n])
                if (!seen.count(nb) && field.values[nb] < cap) {
                    seen.insert(nb);
                    queue.push_back(nb);
                }
        }
        std::sort(basin.begin(), basin.end());
        basins.push_back(std::move(basin));
    }
    return basins;
}

namespace {

// rings of nodes at exact hop distances 1..depth
std::vector<std::vector<int>> hop_rings(const std::vector<std::vector<int>>& adj, int start,
                                        int depth) {
    std::vector<std::vector<int>> rings(depth);
    std::set<int> seen{start};
    std::vector<int> frontier{start};
    for (int d = 0; d < depth; ++d) {
        std::vector<int> next;
        for (int n : frontier)
            for (int nb : adj[n])
                if (seen.insert(nb).second) next.push_back(nb);
        rings[d] = next;
        frontier = std::move(next);
    }
    return rings;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

} // namespace

std::vector<TopoMinimum> find_local_minima(const TopoField& field, const Mesh& mesh, int ring_depth,
                                           int n_levels, double boundary_margin) {
    if (ring_depth < 1) throw std::invalid_argument("find_local_minima: ring_depth must be >= 1");
    if (boundary_margin < 0)
        boundary_margin =
            kBoundaryMarginFrac * std::min(mesh.bounds.width(), mesh.bounds.height());
    auto adj = mesh.vertex_adjacency();
    const int nv = static_cast<int>(mesh.vertices.size());

    std::vector<int> candidates;
    for (int n = 0; n < nv; ++n) {
        double v = field.values[n];
        if (!(v < 0)) continue;
        if (mesh.bounds.side_distance(mesh.vertices[n]) <= boundary_margin) continue;
        auto rings = hop_rings(adj, n, ring_depth);
        bool ok = true;
        double prev_min = v;
        for (const auto& ring : rings) {
            if (ring.empty()) {
                ok = false; // the neighborhood ran off the mesh
                break;
            }
            double ring_min = std::numeric_limits<double>::infinity();
            for (int m : ring) {
                if (!(field.values[m] > v)) {
                    ok = false;
                    break;
                }
                ring_min = std::min(ring_min, field.values[m]);
            }
            if (!ok) break;
            if (!(ring_min > prev_min)) {
                ok = false; // ring minima must increase strictly outward
                break;
            }
            prev_min = ring_min;
        }
        if (ok) candidates.push_back(n);
    }
    if (candidates.empty()) return {};

    auto levels = iso_levels(field, n_levels);
    auto basins = extract_basins(field, mesh, candidates, levels);

    // union-find over activated nodes: candidates sharing a basin merge
    UnionFind uf(static_cast<int>(candidates.size()));
    std::vector<int> owner(nv, -1);
    for (std::size_t c = 0; c < candidates.size(); ++c)
        for (int n : basins[c]) {
            if (owner[n] >= 0)
                uf.unite(static_cast<int>(c), owner[n]);
            else
                owner[n] = static_cast<int>(c);
        }

    std::map<int, TopoMinimum> groups;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        int root = uf.find(static_cast<int>(c));
        auto& g = groups[root];
        if (g.node < 0 || field.values[candidates[c]] < g.value) {
            g.node = candidates[c];
            g.value = field.values[candidates[c]];
        }
        std::vector<int> merged;
        std::set_union(g.basin.begin(), g.basin.end(), basins[c].begin(), basins[c].end(),
                       std::back_inserter(merged));
        g.basin = std::move(merged);
    }

    std::vector<TopoMinimum> out;
    out.reserve(groups.size());
    for (auto& [root, g] : groups) out.push_back(std::move(g));
    std::sort(out.begin(), out.end(),
              [](const TopoMinimum& a, const TopoMinimum& b) { return a.value < b.value; });
    return out;
}

CenterRadius estimate_center_radius(const std::vector<TopoMinimum>& minima, const TopoField& field,
                                    const Mesh& mesh) {
    if (minima.empty()) throw NoMinima("estimate_center_radius: no minima");
    Vec2 c{0, 0};
    for (const auto& m : minima) c = c + mesh.vertices[m.node];
    c = (1.0 / static_cast<double>(minima.size())) * c;

    double depth = -minima.front().value; // deepest (list is sorted by value)
    for (const auto& m : minima) depth = std::max(depth, -m.value);
    double range = field.max_value - field.min_value;
    double radius = range > 0 ? kRadiusCalibration * depth / range : 0.0;
    return {c, radius};
}

OneShotOutput one_shot_detect(const Mesh& inverse_mesh, const CauchyData& data, double beta,
                              int ring_depth, int n_levels) {
    FeSpace space(inverse_mesh, 1);
    BlockSystem sys(space, {}, beta); // mu = 0: empty starting configuration
    OneShotOutput out;
    out.state = solve_state(sys, space, data);
    out.adjoint = solve_topo_adjoint(sys, space, out.state.im);
    out.field = topo_gradient_field(out.state, out.adjoint);

    // self-consistent data keeps the misfit at roundoff level; the residual
    // field then carries no contact information at all
    double J = out.state.im.dot(sys.mass() * out.state.im);
    double scale = out.state.re.dot(sys.mass() * out.state.re);
    if (!(out.field.min_value < 0) || J <= 1e-16 * scale)
        throw NoNegativeMinimum("one_shot_detect: no negative gradient, no contact indicated");

    out.detection.minima = find_local_minima(out.field, inverse_mesh, ring_depth, n_levels);
    if (out.detection.minima.empty()) {
        // negative values but no strict ring minimum: fall back to the
        // deepest admissible (interior) node
        double margin =
            kBoundaryMarginFrac * std::min(inverse_mesh.bounds.width(), inverse_mesh.bounds.height());
        TopoMinimum m;
        for (std::size_t n = 0; n < inverse_mesh.vertices.size(); ++n) {
            if (inverse_mesh.bounds.side_distance(inverse_mesh.vertices[n]) <= margin) continue;
            if (m.node < 0 || out.field.values[static_cast<Eigen::Index>(n)] < m.value) {
                m.node = static_cast<int>(n);
                m.value = out.field.values[static_cast<Eigen::Index>(n)];
            }
        }
        if (m.node < 0 || !(m.value < 0))
            throw NoNegativeMinimum("one_shot_detect: no admissible negative minimum");
        auto levels = iso_levels(out.field, n_levels);
        m.basin = extract_basins(out.field, inverse_mesh, {m.node}, levels).front();
        out.detection.minima.push_back(std::move(m));
    }
    out.detection.iso_levels = iso_levels(out.field, n_levels);
    auto cr = estimate_center_radius(out.detection.minima, out.field, inverse_mesh);
    out.detection.center = cr.center;
    out.detection.radius = cr.radius;
    return out;
}

} // namespace ccbm
