#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "ccbm/errors.hpp"
#include "ccbm/io.hpp"
#include "ccbm/mesh.hpp"

using namespace ccbm;

namespace {
const Rect kUnit{-0.5, -0.5, 0.5, 0.5};
}

TEST_CASE("structured counts") {
    Mesh m = build_rect_mesh(2, 2, kUnit);
    CHECK(m.vertices.size() == 9);
    CHECK(m.triangles.size() == 8);

    Mesh big = build_rect_mesh(100, 100, kUnit);
    CHECK(big.vertices.size() == 10201);
    CHECK(big.triangles.size() == 20000);

    Mesh tiny = build_rect_mesh(1, 1, Rect{0, 0, 1, 1});
    CHECK(tiny.triangles.size() == 2);
    CHECK(tiny.boundary_edges.size() == 4);
}

TEST_CASE("rejects degenerate meshes") {
    CHECK_THROWS_AS(build_rect_mesh(0, 2, kUnit), std::invalid_argument);
    CHECK_THROWS_AS(build_rect_mesh(2, 0, kUnit), std::invalid_argument);
}

TEST_CASE("positive orientation and area conservation") {
    for (int n : {3, 8, 31}) {
        Mesh m = build_rect_mesh(n, n, kUnit);
        for (std::size_t t = 0; t < m.triangles.size(); ++t)
            CHECK(m.triangle_area(static_cast<int>(t)) > 0);
        CHECK(m.total_area() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("boundary edges close a loop with outward normals") {
    Mesh m = build_rect_mesh(5, 7, kUnit);
    CHECK(m.boundary_edges.size() == 2 * (5 + 7));
    std::map<int, int> out_deg, in_deg;
    for (const auto& e : m.boundary_edges) {
        out_deg[e.a]++;
        in_deg[e.b]++;
        Vec2 mid = 0.5 * (m.vertices[e.a] + m.vertices[e.b]);
        // outward normal points away from the domain center
        CHECK(dot(e.normal, mid) > 0);
    }
    for (const auto& [v, d] : out_deg) {
        CHECK(d == 1);
        CHECK(in_deg[v] == 1);
    }
}

TEST_CASE("reflection symmetry of the alternating split") {
    // even subdivision on centered bounds: vertex set and connectivity are
    // invariant under x -> -x and y -> -y
    const int n = 6;
    Mesh m = build_rect_mesh(n, n, kUnit);
    auto vindex = [&](Vec2 p) {
        for (std::size_t i = 0; i < m.vertices.size(); ++i)
            if (dist(m.vertices[i], p) < 1e-12) return static_cast<int>(i);
        return -1;
    };
    std::set<std::set<int>> tris;
    for (const auto& t : m.triangles) tris.insert({t[0], t[1], t[2]});

    for (auto flip : {+1, -1}) {
        for (const auto& t : m.triangles) {
            std::set<int> mapped;
            for (int k = 0; k < 3; ++k) {
                Vec2 p = m.vertices[t[k]];
                Vec2 q = flip == 1 ? Vec2{-p.x, p.y} : Vec2{p.x, -p.y};
                int idx = vindex(q);
                REQUIRE(idx >= 0);
                mapped.insert(idx);
            }
            CHECK(tris.count(mapped) == 1);
        }
    }
}

TEST_CASE("inclusion spec validation") {
    CHECK_THROWS_AS(make_inclusion_spec({Disc{{0, 0}, 0.6}}, 10.0, kUnit), std::invalid_argument);
    CHECK_THROWS_AS(make_inclusion_spec({Disc{{0.45, 0}, 0.1}}, 10.0, kUnit), std::invalid_argument);
    CHECK_THROWS_AS(make_inclusion_spec({Disc{{0, 0}, 0.1}}, -1.0, kUnit), std::invalid_argument);
    CHECK_THROWS_AS(make_inclusion_spec({}, 10.0, kUnit), std::invalid_argument);
    CHECK_NOTHROW(make_inclusion_spec({Disc{{0, 0}, 0.1}, Square{{0.3, 0.3}, 0.05}}, 10.0, kUnit));
}

TEST_CASE("mark_region tags the disc area to 5%") {
    Mesh m = build_rect_mesh(100, 100, kUnit);
    InclusionSpec spec = make_inclusion_spec({Disc{{0, 0}, 0.1}}, 10.0, kUnit);
    Mesh marked = mark_region(m, spec);
    CHECK_FALSE(marked.region_warning);
    double area = marked.region_area();
    double exact = M_PI * 0.01;
    CHECK(std::abs(area - exact) / exact < 0.05);
    // idempotent
    Mesh again = mark_region(marked, spec);
    CHECK(again.element_region == marked.element_region);
}

TEST_CASE("mark_region with no covered barycenter warns") {
    Mesh m = build_rect_mesh(4, 4, kUnit);
    // tiny disc hiding between barycenters
    InclusionSpec spec = make_inclusion_spec({Disc{{0.0, 0.0}, 0.001}}, 10.0, kUnit);
    Mesh marked = mark_region(m, spec);
    CHECK(marked.region_warning);
    CHECK(marked.region_area() == 0.0);
}

TEST_CASE("element_coverage resolves sub-cell discs") {
    Mesh m = build_rect_mesh(20, 20, kUnit);
    InclusionSpec spec = make_inclusion_spec({Disc{{0.1, 0.07}, 0.03}}, 10.0, kUnit);
    auto frac = element_coverage(m, spec);
    double area = 0;
    for (std::size_t t = 0; t < frac.size(); ++t)
        area += frac[t] * m.triangle_area(static_cast<int>(t));
    double exact = M_PI * 0.03 * 0.03;
    CHECK(std::abs(area - exact) / exact < 0.01);
}

TEST_CASE("deform_mesh identity and translation") {
    Mesh m = build_rect_mesh(8, 8, kUnit);
    VectorField zero{std::vector<Vec2>(m.vertices.size(), Vec2{0, 0})};
    Mesh same = deform_mesh(m, zero, 3.7);
    for (std::size_t i = 0; i < m.vertices.size(); ++i) {
        CHECK(same.vertices[i].x == m.vertices[i].x);
        CHECK(same.vertices[i].y == m.vertices[i].y);
    }

    // interior bump: boundary fixed, areas preserved to O(t)
    VectorField theta{std::vector<Vec2>(m.vertices.size(), Vec2{0, 0})};
    auto bmask = m.boundary_vertex_mask();
    for (std::size_t i = 0; i < m.vertices.size(); ++i)
        if (!bmask[i]) theta.values[i] = {0.01, -0.02};
    double t = 0.05;
    Mesh moved = deform_mesh(m, theta, t);
    CHECK(moved.total_area() == doctest::Approx(m.total_area()).epsilon(1e-12));
    for (std::size_t i = 0; i < m.vertices.size(); ++i)
        if (bmask[i]) CHECK(moved.vertices[i].x == m.vertices[i].x);
}

TEST_CASE("deform_mesh detects collapsing triangles") {
    Mesh m = build_rect_mesh(2, 2, kUnit);
    VectorField theta{std::vector<Vec2>(m.vertices.size(), Vec2{0, 0})};
    // drag the center vertex across the domain
    for (std::size_t i = 0; i < m.vertices.size(); ++i)
        if (norm(m.vertices[i]) < 1e-12) theta.values[i] = {1.0, 1.0};
    CHECK_THROWS_AS(deform_mesh(m, theta, 1.0), InvertedElement);
}

TEST_CASE("min_triangle_quality") {
    // single equilateral triangle
    Mesh eq;
    eq.bounds = Rect{0, 0, 1, 1};
    eq.vertices = {{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}};
    eq.triangles = {{0, 1, 2}};
    eq.element_region = {0};
    CHECK(min_triangle_quality(eq) == doctest::Approx(1.0).epsilon(1e-12));

    // structured right triangles: identical quality in (0,1)
    Mesh m = build_rect_mesh(4, 4, kUnit);
    double q = min_triangle_quality(m);
    CHECK(q > 0);
    CHECK(q < 1);

    // shearing reduces quality
    VectorField theta{std::vector<Vec2>(m.vertices.size(), Vec2{0, 0})};
    auto bmask = m.boundary_vertex_mask();
    for (std::size_t i = 0; i < m.vertices.size(); ++i)
        if (!bmask[i]) theta.values[i] = {0.3 * m.vertices[i].y, 0};
    Mesh sheared = deform_mesh(m, theta, 0.5);
    CHECK(min_triangle_quality(sheared) < q);
}

TEST_CASE("interface extraction on a marked disc") {
    Mesh m = build_rect_mesh(40, 40, kUnit);
    InclusionSpec spec = make_inclusion_spec({Disc{{0, 0}, 0.2}}, 10.0, kUnit);
    Mesh marked = mark_region(m, spec);
    Interface itf = extract_interface(marked);
    CHECK(itf.edges.size() > 10);
    // perimeter of the staircase polygon is within a factor of the circle's
    CHECK(itf.length() > 2 * M_PI * 0.2 * 0.8);
    CHECK(itf.length() < 2 * M_PI * 0.2 * 1.6);
    // normals point away from the center
    for (std::size_t e = 0; e < itf.edges.size(); ++e) {
        Vec2 mid = 0.5 * (marked.vertices[itf.edges[e][0]] + marked.vertices[itf.edges[e][1]]);
        CHECK(dot(itf.edge_normals[e], mid) > 0);
    }
    CHECK_THROWS_AS(extract_interface(m), InterfaceNotResolved);
}

TEST_CASE("mesh text round trip") {
    Mesh m = build_rect_mesh(7, 5, kUnit);
    InclusionSpec spec = make_inclusion_spec({Disc{{0.1, -0.1}, 0.15}}, 10.0, kUnit);
    m = mark_region(m, spec);
    auto path = std::filesystem::temp_directory_path() / "ccbm_mesh_roundtrip.txt";
    write_mesh_text(m, path);
    Mesh r = read_mesh_text(path);
    REQUIRE(r.vertices.size() == m.vertices.size());
    REQUIRE(r.triangles.size() == m.triangles.size());
    for (std::size_t i = 0; i < m.vertices.size(); ++i)
        CHECK(dist(r.vertices[i], m.vertices[i]) == 0.0);
    CHECK(r.element_region == m.element_region);
    CHECK(r.boundary_edges.size() == m.boundary_edges.size());
    std::filesystem::remove(path);
}
