#include "ccbm/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ccbm/errors.hpp"

namespace ccbm {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_mesh_text(const Mesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("write_mesh_text: cannot open " + path.string());
    out << "vertices " << mesh.vertices.size() << " triangles " << mesh.triangles.size() << "\n";
    for (const auto& v : mesh.vertices) out << format_double(v.x) << " " << format_double(v.y) << "\n";
    for (const auto& t : mesh.triangles) out << t[0] << " " << t[1] << " " << t[2] << "\n";
    bool any_region = false;
    for (auto r : mesh.element_region) any_region |= (r != 0);
    if (any_region) {
        out << "regions\n";
        for (auto r : mesh.element_region) out << static_cast<int>(r) << "\n";
    }
}

Mesh read_mesh_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("read_mesh_text: cannot open " + path.string());
    std::string kw1, kw2;
    std::size_t nv = 0, nt = 0;
    in >> kw1 >> nv >> kw2 >> nt;
    if (kw1 != "vertices" || kw2 != "triangles")
        throw Error("read_mesh_text: bad header in " + path.string());
    Mesh m;
    m.vertices.resize(nv);
    Rect b{1e300, 1e300, -1e300, -1e300};
    for (auto& v : m.vertices) {
        in >> v.x >> v.y;
        b.xmin = std::min(b.xmin, v.x);
        b.ymin = std::min(b.ymin, v.y);
        b.xmax = std::max(b.xmax, v.x);
        b.ymax = std::max(b.ymax, v.y);
    }
    m.bounds = b;
    m.triangles.resize(nt);
    for (auto& t : m.triangles) in >> t[0] >> t[1] >> t[2];
    if (!in) throw Error("read_mesh_text: truncated file " + path.string());
    m.element_region.assign(nt, 0);
    std::string kw3;
    if (in >> kw3 && kw3 == "regions") {
        for (auto& r : m.element_region) {
            int x = 0;
            in >> x;
            r = static_cast<std::uint8_t>(x);
        }
    }
    for (std::size_t t = 0; t < nt; ++t)
        for (int k = 0; k < 3; ++k)
            if (m.triangles[t][k] < 0 || m.triangles[t][k] >= static_cast<int>(nv))
                throw Error("read_mesh_text: vertex index out of range");

    // rebuild boundary edges
    std::map<std::pair<int, int>, std::pair<int, int>> once;
    for (const auto& tr : m.triangles) {
        for (int k = 0; k < 3; ++k) {
            int a = tr[k], b2 = tr[(k + 1) % 3];
            std::pair<int, int> key{std::min(a, b2), std::max(a, b2)};
            auto it = once.find(key);
            if (it == once.end())
                once.emplace(key, std::make_pair(a, b2));
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

void write_mesh_vtk(const Mesh& mesh, const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, Vec>>& point_data) {
    std::ofstream out(path);
    if (!out) throw Error("write_mesh_vtk: cannot open " + path.string());
    out << "# vtk DataFile Version 3.0\nccbm field\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.vertices.size() << " double\n";
    for (const auto& v : mesh.vertices)
        out << format_double(v.x) << " " << format_double(v.y) << " 0\n";
    out << "CELLS " << mesh.triangles.size() << " " << 4 * mesh.triangles.size() << "\n";
    for (const auto& t : mesh.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    out << "CELL_TYPES " << mesh.triangles.size() << "\n";
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) out << "5\n";
    if (!point_data.empty()) {
        out << "POINT_DATA " << mesh.vertices.size() << "\n";
        for (const auto& [name, values] : point_data) {
            out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
            for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
                out << format_double(values[static_cast<Eigen::Index>(i)]) << "\n";
        }
    }
}

void write_field_csv(const FeSpace& space, const ComplexField& u,
                     const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("write_field_csv: cannot open " + path.string());
    out << "node,x,y,re,im\n";
    for (int k = 0; k < space.num_nodes(); ++k)
        out << k << "," << format_double(space.nodes()[k].x) << "," << format_double(space.nodes()[k].y)
            << "," << format_double(u.re[k]) << "," << format_double(u.im[k]) << "\n";
}

void write_cauchy_csv(const FeSpace& space, const CauchyData& data,
                      const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("write_cauchy_csv: cannot open " + path.string());
    out << "s,x,y,g,f\n";
    const auto& bn = space.boundary_nodes();
    for (std::size_t i = 0; i < bn.size(); ++i) {
        Vec2 p = space.nodes()[bn[i]];
        out << format_double(space.boundary_arclen()[i]) << "," << format_double(p.x) << ","
            << format_double(p.y) << "," << format_double(data.g[static_cast<Eigen::Index>(i)])
            << "," << format_double(data.f[static_cast<Eigen::Index>(i)]) << "\n";
    }
}

void write_confidence_csv(const ConfidenceMap& map, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("write_confidence_csv: cannot open " + path.string());
    out << "x,y,mean,std,ci_lo,ci_hi,reject,red\n";
    for (std::size_t p = 0; p < map.grid.points.size(); ++p) {
        auto i = static_cast<Eigen::Index>(p);
        out << format_double(map.grid.points[p].x) << "," << format_double(map.grid.points[p].y)
            << "," << format_double(map.mean[i]) << "," << format_double(map.stdev[i]) << ","
            << format_double(map.ci_lower[i]) << "," << format_double(map.ci_upper[i]) << ","
            << int(map.reject_h0[p]) << "," << int(map.red_zone[p]) << "\n";
    }
}

void write_convergence_csv(const ConvergenceSeries& series, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("write_convergence_csv: cannot open " + path.string());
    out << "n,err\n";
    for (std::size_t k = 0; k < series.n.size(); ++k)
        out << series.n[k] << "," << format_double(series.err[k]) << "\n";
}

void write_history_csv(const ShapeOptHistory& hist, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("write_history_csv: cannot open " + path.string());
    out << "iter,J,t,grad_norm,quality\n";
    out << 0 << "," << format_double(hist.J_initial) << ",0,0,0\n";
    for (std::size_t k = 0; k < hist.iterates.size(); ++k) {
        const auto& it = hist.iterates[k];
        out << (k + 1) << "," << format_double(it.J) << "," << format_double(it.step) << ","
            << format_double(it.grad_norm) << "," << format_double(it.quality) << "\n";
    }
}

std::vector<std::vector<int>> interface_loops(const Interface& itf) {
    std::map<int, std::vector<std::pair<int, std::size_t>>> next; // a -> [(b, edge)]
    for (std::size_t e = 0; e < itf.edges.size(); ++e)
        next[itf.edges[e][0]].push_back({itf.edges[e][1], e});
    std::set<std::size_t> used;
    std::vector<std::vector<int>> loops;
    for (std::size_t e0 = 0; e0 < itf.edges.size(); ++e0) {
        if (used.count(e0)) continue;
        std::vector<int> loop;
        int start = itf.edges[e0][0];
        int v = start;
        std::size_t guard = 0;
        while (guard++ <= itf.edges.size()) {
            loop.push_back(v);
            auto& outs = next[v];
            bool advanced = false;
            for (auto& [b, e] : outs) {
                if (!used.count(e)) {
                    used.insert(e);
                    v = b;
                    advanced = true;
                    break;
                }
            }
            if (!advanced || v == start) break;
        }
        if (loop.size() >= 3) loops.push_back(std::move(loop));
    }
    return loops;
}

void write_interface_csv(const Interface& itf, const Mesh& mesh,
                         const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("write_interface_csv: cannot open " + path.string());
    out << "loop,x,y\n";
    auto loops = interface_loops(itf);
    for (std::size_t l = 0; l < loops.size(); ++l) {
        for (int v : loops[l])
            out << l << "," << format_double(mesh.vertices[v].x) << ","
                << format_double(mesh.vertices[v].y) << "\n";
        // repeat the first vertex so each loop closes
        out << l << "," << format_double(mesh.vertices[loops[l][0]].x) << ","
            << format_double(mesh.vertices[loops[l][0]].y) << "\n";
    }
}

void write_detection_json(const DetectionResult& det, const Mesh& mesh,
                          const std::filesystem::path& path) {
    ordered_json j;
    j["center"] = {det.center.x, det.center.y};
    j["radius"] = det.radius;
    j["minima"] = ordered_json::array();
    for (const auto& m : det.minima) {
        ordered_json jm;
        jm["node"] = m.node;
        jm["x"] = mesh.vertices[m.node].x;
        jm["y"] = mesh.vertices[m.node].y;
        jm["value"] = m.value;
        jm["basin_size"] = m.basin.size();
        j["minima"].push_back(jm);
    }
    j["iso_levels"] = det.iso_levels;
    std::ofstream out(path);
    if (!out) throw Error("write_detection_json: cannot open " + path.string());
    out << j.dump(2) << "\n";
}

void write_confidence_json(const ConfidenceMap& map, const std::filesystem::path& path) {
    ordered_json j;
    j["alpha"] = map.alpha;
    j["n_mc"] = map.n_mc;
    j["n_scan"] = map.grid.n_scan;
    j["sigma"] = map.grid.sigma;
    int n_rej = 0, n_red = 0;
    double cx = 0, cy = 0;
    for (std::size_t p = 0; p < map.reject_h0.size(); ++p) {
        n_rej += map.reject_h0[p];
        if (map.red_zone[p]) {
            ++n_red;
            cx += map.grid.points[p].x;
            cy += map.grid.points[p].y;
        }
    }
    j["rejected"] = n_rej;
    j["red_zone"] = n_red;
    if (n_red > 0) j["red_zone_centroid"] = {cx / n_red, cy / n_red};
    std::ofstream out(path);
    if (!out) throw Error("write_confidence_json: cannot open " + path.string());
    out << j.dump(2) << "\n";
}

// --- SVG helpers ---------------------------------------------------------------

namespace {

struct SvgCanvas {
    std::ostringstream body;
    Rect bounds;
    double size = 720;

    double sx(double x) const { return (x - bounds.xmin) / bounds.width() * size; }
    double sy(double y) const { return (bounds.ymax - y) / bounds.height() * size; }

    std::string finish() const {
        std::ostringstream out;
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\""
            << size << "\" viewBox=\"0 0 " << size << " " << size << "\">\n"
            << body.str() << "</svg>\n";
        return out.str();
    }
};

std::string heat_color(double t) {
    // blue (low) -> white -> red (high)
    t = std::clamp(t, 0.0, 1.0);
    int r, g, b;
    if (t < 0.5) {
        double u = t / 0.5;
        r = static_cast<int>(40 + 215 * u);
        g = static_cast<int>(60 + 195 * u);
        b = 255;
    } else {
        double u = (t - 0.5) / 0.5;
        r = 255;
        g = static_cast<int>(255 - 195 * u);
        b = static_cast<int>(255 - 215 * u);
    }
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

void fill_triangles(SvgCanvas& svg, const Mesh& mesh, const Vec& nodal, double lo, double hi) {
    double span = hi - lo;
    if (span <= 0) span = 1;
    for (const auto& t : mesh.triangles) {
        double v = (nodal[t[0]] + nodal[t[1]] + nodal[t[2]]) / 3.0;
        svg.body << "<polygon points=\"";
        for (int k = 0; k < 3; ++k)
            svg.body << svg.sx(mesh.vertices[t[k]].x) << "," << svg.sy(mesh.vertices[t[k]].y)
                     << (k < 2 ? " " : "");
        svg.body << "\" fill=\"" << heat_color((v - lo) / span) << "\" stroke=\"none\"/>\n";
    }
}

void contour_lines(SvgCanvas& svg, const Mesh& mesh, const Vec& nodal, double level,
                   const std::string& color, double width) {
    for (const auto& t : mesh.triangles) {
        Vec2 pts[2];
        int np = 0;
        for (int k = 0; k < 3 && np < 2; ++k) {
            int a = t[k], b = t[(k + 1) % 3];
            double va = nodal[a] - level, vb = nodal[b] - level;
            if ((va < 0 && vb >= 0) || (vb < 0 && va >= 0)) {
                double w = va / (va - vb);
                pts[np++] = mesh.vertices[a] + w * (mesh.vertices[b] - mesh.vertices[a]);
            }
        }
        if (np == 2)
            svg.body << "<line x1=\"" << svg.sx(pts[0].x) << "\" y1=\"" << svg.sy(pts[0].y)
                     << "\" x2=\"" << svg.sx(pts[1].x) << "\" y2=\"" << svg.sy(pts[1].y)
                     << "\" stroke=\"" << color << "\" stroke-width=\"" << width << "\"/>\n";
    }
}

} // namespace

void write_topo_svg(const Mesh& mesh, const TopoField& field, const DetectionResult& det,
                    const std::filesystem::path& path) {
    SvgCanvas svg;
    svg.bounds = mesh.bounds;
    fill_triangles(svg, mesh, field.values, field.min_value, field.max_value);
    for (double L : det.iso_levels) contour_lines(svg, mesh, field.values, L, "#00000030", 0.6);
    // basins
    for (const auto& m : det.minima) {
        std::set<int> basin(m.basin.begin(), m.basin.end());
        for (const auto& t : mesh.triangles) {
            if (basin.count(t[0]) && basin.count(t[1]) && basin.count(t[2])) {
                svg.body << "<polygon points=\"";
                for (int k = 0; k < 3; ++k)
                    svg.body << svg.sx(mesh.vertices[t[k]].x) << "," << svg.sy(mesh.vertices[t[k]].y)
                             << (k < 2 ? " " : "");
                svg.body << "\" fill=\"#00ffff60\" stroke=\"none\"/>\n";
            }
        }
    }
    for (const auto& m : det.minima)
        svg.body << "<circle cx=\"" << svg.sx(mesh.vertices[m.node].x) << "\" cy=\""
                 << svg.sy(mesh.vertices[m.node].y)
                 << "\" r=\"4\" fill=\"magenta\" stroke=\"black\"/>\n";
    std::ofstream out(path);
    if (!out) throw Error("write_topo_svg: cannot open " + path.string());
    out << svg.finish();
}

void write_confidence_svg(const ConfidenceMap& map, const Rect& bounds,
                          const std::filesystem::path& path) {
    SvgCanvas svg;
    svg.bounds = bounds;
    double lo = map.mean.minCoeff(), hi = map.mean.maxCoeff();
    double half = 0.5 * map.grid.spacing;
    for (std::size_t p = 0; p < map.grid.points.size(); ++p) {
        Vec2 c = map.grid.points[p];
        double v = (map.mean[static_cast<Eigen::Index>(p)] - lo) / (hi - lo > 0 ? hi - lo : 1);
        svg.body << "<rect x=\"" << svg.sx(c.x - half) << "\" y=\"" << svg.sy(c.y + half)
                 << "\" width=\"" << 2 * half / bounds.width() * svg.size << "\" height=\""
                 << 2 * half / bounds.height() * svg.size << "\" fill=\"" << heat_color(v)
                 << "\"/>\n";
    }
    for (std::size_t p = 0; p < map.grid.points.size(); ++p) {
        if (!map.reject_h0[p]) continue;
        Vec2 c = map.grid.points[p];
        const char* color = map.red_zone[p] ? "#d40000" : "#74c8f0";
        svg.body << "<rect x=\"" << svg.sx(c.x - half) << "\" y=\"" << svg.sy(c.y + half)
                 << "\" width=\"" << 2 * half / bounds.width() * svg.size << "\" height=\""
                 << 2 * half / bounds.height() * svg.size << "\" fill=\"" << color
                 << "\" fill-opacity=\"0.85\" stroke=\"black\" stroke-width=\"0.4\"/>\n";
    }
    std::ofstream out(path);
    if (!out) throw Error("write_confidence_svg: cannot open " + path.string());
    out << svg.finish();
}

void write_overlay_svg(const Rect& bounds, const std::vector<InterfaceOverlay>& overlays,
                       const std::filesystem::path& path) {
    SvgCanvas svg;
    svg.bounds = bounds;
    svg.body << "<rect width=\"" << svg.size << "\" height=\"" << svg.size
             << "\" fill=\"white\"/>\n";
    for (const auto& ov : overlays) {
        auto loops = interface_loops(*ov.itf);
        for (const auto& loop : loops) {
            svg.body << "<polygon points=\"";
            for (std::size_t i = 0; i < loop.size(); ++i)
                svg.body << svg.sx(ov.mesh->vertices[loop[i]].x) << ","
                         << svg.sy(ov.mesh->vertices[loop[i]].y) << (i + 1 < loop.size() ? " " : "");
            svg.body << "\" fill=\"none\" stroke=\"" << ov.color << "\" stroke-width=\"1.6\"/>\n";
        }
    }
    std::ofstream out(path);
    if (!out) throw Error("write_overlay_svg: cannot open " + path.string());
    out << svg.finish();
}

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("fnv1a_file: cannot open " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (in.eof()) break;
    }
    return h;
}

} // namespace ccbm
