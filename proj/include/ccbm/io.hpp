#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ccbm/fem.hpp"
#include "ccbm/mesh.hpp"
#include "ccbm/shape.hpp"
#include "ccbm/stat.hpp"
#include "ccbm/topograd.hpp"

namespace ccbm {

// --- mesh text format ---------------------------------------------------------
// "vertices N triangles M" header, N coordinate lines, M index triples;
// an optional trailing "regions" block carries the element tags.
void write_mesh_text(const Mesh& mesh, const std::filesystem::path& path);
Mesh read_mesh_text(const std::filesystem::path& path);

// Legacy-VTK unstructured grid with optional point-data scalars (vertex part
// of the fields; P2 edge values are dropped in this view).
void write_mesh_vtk(const Mesh& mesh, const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, Vec>>& point_data = {});

// --- CSV ----------------------------------------------------------------------
// node index, x, y, re, im
void write_field_csv(const FeSpace& space, const ComplexField& u, const std::filesystem::path& path);
// arclength, x, y, g, f
void write_cauchy_csv(const FeSpace& space, const CauchyData& data, const std::filesystem::path& path);
// x, y, mean, std, ci_lo, ci_hi, reject, red
void write_confidence_csv(const ConfidenceMap& map, const std::filesystem::path& path);
// n, err
void write_convergence_csv(const ConvergenceSeries& series, const std::filesystem::path& path);
// iter, J, t, grad_norm, quality
void write_history_csv(const ShapeOptHistory& hist, const std::filesystem::path& path);
// closed polyline: ordered interface vertices (loop per component)
void write_interface_csv(const Interface& itf, const Mesh& mesh, const std::filesystem::path& path);

// --- JSON ---------------------------------------------------------------------
void write_detection_json(const DetectionResult& det, const Mesh& mesh,
                          const std::filesystem::path& path);
void write_confidence_json(const ConfidenceMap& map, const std::filesystem::path& path);

// --- SVG ----------------------------------------------------------------------
// Filled field map with iso-contours, basin fill and minima markers.
void write_topo_svg(const Mesh& mesh, const TopoField& field, const DetectionResult& det,
                    const std::filesystem::path& path);
// Confidence map: rejection cells shaded, red zone emphasized.
void write_confidence_svg(const ConfidenceMap& map, const Rect& bounds,
                          const std::filesystem::path& path);
// Interface overlay: initial / truth / final polylines.
struct InterfaceOverlay {
    const Interface* itf;
    const Mesh* mesh;
    std::string color;
};
void write_overlay_svg(const Rect& bounds, const std::vector<InterfaceOverlay>& overlays,
                       const std::filesystem::path& path);

// --- misc ---------------------------------------------------------------------
std::uint64_t fnv1a_file(const std::filesystem::path& path);
std::string format_double(double v); // shortest round-trip-stable text

// Orders interface edges into closed loops of vertex indices.
std::vector<std::vector<int>> interface_loops(const Interface& itf);

} // namespace ccbm
