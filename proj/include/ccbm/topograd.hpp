#pragma once

#include <vector>

#include "ccbm/fem.hpp"
#include "ccbm/mesh.hpp"

namespace ccbm {

// Nodal topological-gradient field on a P1 space.
struct TopoField {
    Vec values;
    int argmin_node = -1;
    double min_value = 0;
    double max_value = 0;
};

struct TopoMinimum {
    int node = -1;
    double value = 0;
    std::vector<int> basin; // connected sub-level node set around the minimum
};

struct DetectionResult {
    std::vector<TopoMinimum> minima;
    Vec2 center;                    // mean of minima locations
    double radius = 0;              // heuristic size indicator
    std::vector<double> iso_levels; // uniform levels between field min and max
};

// delta J = u_i v_r - u_r v_i, nodally.
TopoField topo_gradient_field(const ComplexField& u, const ComplexField& v);

// Candidate inclusion centers are interior points (admissible regions keep
// a positive distance to the outer boundary), so nodes within this fraction
// of the smaller domain side from the boundary are not eligible minima.
// Boundary data noise concentrates its artifacts exactly there.
inline constexpr double kBoundaryMarginFrac = 0.05;

// Negative nodal minima that are strictly below every node within
// ring_depth hops and whose ring minima increase strictly outward;
// candidates whose basins overlap are merged (union-find), keeping the
// deepest node.
std::vector<TopoMinimum> find_local_minima(const TopoField& field, const Mesh& mesh,
                                           int ring_depth = 2, int n_levels = 30,
                                           double boundary_margin = -1);

std::vector<double> iso_levels(const TopoField& field, int n_levels);

// Connected node set below the first iso level above each minimum.
std::vector<std::vector<int>> extract_basins(const TopoField& field, const Mesh& mesh,
                                             const std::vector<int>& minima_nodes,
                                             const std::vector<double>& levels);

// center = mean of minima locations; radius = r_cal * depth / range
// (qualitative size indicator, calibration frozen against the reference
// disc case).
struct CenterRadius {
    Vec2 center;
    double radius;
};
CenterRadius estimate_center_radius(const std::vector<TopoMinimum>& minima, const TopoField& field,
                                    const Mesh& mesh);

// One-shot detection from the empty configuration: state with mu = 0,
// adjoint with source -2 u_i, field, minima. Throws NoNegativeMinimum when
// the field is nonnegative everywhere.
struct OneShotOutput {
    ComplexField state;
    ComplexField adjoint;
    TopoField field;
    DetectionResult detection;
};
OneShotOutput one_shot_detect(const Mesh& inverse_mesh, const CauchyData& data, double beta,
                              int ring_depth = 2, int n_levels = 30);

} // namespace ccbm
