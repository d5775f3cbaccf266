#pragma once

#include <string>
#include <vector>

#include "ccbm/fem.hpp"
#include "ccbm/mesh.hpp"

namespace ccbm {

struct ShapeOptConfig {
    double beta = 200.0;
    double mu0 = 10.0;
    double s = 0.5;    // step scaling
    double t0 = 1e-6;  // stopping tolerance on the accepted step
    int max_iters = 200;
    double quality_floor_frac = 0.05; // fraction of the initial mesh quality
    double j_stop_rel = 1e-14;        // stationary when J <= rel * ||u_r||^2
};

struct ShapeIterate {
    double J = 0;
    double step = 0;
    double grad_norm = 0; // H1 norm of the smoothed descent direction
    double quality = 0;   // min triangle quality after the update
};

struct ShapeOptHistory {
    double J_initial = 0;
    std::vector<ShapeIterate> iterates; // accepted iterations only
    Mesh final_mesh;
    Interface final_interface;
    std::string stop_reason; // stationary | step_too_small | max_iters
    double final_J = 0;
};

// Interface density G = mu0 (u_i adj_r - u_r adj_i) at the interface nodes.
std::vector<double> shape_gradient_density(const ComplexField& u, const ComplexField& adj,
                                           double mu0, const Interface& itf);

// dJ(omega)[theta] = int_{interface} G theta.nu ds, with the per-edge
// outward normal pairing shared with the Sobolev extension right-hand side.
double shape_derivative(const Interface& itf, const std::vector<double>& density,
                        const VectorField& theta, const Mesh& mesh);

// t = s J / ||theta||_H1^2. Throws ZeroDirection when the direction vanishes.
double initial_step(double s, double J_current, double theta_h1_norm_sq);

struct LineSearchResult {
    bool accepted = false;
    double t = 0;
    Mesh mesh;       // valid only when accepted
    double J = 0;    // valid only when accepted
};

// Halves t until the deformation keeps the mesh above the quality floor and
// J decreases; reports failure (no exception) when t falls below t0.
LineSearchResult line_search(const Mesh& mesh, const VectorField& theta, double t_init,
                             double J_current, double quality_floor_abs, double t0,
                             const CauchyData& data, const ShapeOptConfig& config);

// Full first-order loop: state, shape adjoint, interface density, Sobolev
// smoothing, step rule, backtracking, Lagrangian mesh update.
ShapeOptHistory optimize_shape(const Mesh& initial_marked_mesh, const CauchyData& data,
                               const ShapeOptConfig& config);

// Identical runs differing only in beta.
std::vector<ShapeOptHistory> compare_beta(const Mesh& initial_marked_mesh, const CauchyData& data,
                                          const ShapeOptConfig& config,
                                          const std::vector<double>& beta_list);

// Largest distance from the interface vertices to the boundary of a
// reference region; reconstruction-quality measure.
double interface_error(const Interface& itf, const Mesh& mesh, const InclusionSpec& truth);

} // namespace ccbm
