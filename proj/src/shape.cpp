#include "ccbm/shape.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "ccbm/errors.hpp"

namespace ccbm {

std::vector<double> shape_gradient_density(const ComplexField& u, const ComplexField& adj,
                                           double mu0, const Interface& itf) {
    if (u.re.size() != adj.re.size())
        throw MeshMismatch("shape_gradient_density: fields live on different spaces");
    std::vector<double> G(itf.nodes.size());
    for (std::size_t i = 0; i < itf.nodes.size(); ++i) {
        int n = itf.nodes[i];
        G[i] = mu0 * (u.im[n] * adj.re[n] - u.re[n] * adj.im[n]);
    }
    return G;
}

double shape_derivative(const Interface& itf, const std::vector<double>& density,
                        const VectorField& theta, const Mesh& mesh) {
    if (density.size() != itf.nodes.size())
        throw MeshMismatch("shape_derivative: density does not match the interface");
    std::vector<double> G_at(mesh.vertices.size(), 0.0);
    for (std::size_t i = 0; i < itf.nodes.size(); ++i) G_at[itf.nodes[i]] = density[i];

    // per-edge pairing: int_e G (theta . nu_e) ds with P1 G and theta,
    // exact for the quadratic product (Simpson on the edge)
    double dJ = 0;
    for (std::size_t e = 0; e < itf.edges.size(); ++e) {
        int a = itf.edges[e][0], b = itf.edges[e][1];
        Vec2 nu = itf.edge_normals[e];
        double L = itf.edge_lengths[e];
        double Ga = G_at[a], Gb = G_at[b];
        double ta = dot(theta.values[a], nu), tb = dot(theta.values[b], nu);
        double tm = 0.5 * (ta + tb), Gm = 0.5 * (Ga + Gb);
        dJ += L / 6.0 * (Ga * ta + 4.0 * Gm * tm + Gb * tb);
    }
    return dJ;
}

double initial_step(double s, double J_current, double theta_h1_norm_sq) {
    if (!(theta_h1_norm_sq > 0)) throw ZeroDirection("initial_step: direction norm is zero");
    return s * J_current / theta_h1_norm_sq;
}

namespace {

double state_cost(const Mesh& mesh, const CauchyData& data, const ShapeOptConfig& config,
                  ComplexField* state_out = nullptr,
                  std::shared_ptr<BlockSystem>* sys_out = nullptr,
                  std::shared_ptr<FeSpace>* space_out = nullptr) {
    auto space = std::make_shared<FeSpace>(mesh, 1);
    auto sys = std::make_shared<BlockSystem>(*space, mu_from_region(mesh, config.mu0), config.beta);
    ComplexField u = solve_state(*sys, *space, data);
    double J = u.im.dot(sys->mass() * u.im);
    if (state_out) *state_out = u;
    if (sys_out) *sys_out = sys;
    if (space_out) *space_out = space;
    return J;
}

} // namespace

LineSearchResult line_search(const Mesh& mesh, const VectorField& theta, double t_init,
                             double J_current, double quality_floor_abs, double t0,
                             const CauchyData& data, const ShapeOptConfig& config) {
    LineSearchResult res;
    double t = t_init;
    while (t >= t0) {
        bool valid = true;
        Mesh trial;
        try {
            trial = deform_mesh(mesh, theta, t);
        } catch (const InvertedElement&) {
            valid = false;
        }
        if (valid && min_triangle_quality(trial) < quality_floor_abs) valid = false;
        if (valid) {
            double J_new = state_cost(trial, data, config);
            if (J_new < J_current) {
                res.accepted = true;
                res.t = t;
                res.mesh = std::move(trial);
                res.J = J_new;
                return res;
            }
        }
        t *= 0.5;
    }
    res.t = t;
    return res; // step fell below t0: stagnation signal for the driver
}

ShapeOptHistory optimize_shape(const Mesh& initial_marked_mesh, const CauchyData& data,
                               const ShapeOptConfig& config) {
    ShapeOptHistory hist;
    Mesh mesh = initial_marked_mesh;
    const double quality_floor_abs = config.quality_floor_frac * min_triangle_quality(mesh);

    for (int iter = 0; iter < config.max_iters; ++iter) {
        ComplexField u;
        std::shared_ptr<BlockSystem> sys;
        std::shared_ptr<FeSpace> space;
        double J = state_cost(mesh, data, config, &u, &sys, &space);
        if (iter == 0) hist.J_initial = J;
        hist.final_J = J;

        double u_r_scale = u.re.dot(sys->mass() * u.re);
        if (J <= config.j_stop_rel * u_r_scale) {
            hist.stop_reason = "stationary";
            break;
        }

        ComplexField adj = solve_shape_adjoint(*sys, *space, u.im);
        Interface itf = extract_interface(mesh);
        std::vector<double> G = shape_gradient_density(u, adj, config.mu0, itf);
        ExtensionResult ext = solve_sobolev_extension(mesh, itf, G);
        if (!(ext.h1_norm_sq > 0)) {
            hist.stop_reason = "stationary";
            break;
        }

        double t = initial_step(config.s, J, ext.h1_norm_sq);
        LineSearchResult ls = line_search(mesh, ext.theta, t, J, quality_floor_abs, config.t0,
                                          data, config);
        if (!ls.accepted) {
            hist.stop_reason = "step_too_small";
            break;
        }

        mesh = std::move(ls.mesh);
        hist.final_J = ls.J;
        hist.iterates.push_back(
            {ls.J, ls.t, std::sqrt(ext.h1_norm_sq), min_triangle_quality(mesh)});
    }
    if (hist.stop_reason.empty()) hist.stop_reason = "max_iters";
    hist.final_mesh = std::move(mesh);
    hist.final_interface = extract_interface(hist.final_mesh);
    return hist;
}

std::vector<ShapeOptHistory> compare_beta(const Mesh& initial_marked_mesh, const CauchyData& data,
                                          const ShapeOptConfig& config,
                                          const std::vector<double>& beta_list) {
    if (beta_list.empty()) throw std::invalid_argument("compare_beta: beta list is empty");
    std::vector<ShapeOptHistory> out;
    out.reserve(beta_list.size());
    for (double beta : beta_list) {
        ShapeOptConfig c = config;
        c.beta = beta;
        out.push_back(optimize_shape(initial_marked_mesh, data, c));
    }
    return out;
}

double interface_error(const Interface& itf, const Mesh& mesh, const InclusionSpec& truth) {
    double worst = 0;
    for (int n : itf.nodes) worst = std::max(worst, truth.boundary_distance(mesh.vertices[n]));
    return worst;
}

} // namespace ccbm
