#include "ccbm/forward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ccbm/errors.hpp"
#include "ccbm/rng.hpp"

namespace ccbm {

FluxProfile flux_profile_from_name(const std::string& name) {
    if (name == "one" || name == "constant-one" || name == "1") return FluxProfile::ConstantOne;
    if (name == "absx" || name == "abs-x" || name == "|x|") return FluxProfile::AbsX;
    throw ConfigError("unknown g_profile '" + name + "' (expected one | absx)");
}

double eval_flux(FluxProfile p, Vec2 x) {
    switch (p) {
        case FluxProfile::ConstantOne: return 1.0;
        case FluxProfile::AbsX: return std::abs(x.x);
    }
    return 0.0;
}

Vec flux_on_boundary(FluxProfile p, const FeSpace& space) {
    const auto& bnodes = space.boundary_nodes();
    Vec g(bnodes.size());
    for (std::size_t i = 0; i < bnodes.size(); ++i)
        g[static_cast<Eigen::Index>(i)] = eval_flux(p, space.nodes()[bnodes[i]]);
    return g;
}

ForwardSolution generate_cauchy_data(const ForwardProblemSpec& spec, const FeSpace& fine_space) {
    const Mesh& mesh = fine_space.mesh();
    if (spec.truth.empty()) throw EmptyInclusion("generate_cauchy_data: truth region is empty");
    Mesh marked = mark_region(mesh, spec.truth);
    if (marked.region_warning)
        throw EmptyInclusion("generate_cauchy_data: truth region tagged no element");

    // the marked mesh shares geometry with fine_space's mesh, so the space
    // (node numbering, boundary loop) is interchangeable
    std::vector<double> mu = mu_from_region(marked, spec.truth.mu0);
    SpMat A = assemble_stiffness(fine_space) + assemble_mass(fine_space, mu);
    SpdSystem sys(std::move(A));

    Vec g = flux_on_boundary(spec.g_profile, fine_space);
    Vec rhs = assemble_boundary_mass(fine_space) * scatter_boundary(fine_space, g);
    Vec u = sys.solve(rhs);

    ForwardSolution out;
    out.u = u;
    out.data.g = g;
    const auto& bnodes = fine_space.boundary_nodes();
    out.data.f.resize(bnodes.size());
    for (std::size_t i = 0; i < bnodes.size(); ++i)
        out.data.f[static_cast<Eigen::Index>(i)] = u[bnodes[i]];
    return out;
}

Vec add_noise(const Vec& u, const NoiseModel& model, std::uint64_t stream) {
    if (model.kind != NoiseKind::MultiplicativeField)
        throw std::invalid_argument("add_noise: model kind must be multiplicative-field");
    if (model.delta == 0.0) return u;
    Vec out(u.size());
    for (Eigen::Index k = 0; k < u.size(); ++k) {
        double eta = rng_normal(model.seed, stream, static_cast<std::uint64_t>(k));
        out[k] = u[k] * (1.0 + model.delta * eta);
    }
    return out;
}

Vec perturb_boundary(const Vec& f, const NoiseModel& model, std::uint64_t stream) {
    if (model.kind != NoiseKind::AdditiveBoundary)
        throw std::invalid_argument("perturb_boundary: model kind must be additive-boundary");
    if (model.delta == 0.0) return f;
    double sigma = model.delta * f.lpNorm<Eigen::Infinity>();
    Vec out(f.size());
    for (Eigen::Index k = 0; k < f.size(); ++k)
        out[k] = f[k] + sigma * rng_normal(model.seed, stream, static_cast<std::uint64_t>(k));
    return out;
}

Vec transfer_trace(const Vec& fine_values, const FeSpace& fine_space, const FeSpace& coarse_space) {
    if (!fine_space.mesh().bounds.same_as(coarse_space.mesh().bounds))
        throw GeometryMismatch("transfer_trace: meshes cover different rectangles");
    if (fine_values.size() != static_cast<Eigen::Index>(fine_space.boundary_nodes().size()))
        throw MeshMismatch("transfer_trace: values do not match the fine boundary");

    const auto& s_fine = fine_space.boundary_arclen();
    const std::size_t nf = s_fine.size();
    double perimeter = 2.0 * (fine_space.mesh().bounds.width() + fine_space.mesh().bounds.height());

    const auto& s_coarse = coarse_space.boundary_arclen();
    Vec out(s_coarse.size());
    for (std::size_t i = 0; i < s_coarse.size(); ++i) {
        double s = s_coarse[i];
        // both loops start at the (xmin, ymin) corner and run counterclockwise
        auto it = std::upper_bound(s_fine.begin(), s_fine.end(), s + 1e-14);
        std::size_t hi = static_cast<std::size_t>(it - s_fine.begin());
        std::size_t lo = hi - 1;
        double s_lo = s_fine[lo];
        double s_hi = (hi < nf) ? s_fine[hi] : perimeter; // wrap to the loop start
        double v_lo = fine_values[static_cast<Eigen::Index>(lo)];
        double v_hi = fine_values[static_cast<Eigen::Index>(hi < nf ? hi : 0)];
        double w = (s - s_lo) / (s_hi - s_lo);
        if (std::abs(s - s_lo) < 1e-12)
            out[static_cast<Eigen::Index>(i)] = v_lo; // coincident node: exact subsampling
        else
            out[static_cast<Eigen::Index>(i)] = (1.0 - w) * v_lo + w * v_hi;
    }
    return out;
}

} // namespace ccbm
