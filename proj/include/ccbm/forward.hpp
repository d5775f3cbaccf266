#pragma once

#include <cstdint>
#include <string>

#include "ccbm/fem.hpp"
#include "ccbm/mesh.hpp"

namespace ccbm {

enum class NoiseKind {
    MultiplicativeField, // u^delta = (1 + delta eta) u, eta iid standard normal
    AdditiveBoundary,    // f^xi = f + xi, xi iid centered Gaussian per boundary node
};

struct NoiseModel {
    NoiseKind kind = NoiseKind::MultiplicativeField;
    double delta = 0.0;
    std::uint64_t seed = 0;
};

// Named boundary flux profiles.
enum class FluxProfile { ConstantOne, AbsX };
FluxProfile flux_profile_from_name(const std::string& name);
double eval_flux(FluxProfile p, Vec2 x);

struct ForwardProblemSpec {
    InclusionSpec truth;
    FluxProfile g_profile = FluxProfile::ConstantOne;
    int degree = 2;
};

struct ForwardSolution {
    CauchyData data; // on the fine boundary (g prescribed, f = trace of u)
    Vec u;           // full nodal solution of the real Neumann problem
};

// Solves the real Neumann problem -Delta u + mu0 chi_omega u = 0,
// d_nu u = g on the fine mesh; f is the boundary trace. Throws
// EmptyInclusion when the truth region tags no element (the pure-Neumann
// system would be singular).
ForwardSolution generate_cauchy_data(const ForwardProblemSpec& spec, const FeSpace& fine_space);

// Multiplicative field noise: u <- u (1 + delta eta), eta iid N(0, 1), so
// delta is the relative contamination level (0.1 = 10% noise).
Vec add_noise(const Vec& u, const NoiseModel& model, std::uint64_t stream = 0);

// Additive boundary noise: f + xi, xi iid N(0, (delta ||f||_inf)^2).
Vec perturb_boundary(const Vec& f, const NoiseModel& model, std::uint64_t stream = 0);

// Transfers boundary-node values between meshes of the same rectangle by
// linear interpolation in the perimeter arclength parameter.
Vec transfer_trace(const Vec& fine_values, const FeSpace& fine_space, const FeSpace& coarse_space);

// Evaluates a flux profile at the boundary nodes of a space.
Vec flux_on_boundary(FluxProfile p, const FeSpace& space);

} // namespace ccbm
