#pragma once

#include <memory>

#include "ccbm/config.hpp"
#include "ccbm/fem.hpp"
#include "ccbm/forward.hpp"
#include "ccbm/mesh.hpp"
#include "ccbm/stat.hpp"
#include "ccbm/topograd.hpp"

namespace ccbm {

// Forward stage output: fine-mesh solution plus the Cauchy pair transferred
// onto the inversion mesh boundary.
struct ScenarioData {
    Mesh fine_mesh;
    Mesh inverse_mesh;
    std::shared_ptr<FeSpace> fine_space;
    std::shared_ptr<FeSpace> inverse_space;
    Vec fine_solution;      // clean real forward field (before field noise)
    CauchyData fine_data;   // trace on the fine boundary (after field noise)
    CauchyData inverse_data; // transferred to the inverse boundary
};

// Runs the forward pipeline: fine real Neumann solve, the scenario's field
// noise (multiplicative kind only; the additive kind belongs to mc_run),
// trace transfer onto the inversion mesh.
ScenarioData prepare_scenario(const ScenarioConfig& cfg);

// Same-mesh consistency data (deliberate inverse crime, for tests): solves
// the real forward problem directly on the inversion mesh and degree.
ScenarioData prepare_consistency_scenario(const ScenarioConfig& cfg);

// One-shot detection on prepared data using the scenario's beta.
OneShotOutput run_topo(const ScenarioConfig& cfg, const ScenarioData& data);

// Statistical stage at one noise level.
struct StatOutput {
    McEnsemble ensemble;
    ConfidenceMap map;
    ConvergenceSeries convergence;
};
StatOutput run_stat(const ScenarioConfig& cfg, const ScenarioData& data, double delta);

} // namespace ccbm
