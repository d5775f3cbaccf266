#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ccbm/forward.hpp"
#include "ccbm/mesh.hpp"
#include "ccbm/shape.hpp"

namespace ccbm {

struct MeshConfig {
    int nx = 0, ny = 0;
    int degree = 1;
};

struct StatConfig {
    int n_mc = 100;
    int n_scan = 20;
    double alpha = 0.05;
    double sigma = 0;                  // 0 = 1.5 * scan spacing
    std::vector<double> delta = {0.1}; // independent ensembles, one per level
    std::uint64_t seed = 1;
    double red_fraction = 0.05;
    int convergence_probes = 10;
};

struct TopoConfig {
    int ring_depth = 2;
    int n_levels = 30;
};

struct ShapeConfig {
    double s = 0.5;
    double t0 = 1e-6;
    int max_iters = 200;
    double quality_floor = 0.05;
    InclusionSpec init;              // empty = take from a prior topo result
    std::vector<double> beta_list;   // empty = single run at the scenario beta
    std::string init_from;           // optional topo JSON path
    double init_radius = 0.0;        // radius when initializing from topo minima
};

// One scenario drives all four pipelines. Defaults reproduce the standard
// setup: 200x200/P2 forward, 100x100/P1 inversion, beta = 200, alpha = 0.05.
struct ScenarioConfig {
    Rect domain{-0.5, -0.5, 0.5, 0.5};
    MeshConfig fine{200, 200, 2};
    MeshConfig inverse{100, 100, 1};
    double mu0 = 10.0;
    double beta = 200.0;
    FluxProfile g_profile = FluxProfile::ConstantOne;
    InclusionSpec truth;
    NoiseModel noise{NoiseKind::MultiplicativeField, 0.0, 1};
    bool allow_inverse_crime = false;
    StatConfig stat;
    TopoConfig topo;
    ShapeConfig shape;
    std::filesystem::path out = "out";
    bool render = false;
    int threads = 0;
};

// Parses and validates the JSON config file; throws ConfigError with the
// offending field. Environment overrides: CCBM_SEED, CCBM_OUT.
ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(const std::string& json_text);

// Serialized form used in run manifests.
std::string config_to_json(const ScenarioConfig& cfg);

} // namespace ccbm
