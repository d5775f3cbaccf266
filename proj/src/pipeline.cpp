#include "ccbm/pipeline.hpp"

#include <algorithm>

#include "ccbm/errors.hpp"

namespace ccbm {

ScenarioData prepare_scenario(const ScenarioConfig& cfg) {
    ScenarioData d;
    d.fine_mesh = build_rect_mesh(cfg.fine.nx, cfg.fine.ny, cfg.domain);
    d.inverse_mesh = build_rect_mesh(cfg.inverse.nx, cfg.inverse.ny, cfg.domain);
    d.fine_space = std::make_shared<FeSpace>(d.fine_mesh, cfg.fine.degree);
    d.inverse_space = std::make_shared<FeSpace>(d.inverse_mesh, cfg.inverse.degree);

    ForwardProblemSpec fwd{cfg.truth, cfg.g_profile, cfg.fine.degree};
    ForwardSolution sol = generate_cauchy_data(fwd, *d.fine_space);
    d.fine_solution = sol.u;

    Vec u = sol.u;
    if (cfg.noise.kind == NoiseKind::MultiplicativeField && cfg.noise.delta > 0)
        u = add_noise(u, cfg.noise);
    d.fine_data.g = sol.data.g;
    const auto& bn = d.fine_space->boundary_nodes();
    d.fine_data.f.resize(bn.size());
    for (std::size_t i = 0; i < bn.size(); ++i)
        d.fine_data.f[static_cast<Eigen::Index>(i)] = u[bn[i]];

    d.inverse_data.g = flux_on_boundary(cfg.g_profile, *d.inverse_space);
    d.inverse_data.f = transfer_trace(d.fine_data.f, *d.fine_space, *d.inverse_space);
    return d;
}

ScenarioData prepare_consistency_scenario(const ScenarioConfig& cfg) {
    ScenarioData d;
    d.inverse_mesh = build_rect_mesh(cfg.inverse.nx, cfg.inverse.ny, cfg.domain);
    d.inverse_space = std::make_shared<FeSpace>(d.inverse_mesh, cfg.inverse.degree);
    d.fine_mesh = d.inverse_mesh;
    d.fine_space = d.inverse_space;

    ForwardProblemSpec fwd{cfg.truth, cfg.g_profile, cfg.inverse.degree};
    ForwardSolution sol = generate_cauchy_data(fwd, *d.inverse_space);
    d.fine_solution = sol.u;
    d.fine_data = sol.data;
    d.inverse_data = sol.data;
    return d;
}

OneShotOutput run_topo(const ScenarioConfig& cfg, const ScenarioData& data) {
    return one_shot_detect(data.inverse_mesh, data.inverse_data, cfg.beta, cfg.topo.ring_depth,
                           cfg.topo.n_levels);
}

StatOutput run_stat(const ScenarioConfig& cfg, const ScenarioData& data, double delta) {
    BlockSystem sys(*data.inverse_space, {}, cfg.beta);
    McContext ctx{*data.inverse_space, sys, data.inverse_data, cfg.beta};
    ProbeGrid grid = make_probe_grid(cfg.domain, cfg.stat.n_scan, cfg.stat.sigma);

    StatOutput out;
    out.ensemble = mc_run(ctx, cfg.stat.n_mc, grid, delta, cfg.stat.seed);
    out.map = ci_map(out.ensemble, cfg.stat.alpha);
    try {
        out.map = red_zone(std::move(out.map), cfg.stat.red_fraction);
    } catch (const NoRejection&) {
        // an empty rejection set is a legitimate outcome; the map keeps all-zero flags
    }

    // convergence probes: spread deterministically over the scan grid
    int np = static_cast<int>(grid.points.size());
    int want = std::min(cfg.stat.convergence_probes, np);
    std::vector<int> probes;
    for (int k = 0; k < want; ++k) probes.push_back((k * np) / want + (np / (2 * want)));
    for (int& p : probes) p = std::min(p, np - 1);
    out.convergence = convergence_diagnostic(out.ensemble, probes);
    return out;
}

} // namespace ccbm
