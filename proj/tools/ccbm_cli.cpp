// Command-line front end: forward | topo | stat | shape | all subcommands
// driven by a JSON scenario config, with deterministic outputs and a
// manifest sufficient to rerun each job.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ccbm/config.hpp"
#include "ccbm/errors.hpp"
#include "ccbm/io.hpp"
#include "ccbm/pipeline.hpp"
#include "ccbm/shape.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace ccbm;

namespace {

constexpr const char* kVersion = "ccbm 1.0.0";

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitNoDetection = 4;

struct Manifest {
    ordered_json j;
    explicit Manifest(const ScenarioConfig& cfg, const std::string& command) {
        j["tool"] = kVersion;
        j["command"] = command;
        j["config"] = ordered_json::parse(config_to_json(cfg));
        j["seeds"] = {{"noise", cfg.noise.seed}, {"stat", cfg.stat.seed}};
        j["outputs"] = ordered_json::object();
    }
    void add(const fs::path& file) {
        char hex[24];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(fnv1a_file(file)));
        j["outputs"][file.filename().string()] = hex;
    }
    void write(const fs::path& dir) const {
        std::ofstream out(dir / "manifest.json");
        out << j.dump(2) << "\n";
    }
};

ScenarioData forward_stage(const ScenarioConfig& cfg) {
    if (cfg.allow_inverse_crime && cfg.fine.nx == cfg.inverse.nx &&
        cfg.fine.ny == cfg.inverse.ny && cfg.fine.degree == cfg.inverse.degree)
        return prepare_consistency_scenario(cfg);
    return prepare_scenario(cfg);
}

int cmd_forward(const ScenarioConfig& cfg) {
    fs::create_directories(cfg.out);
    ScenarioData data = forward_stage(cfg);

    Manifest man(cfg, "forward");
    fs::path cauchy = cfg.out / "cauchy_fine.csv";
    write_cauchy_csv(*data.fine_space, data.fine_data, cauchy);
    fs::path cauchy_inv = cfg.out / "cauchy_inverse.csv";
    write_cauchy_csv(*data.inverse_space, data.inverse_data, cauchy_inv);
    fs::path vtk = cfg.out / "forward_field.vtk";
    Vec vertex_part = data.fine_solution.head(data.fine_mesh.vertices.size());
    write_mesh_vtk(data.fine_mesh, vtk, {{"u", vertex_part}});
    man.add(cauchy);
    man.add(cauchy_inv);
    man.add(vtk);
    man.write(cfg.out);
    std::cout << "forward: wrote " << cauchy.string() << ", " << cauchy_inv.string() << ", "
              << vtk.string() << "\n";
    return kExitOk;
}

int cmd_topo(const ScenarioConfig& cfg) {
    fs::create_directories(cfg.out);
    ScenarioData data = forward_stage(cfg);
    OneShotOutput topo = run_topo(cfg, data); // NoNegativeMinimum handled by main

    Manifest man(cfg, "topo");
    fs::path jdet = cfg.out / "detection.json";
    write_detection_json(topo.detection, data.inverse_mesh, jdet);
    fs::path csv = cfg.out / "topo_field.csv";
    ComplexField as_field{topo.field.values, Vec::Zero(topo.field.values.size()), 1};
    write_field_csv(*data.inverse_space, as_field, csv);
    man.add(jdet);
    man.add(csv);
    if (cfg.render) {
        fs::path svg = cfg.out / "topo_field.svg";
        write_topo_svg(data.inverse_mesh, topo.field, topo.detection, svg);
        man.add(svg);
    }
    man.write(cfg.out);
    std::cout << "topo: " << topo.detection.minima.size() << " minima, center ("
              << topo.detection.center.x << ", " << topo.detection.center.y << "), radius "
              << topo.detection.radius << "\n";
    return kExitOk;
}

int cmd_stat(const ScenarioConfig& cfg) {
    fs::create_directories(cfg.out);
    ScenarioData data = forward_stage(cfg);

    Manifest man(cfg, "stat");
    const bool multi = cfg.stat.delta.size() > 1;
    for (double delta : cfg.stat.delta) {
        fs::path dir = cfg.out;
        if (multi) {
            char sub[32];
            std::snprintf(sub, sizeof(sub), "delta_%g", delta);
            dir = cfg.out / sub;
            fs::create_directories(dir);
        }
        StatOutput stat = run_stat(cfg, data, delta);
        fs::path csv = dir / "confidence_map.csv";
        write_confidence_csv(stat.map, csv);
        fs::path jmap = dir / "confidence_map.json";
        write_confidence_json(stat.map, jmap);
        fs::path conv = dir / "convergence.csv";
        write_convergence_csv(stat.convergence, conv);
        man.add(csv);
        man.add(jmap);
        man.add(conv);
        if (cfg.render) {
            fs::path svg = dir / "confidence_map.svg";
            write_confidence_svg(stat.map, cfg.domain, svg);
            man.add(svg);
        }
        int n_rej = 0;
        for (auto r : stat.map.reject_h0) n_rej += r;
        std::cout << "stat delta=" << delta << ": rejected " << n_rej << "/"
                  << stat.map.grid.points.size() << " probes, slope " << stat.convergence.slope
                  << "\n";
    }
    man.write(cfg.out);
    return kExitOk;
}

InclusionSpec init_from_topo_json(const fs::path& path, const ScenarioConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw ConfigError("shape: cannot open init_from file " + path.string());
    ordered_json j = ordered_json::parse(in);
    double r = cfg.shape.init_radius > 0 ? cfg.shape.init_radius : j.at("radius").get<double>();
    std::vector<ShapePrimitive> shapes;
    for (const auto& m : j.at("minima"))
        shapes.push_back(Disc{{m.at("x").get<double>(), m.at("y").get<double>()}, r});
    return make_inclusion_spec(std::move(shapes), cfg.mu0, cfg.domain);
}

int cmd_shape(const ScenarioConfig& cfg) {
    fs::create_directories(cfg.out);
    ScenarioData data = forward_stage(cfg);

    InclusionSpec init = cfg.shape.init;
    if (init.empty() && !cfg.shape.init_from.empty())
        init = init_from_topo_json(cfg.shape.init_from, cfg);
    if (init.empty()) throw ConfigError("shape: no init region (set shape.init or shape.init_from)");

    Mesh marked = mark_region(data.inverse_mesh, init);
    Interface initial_itf = extract_interface(marked);
    Mesh truth_marked = mark_region(data.inverse_mesh, cfg.truth);

    ShapeOptConfig sc;
    sc.beta = cfg.beta;
    sc.mu0 = cfg.mu0;
    sc.s = cfg.shape.s;
    sc.t0 = cfg.shape.t0;
    sc.max_iters = cfg.shape.max_iters;
    sc.quality_floor_frac = cfg.shape.quality_floor;

    std::vector<double> betas = cfg.shape.beta_list;
    if (betas.empty()) betas.push_back(cfg.beta);
    auto runs = compare_beta(marked, data.inverse_data, sc, betas);

    Manifest man(cfg, "shape");
    ordered_json summary = ordered_json::array();
    for (std::size_t k = 0; k < runs.size(); ++k) {
        const auto& hist = runs[k];
        std::string tag = runs.size() > 1 ? "_beta" + std::to_string(static_cast<int>(betas[k])) : "";
        fs::path hcsv = cfg.out / ("history" + tag + ".csv");
        write_history_csv(hist, hcsv);
        fs::path icsv = cfg.out / ("interface" + tag + ".csv");
        write_interface_csv(hist.final_interface, hist.final_mesh, icsv);
        man.add(hcsv);
        man.add(icsv);
        if (cfg.render) {
            fs::path svg = cfg.out / ("overlay" + tag + ".svg");
            Interface truth_itf = extract_interface(truth_marked);
            write_overlay_svg(cfg.domain,
                              {{&initial_itf, &marked, "#888888"},
                               {&truth_itf, &truth_marked, "#000000"},
                               {&hist.final_interface, &hist.final_mesh, "#d40000"}},
                              svg);
            man.add(svg);
        }
        double err = interface_error(hist.final_interface, hist.final_mesh, cfg.truth);
        summary.push_back({{"beta", betas[k]},
                           {"J_initial", hist.J_initial},
                           {"J_final", hist.final_J},
                           {"iterations", hist.iterates.size()},
                           {"stop", hist.stop_reason},
                           {"interface_error", err}});
        std::cout << "shape beta=" << betas[k] << ": J " << hist.J_initial << " -> "
                  << hist.final_J << " in " << hist.iterates.size() << " iterations ("
                  << hist.stop_reason << "), interface error " << err << "\n";
    }
    std::ofstream sm(cfg.out / "shape_summary.json");
    sm << summary.dump(2) << "\n";
    man.add(cfg.out / "shape_summary.json");
    man.write(cfg.out);
    return kExitOk;
}

int cmd_all(const ScenarioConfig& cfg) {
    int rc = cmd_forward(cfg);
    if (rc == kExitOk) rc = cmd_topo(cfg);
    if (rc == kExitOk) rc = cmd_stat(cfg);
    if (rc == kExitOk && (!cfg.shape.init.empty() || !cfg.shape.init_from.empty()))
        rc = cmd_shape(cfg);
    return rc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contact-region reconstruction from boundary Cauchy data"};
    app.set_version_flag("--version", kVersion);

    std::string config_path;
    std::string out_override;
    std::int64_t seed_override = -1;
    int threads = 0;
    bool render = false;

    app.add_option("--config", config_path, "scenario config (JSON)")->required();
    app.add_option("--out", out_override, "output directory override");
    app.add_option("--seed", seed_override, "seed override for noise and stat streams");
    app.add_option("--threads", threads, "worker threads for linear algebra");
    app.add_flag("--render", render, "emit SVG renderings");

    app.require_subcommand(1);
    auto* sub_forward = app.add_subcommand("forward", "generate synthetic Cauchy data");
    auto* sub_topo = app.add_subcommand("topo", "one-shot topological detection");
    auto* sub_stat = app.add_subcommand("stat", "Monte-Carlo confidence maps");
    auto* sub_shape = app.add_subcommand("shape", "shape-optimization refinement");
    auto* sub_all = app.add_subcommand("all", "run every stage in order");

    CLI11_PARSE(app, argc, argv);

    ScenarioConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    }
    if (!out_override.empty()) cfg.out = out_override;
    if (seed_override >= 0) {
        cfg.noise.seed = static_cast<std::uint64_t>(seed_override);
        cfg.stat.seed = static_cast<std::uint64_t>(seed_override);
    }
    if (render) cfg.render = true;
    if (threads > 0) cfg.threads = threads;
    Eigen::setNbThreads(cfg.threads > 0 ? cfg.threads : 1);

    try {
        if (sub_forward->parsed()) return cmd_forward(cfg);
        if (sub_topo->parsed()) return cmd_topo(cfg);
        if (sub_stat->parsed()) return cmd_stat(cfg);
        if (sub_shape->parsed()) return cmd_shape(cfg);
        if (sub_all->parsed()) return cmd_all(cfg);
    } catch (const NoNegativeMinimum& e) {
        std::cerr << e.what() << "\n";
        return kExitNoDetection;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const SolverFailure& e) {
        std::cerr << e.what() << "\n";
        return kExitSolver;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitSolver;
    }
    return kExitOk;
}
