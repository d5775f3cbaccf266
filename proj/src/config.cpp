#include "ccbm/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ccbm/errors.hpp"

namespace ccbm {

using ordered_json = nlohmann::ordered_json;

namespace {

std::vector<ShapePrimitive> parse_shapes(const ordered_json& arr, const std::string& where) {
    std::vector<ShapePrimitive> shapes;
    for (const auto& s : arr) {
        std::string type = s.at("type").get<std::string>();
        if (type == "disc") {
            shapes.push_back(Disc{{s.at("cx").get<double>(), s.at("cy").get<double>()},
                                  s.at("r").get<double>()});
        } else if (type == "square") {
            shapes.push_back(Square{{s.at("cx").get<double>(), s.at("cy").get<double>()},
                                    s.at("hw").get<double>()});
        } else {
            throw ConfigError(where + ": unknown shape type '" + type + "'");
        }
    }
    return shapes;
}

ordered_json shapes_to_json(const InclusionSpec& spec) {
    ordered_json arr = ordered_json::array();
    for (const auto& s : spec.shapes) {
        ordered_json j;
        if (std::holds_alternative<Disc>(s)) {
            const auto& d = std::get<Disc>(s);
            j = {{"type", "disc"}, {"cx", d.center.x}, {"cy", d.center.y}, {"r", d.radius}};
        } else {
            const auto& q = std::get<Square>(s);
            j = {{"type", "square"}, {"cx", q.center.x}, {"cy", q.center.y}, {"hw", q.half_width}};
        }
        arr.push_back(j);
    }
    return arr;
}

} // namespace

ScenarioConfig parse_config(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    ScenarioConfig cfg;
    try {
        if (j.contains("domain")) {
            const auto& d = j["domain"];
            cfg.domain = {d.at("xmin").get<double>(), d.at("ymin").get<double>(),
                          d.at("xmax").get<double>(), d.at("ymax").get<double>()};
        }
        if (!(cfg.domain.width() > 0) || !(cfg.domain.height() > 0))
            throw ConfigError("config: domain is degenerate");

        auto mesh_cfg = [&](const char* key, MeshConfig def) {
            MeshConfig m = def;
            if (j.contains(key)) {
                const auto& q = j[key];
                m.nx = q.value("nx", def.nx);
                m.ny = q.value("ny", def.ny);
                m.degree = q.value("degree", def.degree);
            }
            if (m.nx < 1 || m.ny < 1) throw ConfigError(std::string("config: ") + key + ".nx/ny must be >= 1");
            if (m.degree != 1 && m.degree != 2)
                throw ConfigError(std::string("config: ") + key + ".degree must be 1 or 2");
            return m;
        };
        cfg.fine = mesh_cfg("fine", cfg.fine);
        cfg.inverse = mesh_cfg("inverse", cfg.inverse);

        cfg.mu0 = j.value("mu0", cfg.mu0);
        if (!(cfg.mu0 > 0)) throw ConfigError("config: mu0 must be positive");
        cfg.beta = j.value("beta", cfg.beta);
        if (!(cfg.beta > 0)) throw ConfigError("config: beta must be positive");
        if (j.contains("g_profile")) cfg.g_profile = flux_profile_from_name(j["g_profile"]);

        if (!j.contains("truth") || !j["truth"].contains("shapes"))
            throw ConfigError("config: truth.shapes is required");
        cfg.truth = make_inclusion_spec(parse_shapes(j["truth"]["shapes"], "truth"), cfg.mu0,
                                        cfg.domain);

        if (j.contains("noise")) {
            const auto& n = j["noise"];
            std::string kind = n.value("kind", std::string("multiplicative"));
            if (kind == "multiplicative" || kind == "multiplicative-field")
                cfg.noise.kind = NoiseKind::MultiplicativeField;
            else if (kind == "additive" || kind == "additive-boundary")
                cfg.noise.kind = NoiseKind::AdditiveBoundary;
            else
                throw ConfigError("config: noise.kind must be multiplicative | additive");
            cfg.noise.delta = n.value("delta", 0.0);
            if (cfg.noise.delta < 0) throw ConfigError("config: noise.delta must be >= 0");
            cfg.noise.seed = n.value("seed", std::uint64_t{1});
        }
        cfg.allow_inverse_crime = j.value("allow_inverse_crime", false);
        if (!cfg.allow_inverse_crime && cfg.fine.nx == cfg.inverse.nx &&
            cfg.fine.ny == cfg.inverse.ny && cfg.fine.degree == cfg.inverse.degree)
            throw ConfigError("config: fine and inverse discretizations coincide; "
                              "set allow_inverse_crime to opt into same-mesh consistency mode");

        if (j.contains("stat")) {
            const auto& s = j["stat"];
            cfg.stat.n_mc = s.value("n_mc", cfg.stat.n_mc);
            if (cfg.stat.n_mc < 2) throw ConfigError("config: stat.n_mc must be >= 2");
            cfg.stat.n_scan = s.value("n_scan", cfg.stat.n_scan);
            if (cfg.stat.n_scan < 1) throw ConfigError("config: stat.n_scan must be >= 1");
            cfg.stat.alpha = s.value("alpha", cfg.stat.alpha);
            if (!(cfg.stat.alpha > 0 && cfg.stat.alpha < 1))
                throw ConfigError("config: stat.alpha must be in (0,1)");
            cfg.stat.sigma = s.value("sigma", cfg.stat.sigma);
            cfg.stat.seed = s.value("seed", cfg.stat.seed);
            cfg.stat.red_fraction = s.value("red_fraction", cfg.stat.red_fraction);
            cfg.stat.convergence_probes = s.value("convergence_probes", cfg.stat.convergence_probes);
            if (s.contains("delta")) {
                cfg.stat.delta.clear();
                if (s["delta"].is_array())
                    for (const auto& d : s["delta"]) cfg.stat.delta.push_back(d.get<double>());
                else
                    cfg.stat.delta.push_back(s["delta"].get<double>());
                for (double d : cfg.stat.delta)
                    if (d < 0) throw ConfigError("config: stat.delta entries must be >= 0");
            }
        }
        if (j.contains("topo")) {
            cfg.topo.ring_depth = j["topo"].value("ring_depth", cfg.topo.ring_depth);
            if (cfg.topo.ring_depth < 1) throw ConfigError("config: topo.ring_depth must be >= 1");
            cfg.topo.n_levels = j["topo"].value("n_levels", cfg.topo.n_levels);
            if (cfg.topo.n_levels < 2) throw ConfigError("config: topo.n_levels must be >= 2");
        }
        if (j.contains("shape")) {
            const auto& s = j["shape"];
            cfg.shape.s = s.value("s", cfg.shape.s);
            if (!(cfg.shape.s > 0)) throw ConfigError("config: shape.s must be positive");
            cfg.shape.t0 = s.value("t0", cfg.shape.t0);
            if (!(cfg.shape.t0 > 0)) throw ConfigError("config: shape.t0 must be positive");
            cfg.shape.max_iters = s.value("max_iters", cfg.shape.max_iters);
            if (cfg.shape.max_iters < 1) throw ConfigError("config: shape.max_iters must be >= 1");
            cfg.shape.quality_floor = s.value("quality_floor", cfg.shape.quality_floor);
            if (s.contains("init"))
                cfg.shape.init = make_inclusion_spec(parse_shapes(s["init"]["shapes"], "shape.init"),
                                                     cfg.mu0, cfg.domain);
            if (s.contains("beta_list"))
                for (const auto& b : s["beta_list"]) cfg.shape.beta_list.push_back(b.get<double>());
            cfg.shape.init_from = s.value("init_from", std::string());
            cfg.shape.init_radius = s.value("init_radius", 0.0);
        }
        if (j.contains("out")) cfg.out = j["out"].get<std::string>();
        cfg.render = j.value("render", false);
        cfg.threads = j.value("threads", 0);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    if (const char* env_seed = std::getenv("CCBM_SEED")) {
        std::uint64_t s = std::strtoull(env_seed, nullptr, 10);
        cfg.noise.seed = s;
        cfg.stat.seed = s;
    }
    if (const char* env_out = std::getenv("CCBM_OUT")) cfg.out = env_out;
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const ScenarioConfig& cfg) {
    ordered_json j;
    j["domain"] = {{"xmin", cfg.domain.xmin}, {"ymin", cfg.domain.ymin},
                   {"xmax", cfg.domain.xmax}, {"ymax", cfg.domain.ymax}};
    j["fine"] = {{"nx", cfg.fine.nx}, {"ny", cfg.fine.ny}, {"degree", cfg.fine.degree}};
    j["inverse"] = {{"nx", cfg.inverse.nx}, {"ny", cfg.inverse.ny}, {"degree", cfg.inverse.degree}};
    j["mu0"] = cfg.mu0;
    j["beta"] = cfg.beta;
    j["g_profile"] = cfg.g_profile == FluxProfile::ConstantOne ? "one" : "absx";
    j["truth"] = {{"shapes", shapes_to_json(cfg.truth)}};
    j["noise"] = {{"kind", cfg.noise.kind == NoiseKind::MultiplicativeField ? "multiplicative"
                                                                            : "additive"},
                  {"delta", cfg.noise.delta},
                  {"seed", cfg.noise.seed}};
    j["allow_inverse_crime"] = cfg.allow_inverse_crime;
    j["stat"] = {{"n_mc", cfg.stat.n_mc},   {"n_scan", cfg.stat.n_scan},
                 {"alpha", cfg.stat.alpha}, {"sigma", cfg.stat.sigma},
                 {"delta", cfg.stat.delta}, {"seed", cfg.stat.seed},
                 {"red_fraction", cfg.stat.red_fraction},
                 {"convergence_probes", cfg.stat.convergence_probes}};
    j["topo"] = {{"ring_depth", cfg.topo.ring_depth}, {"n_levels", cfg.topo.n_levels}};
    ordered_json js = {{"s", cfg.shape.s},
                       {"t0", cfg.shape.t0},
                       {"max_iters", cfg.shape.max_iters},
                       {"quality_floor", cfg.shape.quality_floor}};
    if (!cfg.shape.init.empty()) js["init"] = {{"shapes", shapes_to_json(cfg.shape.init)}};
    if (!cfg.shape.beta_list.empty()) js["beta_list"] = cfg.shape.beta_list;
    if (!cfg.shape.init_from.empty()) js["init_from"] = cfg.shape.init_from;
    if (cfg.shape.init_radius > 0) js["init_radius"] = cfg.shape.init_radius;
    j["shape"] = js;
    j["out"] = cfg.out.string();
    j["render"] = cfg.render;
    j["threads"] = cfg.threads;
    return j.dump(2);
}

} // namespace ccbm
