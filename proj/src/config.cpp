#include "csflock/config.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

namespace csf {

using nlohmann::json;

namespace {

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<document>", e.what());
    }
}

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

double get_number(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError(join(path, key), "missing required key");
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
    return v.get<double>();
}

double get_number_or(const json& obj, const std::string& path, const std::string& key,
                     double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
    return v.get<double>();
}

long long get_int_or(const json& obj, const std::string& path, const std::string& key,
                     long long fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
    return v.get<long long>();
}

bool get_bool_or(const json& obj, const std::string& path, const std::string& key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) throw ConfigError(join(path, key), "expected a boolean");
    return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError(join(path, key), "missing required key");
    const json& v = obj.at(key);
    if (!v.is_string()) throw ConfigError(join(path, key), "expected a string");
    return v.get<std::string>();
}

std::vector<double> get_number_array(const json& obj, const std::string& path,
                                     const std::string& key) {
    if (!obj.contains(key)) throw ConfigError(join(path, key), "missing required key");
    const json& v = obj.at(key);
    if (!v.is_array()) throw ConfigError(join(path, key), "expected an array");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(join(path, key), "expected numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

Kernel parse_kernel(const json& obj, const std::string& path) {
    if (!obj.is_object()) throw ConfigError(path, "expected an object");
    std::string type = get_string(obj, path, "type");
    if (type == "uniform") {
        check_keys(obj, path, {"type", "level"});
        double level = get_number(obj, path, "level");
        if (!(level >= 0.0)) throw ConfigError(join(path, "level"), "must be >= 0");
        return Kernel::uniform(level);
    }
    if (type == "smooth-power") {
        check_keys(obj, path, {"type", "lambda", "beta"});
        double lambda = get_number(obj, path, "lambda");
        double beta = get_number(obj, path, "beta");
        if (!(lambda > 0.0)) throw ConfigError(join(path, "lambda"), "must be > 0");
        if (!(beta >= 0.0)) throw ConfigError(join(path, "beta"), "must be >= 0");
        return Kernel::smooth_power(lambda, beta);
    }
    if (type == "truncated-exact-power") {
        check_keys(obj, path, {"type", "beta", "r0"});
        double beta = get_number(obj, path, "beta");
        double r0 = get_number(obj, path, "r0");
        if (!(beta > 0.0)) throw ConfigError(join(path, "beta"), "must be > 0");
        if (!(r0 > 0.0)) throw ConfigError(join(path, "r0"), "must be > 0");
        return Kernel::truncated_exact_power(beta, r0);
    }
    throw ConfigError(join(path, "type"),
                      "unknown kernel type (uniform | smooth-power | truncated-exact-power)");
}

SystemParams parse_params(const json& obj, const std::string& path) {
    if (!obj.is_object()) throw ConfigError(path, "expected an object");
    check_keys(obj, path, {"sigma", "kappa", "p", "kernel"});
    SystemParams p;
    p.sigma = get_number(obj, path, "sigma");
    if (!(p.sigma > 0.0)) throw ConfigError(join(path, "sigma"), "must be > 0");
    p.kappa = get_number_or(obj, path, "kappa", 0.0);
    if (!(p.kappa >= 0.0)) throw ConfigError(join(path, "kappa"), "must be >= 0");
    p.p = get_number_or(obj, path, "p", 2.0);
    if (!(p.p > 0.0)) throw ConfigError(join(path, "p"), "must be > 0");
    if (!obj.contains("kernel")) throw ConfigError(join(path, "kernel"), "missing required key");
    p.kernel = parse_kernel(obj.at("kernel"), join(path, "kernel"));
    return p;
}

FlockState parse_state(const json& obj, const std::string& path) {
    if (!obj.is_object()) throw ConfigError(path, "expected an object");
    check_keys(obj, path, {"n", "x", "v", "theta", "m"});
    FlockState s;
    s.n = static_cast<int>(get_int_or(obj, path, "n", 0));
    if (s.n < 1) throw ConfigError(join(path, "n"), "must be >= 1");
    s.x = get_number_array(obj, path, "x");
    s.v = get_number_array(obj, path, "v");
    s.theta = get_number_array(obj, path, "theta");
    s.m = get_number_array(obj, path, "m");
    const std::size_t N = s.theta.size();
    if (s.m.size() != N) throw ConfigError(join(path, "m"), "size must match theta");
    if (s.x.size() != N * s.n) throw ConfigError(join(path, "x"), "size must equal N*n");
    if (s.v.size() != N * s.n) throw ConfigError(join(path, "v"), "size must equal N*n");
    return s;
}

std::vector<std::string> default_invariants(const std::string& scenario) {
    if (scenario == "fat-tail") return {"theta-bar", "velocity-bound", "misalignment"};
    if (scenario == "random-sectorial")
        return {"theta-bar", "sector", "velocity-bound", "grassmannian"};
    return {"theta-bar", "velocity-bound"};
}

}  // namespace

const std::vector<std::string>& known_invariants() {
    static const std::vector<std::string> names = {"theta-bar",    "sector",     "velocity-bound",
                                                   "grassmannian", "monotone-A", "misalignment"};
    return names;
}

RunConfig parse_config(const std::string& text) {
    json root = parse_json(text);
    if (!root.is_object()) throw ConfigError("<document>", "expected a JSON object");
    check_keys(root, "",
               {"scenario", "params", "integrator", "diagnostics", "rate_fit", "invariants",
                "output"});

    RunConfig cfg;
    if (!root.contains("scenario")) throw ConfigError("scenario", "missing required key");
    const json& scn = root.at("scenario");
    if (!scn.is_object()) throw ConfigError("scenario", "expected an object");
    cfg.scenario = get_string(scn, "scenario", "name");

    if (cfg.scenario == "ha") {
        check_keys(scn, "scenario", {"name", "lambda", "sigma", "v0"});
        cfg.ha.lambda = get_number(scn, "scenario", "lambda");
        cfg.ha.sigma = get_number_or(scn, "scenario", "sigma", 1.0);
        cfg.ha.v0 = get_number_or(scn, "scenario", "v0", 0.9);
        try {
            cfg.ha.check();
        } catch (const std::invalid_argument& e) {
            throw ConfigError("scenario", e.what());
        }
        if (root.contains("params"))
            throw ConfigError("params", "not allowed for scenario 'ha' (derived)");
        cfg.params = ha_flock_config(cfg.ha).second;
    } else if (cfg.scenario == "fat-tail") {
        check_keys(scn, "scenario", {"name", "beta", "r0", "x1_0", "v1_0", "v2_0"});
        cfg.fat.beta = get_number(scn, "scenario", "beta");
        cfg.fat.r0 = get_number_or(scn, "scenario", "r0", 0.01);
        cfg.fat.x1_0 = get_number(scn, "scenario", "x1_0");
        cfg.fat.v1_0 = get_number(scn, "scenario", "v1_0");
        cfg.fat.v2_0 = get_number_or(scn, "scenario", "v2_0", 0.1 * cfg.fat.v1_0);
        try {
            cfg.params = fat_tail_config(cfg.fat).second;
        } catch (const std::invalid_argument& e) {
            throw ConfigError("scenario", e.what());
        }
        if (root.contains("params"))
            throw ConfigError("params", "not allowed for scenario 'fat-tail' (derived)");
    } else if (cfg.scenario == "random-sectorial") {
        check_keys(scn, "scenario",
                   {"name", "seed", "N", "n", "epsilon", "theta_min", "theta_max", "speed_min",
                    "speed_max", "pos_spread", "equal_masses"});
        cfg.rs.seed = static_cast<std::uint64_t>(get_int_or(scn, "scenario", "seed", 1));
        cfg.rs.N = static_cast<int>(get_int_or(scn, "scenario", "N", 8));
        cfg.rs.n = static_cast<int>(get_int_or(scn, "scenario", "n", 3));
        cfg.rs.epsilon = get_number(scn, "scenario", "epsilon");
        if (!(cfg.rs.epsilon > 0.0 && cfg.rs.epsilon < 1.0))
            throw ConfigError("scenario.epsilon", "must lie in (0, 1)");
        cfg.rs.knobs.theta_min = get_number_or(scn, "scenario", "theta_min", 0.9);
        cfg.rs.knobs.theta_max = get_number_or(scn, "scenario", "theta_max", 1.1);
        cfg.rs.knobs.speed_min = get_number_or(scn, "scenario", "speed_min", 0.8);
        cfg.rs.knobs.speed_max = get_number_or(scn, "scenario", "speed_max", 1.2);
        cfg.rs.knobs.pos_spread = get_number_or(scn, "scenario", "pos_spread", 0.5);
        cfg.rs.knobs.equal_masses = get_bool_or(scn, "scenario", "equal_masses", false);
        if (!root.contains("params")) throw ConfigError("params", "missing required key");
        cfg.params = parse_params(root.at("params"), "params");
    } else if (cfg.scenario == "explicit") {
        check_keys(scn, "scenario", {"name", "state"});
        if (!scn.contains("state")) throw ConfigError("scenario.state", "missing required key");
        cfg.state = parse_state(scn.at("state"), "scenario.state");
        if (!root.contains("params")) throw ConfigError("params", "missing required key");
        cfg.params = parse_params(root.at("params"), "params");
    } else {
        throw ConfigError("scenario.name",
                          "unknown scenario (ha | fat-tail | random-sectorial | explicit)");
    }

    if (root.contains("integrator")) {
        const json& it = root.at("integrator");
        if (!it.is_object()) throw ConfigError("integrator", "expected an object");
        check_keys(it, "integrator", {"dt", "t_final", "record_every"});
        cfg.integrator.dt = get_number_or(it, "integrator", "dt", 1e-3);
        if (!(cfg.integrator.dt > 0.0)) throw ConfigError("integrator.dt", "must be > 0");
        cfg.integrator.t_final = get_number(it, "integrator", "t_final");
        if (!(cfg.integrator.t_final >= cfg.integrator.dt))
            throw ConfigError("integrator.t_final", "must be >= dt");
        cfg.integrator.record_every =
            static_cast<int>(get_int_or(it, "integrator", "record_every", 10));
        if (cfg.integrator.record_every < 1)
            throw ConfigError("integrator.record_every", "must be >= 1");
    } else {
        throw ConfigError("integrator", "missing required key");
    }

    if (root.contains("diagnostics")) {
        const json& dg = root.at("diagnostics");
        if (!dg.is_object()) throw ConfigError("diagnostics", "expected an object");
        check_keys(dg, "diagnostics", {"gamma2d", "grid_size"});
        cfg.probes.gamma2d = get_bool_or(dg, "diagnostics", "gamma2d", true);
        cfg.probes.gamma2d_grid =
            static_cast<int>(get_int_or(dg, "diagnostics", "grid_size", 0));
        if (cfg.probes.gamma2d_grid < 0)
            throw ConfigError("diagnostics.grid_size", "must be >= 0");
    }

    if (root.contains("rate_fit")) {
        const json& rf = root.at("rate_fit");
        if (!rf.is_object()) throw ConfigError("rate_fit", "expected an object");
        check_keys(rf, "rate_fit", {"t1", "t2", "series"});
        cfg.rate_fit.given = true;
        cfg.rate_fit.t1 = get_number(rf, "rate_fit", "t1");
        cfg.rate_fit.t2 = get_number(rf, "rate_fit", "t2");
        if (!(cfg.rate_fit.t2 > cfg.rate_fit.t1))
            throw ConfigError("rate_fit.t2", "must exceed t1");
        if (rf.contains("series")) {
            const json& sr = rf.at("series");
            if (!sr.is_array()) throw ConfigError("rate_fit.series", "expected an array");
            for (const auto& e : sr) {
                if (!e.is_string()) throw ConfigError("rate_fit.series", "expected strings");
                std::string name = e.get<std::string>();
                if (name != "A" && name != "B" && name != "one_minus_cos_gamma2d")
                    throw ConfigError("rate_fit.series",
                                      "unknown series '" + name +
                                          "' (A | B | one_minus_cos_gamma2d)");
                cfg.rate_fit.series.push_back(name);
            }
        }
        if (cfg.rate_fit.series.empty()) cfg.rate_fit.series = {"A"};
    } else {
        cfg.rate_fit.given = false;
        cfg.rate_fit.t1 = 0.5 * cfg.integrator.t_final;  // second half skips transients
        cfg.rate_fit.t2 = cfg.integrator.t_final;
        cfg.rate_fit.series = {"A"};
    }

    if (root.contains("invariants")) {
        const json& inv = root.at("invariants");
        if (!inv.is_array()) throw ConfigError("invariants", "expected an array");
        for (const auto& e : inv) {
            if (!e.is_string()) throw ConfigError("invariants", "expected strings");
            std::string name = e.get<std::string>();
            const auto& known = known_invariants();
            if (std::find(known.begin(), known.end(), name) == known.end())
                throw ConfigError("invariants", "unknown invariant '" + name + "'");
            cfg.invariants.push_back(name);
        }
    } else {
        cfg.invariants = default_invariants(cfg.scenario);
    }

    if (root.contains("output")) {
        const json& out = root.at("output");
        if (!out.is_object()) throw ConfigError("output", "expected an object");
        check_keys(out, "output", {"dir"});
        cfg.output_dir = get_string(out, "output", "dir");
    }
    return cfg;
}

std::pair<FlockState, SystemParams> materialize(const RunConfig& cfg) {
    if (cfg.scenario == "ha") return ha_flock_config(cfg.ha);
    if (cfg.scenario == "fat-tail") return fat_tail_config(cfg.fat);
    if (cfg.scenario == "random-sectorial")
        return {random_sectorial(cfg.rs.seed, cfg.rs.N, cfg.rs.n, cfg.rs.epsilon, cfg.rs.knobs),
                cfg.params};
    return {cfg.state, cfg.params};
}

GameConfig parse_game_config(const std::string& text) {
    json root = parse_json(text);
    if (!root.is_object()) throw ConfigError("<document>", "expected a JSON object");
    check_keys(root, "",
               {"game", "multistart", "verify_grid", "sweep_sigmas", "descent", "output"});
    GameConfig cfg;
    if (!root.contains("game")) throw ConfigError("game", "missing required key");
    const json& g = root.at("game");
    if (!g.is_object()) throw ConfigError("game", "expected an object");
    check_keys(g, "game", {"theta", "m", "sigma", "p"});
    cfg.game.theta = get_number_array(g, "game", "theta");
    cfg.game.m = get_number_array(g, "game", "m");
    cfg.game.sigma = get_number(g, "game", "sigma");
    cfg.game.p = get_number_or(g, "game", "p", 1.0);
    try {
        cfg.game.check();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("game", e.what());
    }
    if (root.contains("multistart")) {
        const json& ms = root.at("multistart");
        if (!ms.is_object()) throw ConfigError("multistart", "expected an object");
        check_keys(ms, "multistart", {"seeds", "rng_seed"});
        cfg.multistart_seeds = static_cast<int>(get_int_or(ms, "multistart", "seeds", 100));
        if (cfg.multistart_seeds < 0) throw ConfigError("multistart.seeds", "must be >= 0");
        cfg.multistart_rng_seed =
            static_cast<std::uint64_t>(get_int_or(ms, "multistart", "rng_seed", 1));
    }
    cfg.verify_grid = static_cast<int>(get_int_or(root, "", "verify_grid", 10000));
    if (cfg.verify_grid < 2) throw ConfigError("verify_grid", "must be >= 2");
    if (root.contains("sweep_sigmas")) {
        cfg.sweep_sigmas = get_number_array(root, "", "sweep_sigmas");
        for (double s : cfg.sweep_sigmas)
            if (!(s > 0.0)) throw ConfigError("sweep_sigmas", "must be > 0");
    }
    if (root.contains("descent")) {
        const json& ds = root.at("descent");
        if (!ds.is_object()) throw ConfigError("descent", "expected an object");
        check_keys(ds, "descent", {"y0", "dt", "t_max", "record_every"});
        cfg.descent.given = true;
        if (ds.contains("y0")) {
            cfg.descent.y0 = get_number_array(ds, "descent", "y0");
            if (cfg.descent.y0.size() != cfg.game.theta.size())
                throw ConfigError("descent.y0", "size must match game.theta");
            for (double y : cfg.descent.y0)
                if (!(y > 0.0)) throw ConfigError("descent.y0", "must be > 0");
        }
        cfg.descent.dt = get_number_or(ds, "descent", "dt", 5e-3);
        if (!(cfg.descent.dt > 0.0)) throw ConfigError("descent.dt", "must be > 0");
        cfg.descent.t_max = get_number_or(ds, "descent", "t_max", 500.0);
        if (!(cfg.descent.t_max >= cfg.descent.dt))
            throw ConfigError("descent.t_max", "must be >= dt");
        cfg.descent.record_every =
            static_cast<int>(get_int_or(ds, "descent", "record_every", 10));
        if (cfg.descent.record_every < 1)
            throw ConfigError("descent.record_every", "must be >= 1");
    }
    if (root.contains("output")) {
        const json& out = root.at("output");
        if (!out.is_object()) throw ConfigError("output", "expected an object");
        check_keys(out, "output", {"dir"});
        cfg.output_dir = get_string(out, "output", "dir");
    }
    return cfg;
}

SweepConfig parse_sweep_config(const std::string& text) {
    json root = parse_json(text);
    if (!root.is_object()) throw ConfigError("<document>", "expected a JSON object");
    if (!root.contains("sweep")) throw ConfigError("sweep", "missing required key");
    const json& sw = root.at("sweep");
    if (!sw.is_object()) throw ConfigError("sweep", "expected an object");
    check_keys(sw, "sweep", {"parameter", "values"});
    SweepConfig cfg;
    cfg.parameter = get_string(sw, "sweep", "parameter");
    cfg.values = get_number_array(sw, "sweep", "values");
    if (cfg.values.empty()) throw ConfigError("sweep.values", "must not be empty");

    json base = root;
    base.erase("sweep");
    if (base.contains("output")) {
        const json& out = base.at("output");
        if (out.is_object() && out.contains("dir") && out.at("dir").is_string())
            cfg.output_dir = out.at("dir").get<std::string>();
        base.erase("output");  // each sweep point writes to its own subdirectory
    }
    cfg.base_json = base.dump();
    // validate the base config once with the first value substituted
    parse_config(substitute_parameter(cfg.base_json, cfg.parameter, cfg.values.front()));
    return cfg;
}

std::string substitute_parameter(const std::string& base_json, const std::string& dotted_path,
                                 double value) {
    json root = parse_json(base_json);
    json* node = &root;
    std::string rest = dotted_path;
    while (true) {
        auto dot = rest.find('.');
        std::string key = rest.substr(0, dot);
        if (!node->is_object())
            throw ConfigError(dotted_path, "path does not address an object");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            break;
        }
        if (!node->contains(key)) (*node)[key] = json::object();
        node = &(*node)[key];
        rest = rest.substr(dot + 1);
    }
    return root.dump();
}

}  // namespace csf
