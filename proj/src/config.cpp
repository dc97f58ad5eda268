#include "biogas/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace biogas {

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& where, const std::string& why) {
    throw config_error("config: " + where + ": " + why);
}

void check_keys(const json& j, const std::string& section,
                const std::set<std::string>& allowed) {
    if (!j.is_object()) {
        bad_key(section, "expected an object");
    }
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!allowed.count(key)) {
            bad_key(section + "." + key, "unknown key");
        }
    }
}

double get_num(const json& j, const std::string& section, const std::string& key) {
    if (!j.contains(key)) bad_key(section + "." + key, "missing required key");
    if (!j[key].is_number()) bad_key(section + "." + key, "expected a number");
    return j[key].get<double>();
}

double get_num_or(const json& j, const std::string& section, const std::string& key,
                  double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) bad_key(section + "." + key, "expected a number");
    return j[key].get<double>();
}

int get_int_or(const json& j, const std::string& section, const std::string& key,
               int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer()) bad_key(section + "." + key, "expected an integer");
    return j[key].get<int>();
}

std::vector<double> get_num_list(const json& j, const std::string& section,
                                 const std::string& key) {
    if (!j[key].is_array()) bad_key(section + "." + key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : j[key]) {
        if (!v.is_number()) bad_key(section + "." + key, "expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

GrowthModel parse_model(const json& j) {
    check_keys(j, "model", {"kind", "mu_max", "mu_bar", "K_s", "K_i"});
    if (!j.contains("kind") || !j["kind"].is_string()) {
        bad_key("model.kind", "missing or non-string");
    }
    const std::string kind = j["kind"].get<std::string>();
    try {
        if (kind == "monod") {
            return GrowthModel::monod(get_num(j, "model", "mu_max"), get_num(j, "model", "K_s"));
        }
        if (kind == "haldane") {
            return GrowthModel::haldane(get_num(j, "model", "mu_bar"),
                                        get_num(j, "model", "K_s"),
                                        get_num(j, "model", "K_i"));
        }
        if (kind == "contois") {
            return GrowthModel::contois(get_num(j, "model", "mu_max"),
                                        get_num(j, "model", "K_s"));
        }
    } catch (const std::invalid_argument& e) {
        bad_key("model", e.what());
    }
    bad_key("model.kind", "expected one of monod | haldane | contois");
}

LawSpec parse_law(const json& j, const std::string& where) {
    check_keys(j, where,
               {"type", "u", "s_star", "z1", "times", "values", "eps", "label"});
    if (!j.contains("type") || !j["type"].is_string()) {
        bad_key(where + ".type", "missing or non-string");
    }
    LawSpec spec;
    if (j.contains("label")) {
        if (!j["label"].is_string()) bad_key(where + ".label", "expected a string");
        spec.label = j["label"].get<std::string>();
    }
    const std::string type = j["type"].get<std::string>();
    if (type == "constant") {
        spec.type = LawType::Constant;
        spec.u0 = get_num(j, where, "u");
    } else if (type == "mrap") {
        if (j.contains("s_star")) {
            spec.type = LawType::MrapLevel;
            spec.s_star = get_num(j, where, "s_star");
        } else if (j.contains("z1")) {
            spec.type = LawType::MrapZ1;
            spec.z1 = get_num(j, where, "z1");
        } else {
            bad_key(where, "mrap law needs either s_star or z1");
        }
    } else if (type == "mrap_z0") {
        spec.type = LawType::MrapZ0;
    } else if (type == "mrap_curve") {
        spec.type = LawType::MrapCurve;
    } else if (type == "piecewise") {
        spec.type = LawType::Piecewise;
        if (!j.contains("times") || !j.contains("values")) {
            bad_key(where, "piecewise law needs times and values");
        }
        spec.times = get_num_list(j, where, "times");
        spec.values = get_num_list(j, where, "values");
        if (spec.times.size() != spec.values.size() || spec.times.empty()) {
            bad_key(where, "times and values must be non-empty and the same length");
        }
    } else if (type == "appendix") {
        spec.type = LawType::Appendix;
        spec.eps = get_num_or(j, where, "eps", 5.0);
        spec.appendix_s_star = get_num_or(j, where, "s_star", -1.0);
    } else {
        bad_key(where + ".type", "unknown law type '" + type + "'");
    }
    return spec;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("config: JSON parse error: ") + e.what());
    }
    check_keys(j, "config",
               {"model", "process", "initial_conditions", "laws", "horizon", "integrator",
                "grids", "appendix", "value_surface_z1", "output_dir", "jobs", "seedless"});

    ExperimentConfig cfg;
    cfg.model = GrowthModel::haldane(0.74, 9.28, 256.0);  // reference default
    if (j.contains("model")) cfg.model = parse_model(j["model"]);

    if (j.contains("process")) {
        check_keys(j["process"], "process", {"s_in", "u_max"});
        cfg.process.s_in = get_num(j["process"], "process", "s_in");
        cfg.process.u_max = get_num(j["process"], "process", "u_max");
    }
    if (!(cfg.process.s_in > 0.0)) bad_key("process.s_in", "must be > 0");
    if (!(cfg.process.u_max > 0.0)) bad_key("process.u_max", "must be > 0");

    if (j.contains("initial_conditions")) {
        if (!j["initial_conditions"].is_array()) {
            bad_key("initial_conditions", "expected an array");
        }
        int idx = 0;
        for (const auto& ji : j["initial_conditions"]) {
            const std::string where = "initial_conditions[" + std::to_string(idx++) + "]";
            check_keys(ji, where, {"s0", "x0", "z0", "z1"});
            InitialCondition ic;
            ic.s0 = get_num(ji, where, "s0");
            if (ic.s0 < 0.0 || ic.s0 >= cfg.process.s_in) {
                bad_key(where + ".s0", "must lie in [0, s_in)");
            }
            const bool has_x0 = ji.contains("x0");
            const bool has_z0 = ji.contains("z0");
            if (has_x0 == has_z0) {
                bad_key(where, "give exactly one of x0 or z0");
            }
            if (has_x0) {
                const double x0 = get_num(ji, where, "x0");
                if (!(x0 > 0.0)) bad_key(where + ".x0", "must be > 0");
                ic.z0 = x0 / (cfg.process.s_in - ic.s0);
            } else {
                ic.z0 = get_num(ji, where, "z0");
                if (!(ic.z0 > 0.0)) bad_key(where + ".z0", "must be > 0");
            }
            if (ji.contains("z1")) ic.z1 = get_num(ji, where, "z1");
            cfg.initial_conditions.push_back(ic);
        }
    }

    if (j.contains("laws")) {
        if (!j["laws"].is_array()) bad_key("laws", "expected an array");
        int idx = 0;
        for (const auto& jl : j["laws"]) {
            cfg.laws.push_back(parse_law(jl, "laws[" + std::to_string(idx++) + "]"));
        }
    }

    if (j.contains("horizon")) {
        check_keys(j["horizon"], "horizon", {"t0", "T"});
        cfg.t0 = get_num_or(j["horizon"], "horizon", "t0", 0.0);
        cfg.T = get_num(j["horizon"], "horizon", "T");
        if (!(cfg.T > cfg.t0)) bad_key("horizon.T", "must exceed t0");
    }

    if (j.contains("integrator")) {
        const json& ji = j["integrator"];
        check_keys(ji, "integrator",
                   {"step", "method", "slide_band", "thin", "abs_tol", "rel_tol"});
        cfg.sim.step = get_num_or(ji, "integrator", "step", 1e-3);
        if (!(cfg.sim.step > 0.0)) bad_key("integrator.step", "must be > 0");
        cfg.sim.slide_band = get_num_or(ji, "integrator", "slide_band", -1.0);
        cfg.sim.thin = get_int_or(ji, "integrator", "thin", 10);
        if (cfg.sim.thin < 1) bad_key("integrator.thin", "must be >= 1");
        cfg.sim.abs_tol = get_num_or(ji, "integrator", "abs_tol", 1e-9);
        cfg.sim.rel_tol = get_num_or(ji, "integrator", "rel_tol", 1e-9);
        if (ji.contains("method")) {
            if (!ji["method"].is_string()) bad_key("integrator.method", "expected a string");
            const std::string m = ji["method"].get<std::string>();
            if (m == "rk4") {
                cfg.sim.method = IntegratorMethod::RK4Fixed;
            } else if (m == "rk45") {
                cfg.sim.method = IntegratorMethod::RK45Adaptive;
            } else {
                bad_key("integrator.method", "expected rk4 | rk45");
            }
        }
    }

    if (j.contains("grids")) {
        const json& jg = j["grids"];
        check_keys(jg, "grids",
                   {"z1_points", "T_points", "T_min", "T_max", "x0_min", "x0_max", "x0_points",
                    "s0_min", "s0_max", "s0_points", "map_times"});
        GridSpec& g = cfg.grids;
        g.z1_points = get_int_or(jg, "grids", "z1_points", g.z1_points);
        g.T_points = get_int_or(jg, "grids", "T_points", g.T_points);
        g.T_min = get_num_or(jg, "grids", "T_min", g.T_min);
        g.T_max = get_num_or(jg, "grids", "T_max", g.T_max);
        g.x0_min = get_num_or(jg, "grids", "x0_min", g.x0_min);
        g.x0_max = get_num_or(jg, "grids", "x0_max", g.x0_max);
        g.x0_points = get_int_or(jg, "grids", "x0_points", g.x0_points);
        g.s0_min = get_num_or(jg, "grids", "s0_min", g.s0_min);
        g.s0_max = get_num_or(jg, "grids", "s0_max", g.s0_max);
        g.s0_points = get_int_or(jg, "grids", "s0_points", g.s0_points);
        if (jg.contains("map_times")) g.map_times = get_num_list(jg, "grids", "map_times");
        if (g.z1_points < 1 || g.T_points < 1 || g.x0_points < 1 || g.s0_points < 1) {
            bad_key("grids", "grid point counts must be >= 1");
        }
        if (!(g.T_min > 0.0) || g.T_max < g.T_min) {
            bad_key("grids", "need 0 < T_min <= T_max");
        }
    }

    if (j.contains("appendix")) {
        const json& ja = j["appendix"];
        check_keys(ja, "appendix", {"eps", "s_star", "N_max", "traj_N"});
        cfg.appendix.eps = get_num_or(ja, "appendix", "eps", 5.0);
        cfg.appendix.s_star = get_num_or(ja, "appendix", "s_star", -1.0);
        cfg.appendix.N_max = get_int_or(ja, "appendix", "N_max", 10);
        cfg.appendix.traj_N = get_int_or(ja, "appendix", "traj_N", 4);
        if (cfg.appendix.N_max < 1 || cfg.appendix.N_max > 26) {
            bad_key("appendix.N_max", "must be in [1, 26]");
        }
        if (cfg.appendix.traj_N < 0 || cfg.appendix.traj_N > 6) {
            bad_key("appendix.traj_N", "must be in [0, 6]");
        }
    }

    cfg.value_surface_z1 = get_num_or(j, "config", "value_surface_z1", 1.0);

    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string()) bad_key("output_dir", "expected a string");
        cfg.output_dir = j["output_dir"].get<std::string>();
    }
    cfg.jobs = get_int_or(j, "config", "jobs", 0);
    if (cfg.jobs < 0) bad_key("jobs", "must be >= 0");
    if (j.contains("seedless")) {
        if (!j["seedless"].is_boolean()) bad_key("seedless", "expected a boolean");
        cfg.seedless = j["seedless"].get<bool>();
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw config_error("config: cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

const char* law_type_name(LawType t) {
    switch (t) {
        case LawType::Constant: return "constant";
        case LawType::MrapLevel: return "mrap_s";
        case LawType::MrapZ1: return "mrap_z1";
        case LawType::MrapZ0: return "mrap_z0";
        case LawType::MrapCurve: return "mrap_curve";
        case LawType::Piecewise: return "piecewise";
        case LawType::Appendix: return "appendix";
    }
    return "?";
}

std::string law_label(const LawSpec& spec) {
    if (!spec.label.empty()) return spec.label;
    std::ostringstream os;
    os << law_type_name(spec.type);
    if (spec.type == LawType::Constant) os << "_" << spec.u0;
    if (spec.type == LawType::MrapLevel) os << "_" << spec.s_star;
    if (spec.type == LawType::MrapZ1) os << "_" << spec.z1;
    std::string s = os.str();
    for (char& c : s) {
        if (c == '.') c = 'p';
    }
    return s;
}

}  // namespace biogas
