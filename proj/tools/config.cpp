#include "config.hpp"

#include <fstream>
#include <set>

#include "spiral/errors.hpp"

namespace spiralflow {

using nlohmann::json;

const char* to_string(Command c) {
    switch (c) {
        case Command::Background: return "background";
        case Command::Certify: return "certify";
        case Command::SolveIrrotational: return "solve-irrotational";
        case Command::SolveRotational: return "solve-rotational";
        case Command::SolveAxisym: return "solve-axisym";
        case Command::VerifyAll: return "verify-all";
    }
    return "?";
}

namespace {

void only_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [k, v] : obj.items())
        if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

double number(const json& obj, const std::string& key, const std::string& where, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return v.get<double>();
}

int integer(const json& obj, const std::string& key, const std::string& where, int fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
    return v.get<int>();
}

Command parse_command(const std::string& s) {
    for (Command c : {Command::Background, Command::Certify, Command::SolveIrrotational,
                      Command::SolveRotational, Command::SolveAxisym, Command::VerifyAll})
        if (s == to_string(c)) return c;
    throw ConfigError("command: unknown command '" + s + "'");
}

spiral::ClosedForm parse_form(const json& v, const std::string& where, bool periodic, bool allow_bump) {
    only_keys(v, where, {"tag", "amplitude", "k"});
    if (!v.contains("tag") || !v.at("tag").is_string()) throw ConfigError(where + ".tag: expected a string");
    spiral::ClosedForm f;
    f.tag = v.at("tag").get<std::string>();
    f.amplitude = number(v, "amplitude", where, 0.0);
    f.k = integer(v, "k", where, 1);
    if (!spiral::known_tag(f.tag)) throw ConfigError(where + ".tag: unresolvable closed form '" + f.tag + "'");
    if (!(f.amplitude >= 0)) throw ConfigError(where + ".amplitude: must be >= 0");
    if (f.k < 0) throw ConfigError(where + ".k: must be >= 0");
    if (f.tag == "eps_bump_k" && !allow_bump) throw ConfigError(where + ".tag: eps_bump_k is only allowed for b");
    if (periodic && (f.tag == "eps_sin_pi_k" || f.tag == "eps_cos_pi_k" || f.tag == "eps_poly3"))
        throw ConfigError(where + ".tag: '" + f.tag + "' is not periodic in theta");
    return f;
}

void parse_boundary(const json& b, RunConfig& cfg) {
    const bool slab = cfg.command == Command::SolveAxisym;
    if (slab) {
        only_keys(b, "boundary", {"b", "U2en", "U3en", "Ken", "Sen", "Phien", "U1ex", "Phiex"});
        auto& d = cfg.slab;
        for (auto [key, dst] : {std::pair{"b", &d.b}, {"U2en", &d.U2en}, {"U3en", &d.U3en}, {"Ken", &d.Ken},
                                {"Sen", &d.Sen}, {"Phien", &d.Phien}, {"U1ex", &d.U1ex}, {"Phiex", &d.Phiex}})
            if (b.contains(key)) *dst = parse_form(b.at(key), std::string("boundary.") + key, false,
                                                  std::string(key) == "b");
        return;
    }
    only_keys(b, "boundary", {"b", "U1en", "U2en", "Een", "Phiex", "Ken", "Sen"});
    auto& d = cfg.annulus;
    for (auto [key, dst] : {std::pair{"b", &d.b}, {"U1en", &d.U1en}, {"U2en", &d.U2en}, {"Een", &d.Een},
                            {"Phiex", &d.Phiex}, {"Ken", &d.Ken}, {"Sen", &d.Sen}})
        if (b.contains(key)) *dst = parse_form(b.at(key), std::string("boundary.") + key, true,
                                              std::string(key) == "b");
    if (cfg.command == Command::SolveIrrotational &&
        ((d.Ken.tag != "zero" && d.Ken.amplitude > 0) || (d.Sen.tag != "zero" && d.Sen.amplitude > 0)))
        throw ConfigError("boundary: Ken/Sen perturbations need solve-rotational");
}

}  // namespace

RunConfig parse_config(const json& j) {
    only_keys(j, "config", {"command", "run_id", "params", "grid", "boundary", "tolerances", "background",
                            "certify", "output"});
    RunConfig cfg;
    if (!j.contains("command") || !j.at("command").is_string()) throw ConfigError("command: required string");
    cfg.command = parse_command(j.at("command").get<std::string>());
    if (j.contains("run_id")) {
        if (!j.at("run_id").is_string()) throw ConfigError("run_id: expected a string");
        cfg.run_id = j.at("run_id").get<std::string>();
    }
    if (j.contains("output")) {
        if (!j.at("output").is_string()) throw ConfigError("output: expected a string");
        cfg.output = j.at("output").get<std::string>();
    }

    if (j.contains("params")) {
        const json& p = j.at("params");
        only_keys(p, "params", {"gamma", "r0", "b0", "rho0", "U1_0", "U2_0", "S0", "E0"});
        auto& q = cfg.params;
        q.gamma = number(p, "gamma", "params", q.gamma);
        q.r0 = number(p, "r0", "params", q.r0);
        q.b0 = number(p, "b0", "params", q.b0);
        q.rho0 = number(p, "rho0", "params", q.rho0);
        q.U1_0 = number(p, "U1_0", "params", q.U1_0);
        q.U2_0 = number(p, "U2_0", "params", q.U2_0);
        q.S0 = number(p, "S0", "params", q.S0);
        q.E0 = number(p, "E0", "params", q.E0);
    }
    try {
        cfg.params.validate();
    } catch (const spiral::SolverError& e) {
        throw ConfigError(std::string("params: ") + e.what());
    }

    if (j.contains("grid")) {
        const json& g = j.at("grid");
        only_keys(g, "grid", {"r1", "radial_nodes", "modes", "theta_samples", "z_nodes"});
        cfg.r1 = number(g, "r1", "grid", cfg.r1);
        cfg.radial_nodes = integer(g, "radial_nodes", "grid", cfg.radial_nodes);
        cfg.modes = integer(g, "modes", "grid", cfg.modes);
        cfg.theta_samples = integer(g, "theta_samples", "grid", cfg.theta_samples);
        cfg.z_nodes = integer(g, "z_nodes", "grid", cfg.z_nodes);
    }
    if (!(cfg.r1 > cfg.params.r0)) throw ConfigError("grid.r1: must exceed r0");
    if (cfg.radial_nodes < 16) throw ConfigError("grid.radial_nodes: must be >= 16");
    if (cfg.modes < 1) throw ConfigError("grid.modes: must be >= 1");
    if (cfg.theta_samples != 0 && cfg.theta_samples < 2 * (2 * cfg.modes + 1))
        throw ConfigError("grid.theta_samples: need 0 or at least 2(2M+1)");
    if (cfg.z_nodes < 5 || cfg.z_nodes % 2 == 0) throw ConfigError("grid.z_nodes: must be odd and >= 5");

    if (j.contains("boundary")) parse_boundary(j.at("boundary"), cfg);

    if (j.contains("tolerances")) {
        const json& t = j.at("tolerances");
        only_keys(t, "tolerances", {"fixed_point", "outer", "delta", "delta_e", "delta_axi", "max_iters", "ode",
                                    "bernoulli", "bernoulli_flow", "drift_rotational", "drift_axisym", "wall"});
        auto& x = cfg.tol;
        x.fixed_point = number(t, "fixed_point", "tolerances", x.fixed_point);
        x.outer = number(t, "outer", "tolerances", x.outer);
        x.delta = number(t, "delta", "tolerances", x.delta);
        x.delta_e = number(t, "delta_e", "tolerances", x.delta_e);
        x.delta_axi = number(t, "delta_axi", "tolerances", x.delta_axi);
        x.max_iters = integer(t, "max_iters", "tolerances", x.max_iters);
        x.ode = number(t, "ode", "tolerances", x.ode);
        x.bernoulli = number(t, "bernoulli", "tolerances", x.bernoulli);
        x.bernoulli_flow = number(t, "bernoulli_flow", "tolerances", x.bernoulli_flow);
        x.drift_rotational = number(t, "drift_rotational", "tolerances", x.drift_rotational);
        x.drift_axisym = number(t, "drift_axisym", "tolerances", x.drift_axisym);
        x.wall = number(t, "wall", "tolerances", x.wall);
        for (double v : {x.fixed_point, x.outer, x.delta, x.delta_e, x.delta_axi, x.ode, x.bernoulli,
                         x.bernoulli_flow, x.drift_rotational, x.drift_axisym, x.wall})
            if (!(v > 0)) throw ConfigError("tolerances: all tolerances must be positive");
        if (x.max_iters < 1) throw ConfigError("tolerances.max_iters: must be >= 1");
    }

    if (j.contains("background")) {
        const json& b = j.at("background");
        only_keys(b, "background", {"r_max", "admissible_tol"});
        cfg.r_max = number(b, "r_max", "background", cfg.r_max);
        cfg.admissible_tol = number(b, "admissible_tol", "background", cfg.admissible_tol);
        if (!(cfg.r_max >= cfg.params.r0)) throw ConfigError("background.r_max: must be >= r0");
        if (!(cfg.admissible_tol > 0)) throw ConfigError("background.admissible_tol: must be positive");
    }
    if (j.contains("certify")) {
        const json& c = j.at("certify");
        only_keys(c, "certify", {"delta", "soundness_factor"});
        cfg.certify_delta = number(c, "delta", "certify", cfg.certify_delta);
        cfg.soundness_factor = integer(c, "soundness_factor", "certify", cfg.soundness_factor);
        if (!(cfg.certify_delta >= 0)) throw ConfigError("certify.delta: must be >= 0");
        if (cfg.soundness_factor < 1) throw ConfigError("certify.soundness_factor: must be >= 1");
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config '" + path + "'");
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("parse error: ") + e.what());
    }
    return parse_config(j);
}

}  // namespace spiralflow
