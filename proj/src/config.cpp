#include "edgeflow/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace edgeflow {

using nlohmann::json;

namespace {

std::string join_violations(const std::vector<std::string>& v) {
    std::ostringstream os;
    os << "invalid configuration (" << v.size() << (v.size() == 1 ? " problem" : " problems")
       << "):";
    for (const std::string& s : v) os << "\n  - " << s;
    return os.str();
}

/* Field extraction that records problems instead of throwing, so one pass
 * reports every violation. */
struct Checker {
    std::vector<std::string> bad;

    void unknown_keys(const json& obj, const std::string& prefix,
                      const std::set<std::string>& allowed) {
        for (const auto& item : obj.items())
            if (!allowed.count(item.key()))
                bad.push_back(prefix + item.key() + ": unknown key");
    }

    bool has(const json& obj, const char* key) { return obj.contains(key); }

    double number(const json& obj, const std::string& path, const char* key, double def) {
        if (!obj.contains(key)) return def;
        if (!obj[key].is_number()) {
            bad.push_back(path + key + ": must be a number");
            return def;
        }
        return obj[key].get<double>();
    }

    long integer(const json& obj, const std::string& path, const char* key, long def) {
        if (!obj.contains(key)) return def;
        if (!obj[key].is_number_integer()) {
            bad.push_back(path + key + ": must be an integer");
            return def;
        }
        return obj[key].get<long>();
    }

    std::string text(const json& obj, const std::string& path, const char* key,
                     const std::string& def) {
        if (!obj.contains(key)) return def;
        if (!obj[key].is_string()) {
            bad.push_back(path + key + ": must be a string");
            return def;
        }
        return obj[key].get<std::string>();
    }

    bool boolean(const json& obj, const std::string& path, const char* key, bool def) {
        if (!obj.contains(key)) return def;
        if (!obj[key].is_boolean()) {
            bad.push_back(path + key + ": must be a boolean");
            return def;
        }
        return obj[key].get<bool>();
    }
};

} // namespace

ConfigError::ConfigError(std::vector<std::string> violations_)
    : std::runtime_error(join_violations(violations_)), violations(std::move(violations_)) {}

RunConfig parse_config_json(const json& j) {
    Checker ck;
    RunConfig cfg;
    if (!j.is_object()) throw ConfigError({"top level: must be a JSON object"});
    ck.unknown_keys(j, "", {"model", "mesh", "flow", "spectral", "output"});

    // ---- model ----
    int m = 0;
    bool m_ok = false;
    WarpSpec warp;
    bool warp_ok = false;
    double x_max = 0.0;
    if (!j.contains("model") || !j["model"].is_object()) {
        ck.bad.push_back("model: required block missing");
    } else {
        const json& jm = j["model"];
        ck.unknown_keys(jm, "model.",
                        {"m", "n", "x_max", "warp", "fiber_scal", "fiber_lambda0"});
        if (!jm.contains("m"))
            ck.bad.push_back("model.m: required");
        else {
            m = int(ck.integer(jm, "model.", "m", 0));
            if (m >= 3)
                m_ok = true;
            else if (jm["m"].is_number_integer())
                ck.bad.push_back("model.m: must be >= 3");
        }
        if (m_ok && jm.contains("n")) {
            const long n = ck.integer(jm, "model.", "n", m - 1);
            if (n != m - 1) ck.bad.push_back("model.n: must equal m - 1");
        }
        if (!jm.contains("x_max"))
            ck.bad.push_back("model.x_max: required");
        else {
            x_max = ck.number(jm, "model.", "x_max", 0.0);
            if (!(x_max > 0.0)) ck.bad.push_back("model.x_max: must be a positive number");
        }

        if (!jm.contains("warp") || !jm["warp"].is_object()) {
            ck.bad.push_back("model.warp: required block missing");
        } else {
            const json& jw = jm["warp"];
            ck.unknown_keys(jw, "model.warp.", {"kind", "eps", "shape"});
            const std::string kind = ck.text(jw, "model.warp.", "kind", "");
            const double eps = ck.number(jw, "model.warp.", "eps", 0.0);
            const std::string shape = ck.text(jw, "model.warp.", "shape", "x3gauss");
            if (eps < 0.0) ck.bad.push_back("model.warp.eps: must be >= 0");
            if (shape != "x3gauss" && shape != "x2gauss")
                ck.bad.push_back("model.warp.shape: must be one of x3gauss|x2gauss");
            if (kind == "linear") {
                warp = linear_warp();
                warp_ok = true;
            } else if (kind == "sinh") {
                warp = sinh_warp();
                warp_ok = true;
            } else if (kind == "perturbed_sinh") {
                if (eps >= 0.0 && (shape == "x3gauss" || shape == "x2gauss")) {
                    warp = perturbed_sinh_warp(eps, shape);
                    warp_ok = true;
                }
            } else {
                ck.bad.push_back("model.warp.kind: must be one of linear|sinh|perturbed_sinh");
            }
        }

        if (m_ok) {
            const double n = m - 1;
            const double feasible = n * (n - 1.0);
            const double fiber_scal = ck.number(jm, "model.", "fiber_scal", feasible);
            if (std::abs(fiber_scal - feasible) > 1e-12) {
                std::ostringstream os;
                os << "model.fiber_scal: the cone obstruction requires S_F = n(n-1) = "
                   << feasible << " for bounded curvature at the tip";
                ck.bad.push_back(os.str());
            }
            const double lambda0 = ck.number(jm, "model.", "fiber_lambda0", n + 1.0);
            if (lambda0 < 0.0) ck.bad.push_back("model.fiber_lambda0: must be >= 0");
            if (m_ok && warp_ok && x_max > 0.0 && ck.bad.empty())
                cfg.model = make_model(m, warp, x_max, fiber_scal, lambda0);
        }
    }

    // ---- mesh ----
    if (j.contains("mesh")) {
        if (!j["mesh"].is_object())
            ck.bad.push_back("mesh: must be a block");
        else {
            const json& jm = j["mesh"];
            ck.unknown_keys(jm, "mesh.", {"K", "gamma"});
            cfg.K = int(ck.integer(jm, "mesh.", "K", 256));
            cfg.gamma = ck.number(jm, "mesh.", "gamma", 2.0);
        }
    }
    if (cfg.K < 16) ck.bad.push_back("mesh.K: must be an integer >= 16");
    if (!(cfg.gamma >= 1.0)) ck.bad.push_back("mesh.gamma: must be >= 1");

    // ---- flow ----
    if (j.contains("flow")) {
        if (!j["flow"].is_object())
            ck.bad.push_back("flow: must be a block");
        else {
            const json& jf = j["flow"];
            ck.unknown_keys(jf, "flow.", {"tau", "t_end", "stop_tol", "max_steps", "scheme"});
            cfg.flow.tau = ck.number(jf, "flow.", "tau", 1e-3);
            if (jf.contains("t_end")) {
                cfg.flow.t_end = ck.number(jf, "flow.", "t_end", 0.0);
                cfg.t_end_given = true;
                if (!(cfg.flow.t_end > 0.0)) ck.bad.push_back("flow.t_end: must be > 0");
            }
            cfg.flow.stop_tol = ck.number(jf, "flow.", "stop_tol", 1e-6);
            cfg.flow.max_steps = ck.integer(jf, "flow.", "max_steps", 200000);
            const std::string scheme = ck.text(jf, "flow.", "scheme", "semi_implicit");
            if (scheme == "semi_implicit")
                cfg.flow.scheme = Scheme::SemiImplicit;
            else if (scheme == "explicit_rk2")
                cfg.flow.scheme = Scheme::ExplicitRK2;
            else
                ck.bad.push_back("flow.scheme: must be semi_implicit|explicit_rk2");
        }
    }
    if (!(cfg.flow.tau > 0.0)) ck.bad.push_back("flow.tau: must be > 0");
    if (cfg.flow.stop_tol < 0.0) ck.bad.push_back("flow.stop_tol: must be >= 0");
    if (cfg.flow.max_steps < 1) ck.bad.push_back("flow.max_steps: must be an integer >= 1");

    // ---- spectral ----
    if (j.contains("spectral")) {
        if (!j["spectral"].is_object())
            ck.bad.push_back("spectral: must be a block");
        else {
            const json& js = j["spectral"];
            ck.unknown_keys(js, "spectral.", {"iters", "step", "enabled"});
            cfg.spectral.iters = int(ck.integer(js, "spectral.", "iters", 2000));
            cfg.spectral.step = ck.number(js, "spectral.", "step", 0.02);
            cfg.spectral.enabled = ck.boolean(js, "spectral.", "enabled", true);
        }
    }
    if (cfg.spectral.iters < 1) ck.bad.push_back("spectral.iters: must be an integer >= 1");
    if (!(cfg.spectral.step > 0.0)) ck.bad.push_back("spectral.step: must be > 0");

    // ---- output ----
    if (j.contains("output")) {
        if (!j["output"].is_object())
            ck.bad.push_back("output: must be a block");
        else {
            const json& jo = j["output"];
            ck.unknown_keys(jo, "output.", {"directory", "formats"});
            cfg.output.directory = ck.text(jo, "output.", "directory", "");
            if (jo.contains("formats")) {
                if (!jo["formats"].is_array()) {
                    ck.bad.push_back("output.formats: must be an array of strings");
                } else {
                    cfg.output.formats.clear();
                    for (const auto& f : jo["formats"]) {
                        if (!f.is_string() ||
                            (f != json("csv") && f != json("json")))
                            ck.bad.push_back("output.formats: entries must be csv|json");
                        else
                            cfg.output.formats.push_back(f.get<std::string>());
                    }
                    if (cfg.output.formats.empty())
                        ck.bad.push_back("output.formats: must not be empty");
                }
            }
        }
    }

    if (!ck.bad.empty()) throw ConfigError(std::move(ck.bad));
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("config parse error: ") + e.what());
    }
    return parse_config_json(j);
}

json config_to_json(const RunConfig& cfg) {
    json jw;
    switch (cfg.model.warp.kind) {
        case WarpKind::Linear: jw["kind"] = "linear"; break;
        case WarpKind::Sinh: jw["kind"] = "sinh"; break;
        case WarpKind::PerturbedSinh:
            jw["kind"] = "perturbed_sinh";
            jw["eps"] = cfg.model.warp.eps;
            jw["shape"] = cfg.model.warp.shape_id.empty() ? "x3gauss" : cfg.model.warp.shape_id;
            break;
    }
    json j;
    j["model"] = {{"m", cfg.model.m},
                  {"n", cfg.model.n},
                  {"x_max", cfg.model.x_max},
                  {"fiber_scal", cfg.model.fiber_scal},
                  {"fiber_lambda0", cfg.model.fiber_lambda0},
                  {"warp", jw}};
    j["mesh"] = {{"K", cfg.K}, {"gamma", cfg.gamma}};
    j["flow"] = {{"tau", cfg.flow.tau},
                 {"stop_tol", cfg.flow.stop_tol},
                 {"max_steps", cfg.flow.max_steps},
                 {"scheme", cfg.flow.scheme == Scheme::SemiImplicit ? "semi_implicit"
                                                                    : "explicit_rk2"}};
    if (cfg.t_end_given) j["flow"]["t_end"] = cfg.flow.t_end;
    j["spectral"] = {{"iters", cfg.spectral.iters},
                     {"step", cfg.spectral.step},
                     {"enabled", cfg.spectral.enabled}};
    j["output"] = {{"directory", cfg.output.directory}, {"formats", cfg.output.formats}};
    return j;
}

} // namespace edgeflow
