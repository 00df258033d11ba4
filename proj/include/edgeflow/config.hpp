/// @file config.hpp
/// JSON run configuration: parsing, aggregated validation, defaulting.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "edgeflow/flow.hpp"
#include "edgeflow/geometry.hpp"
#include "json.hpp"

namespace edgeflow {

struct SpectralParams {
    int iters = 2000;
    double step = 0.02;
    bool enabled = true;
};

struct OutputParams {
    std::string directory; // empty: resolved by the CLI (flag, env var, or ./runs)
    std::vector<std::string> formats = {"csv", "json"};
};

/* Fully validated run description.  flow.t_end is meaningful only when
 * t_end_given; otherwise the orchestration derives t_end = 10/b from the
 * initial curvature. */
struct RunConfig {
    EdgeModel model;
    int K = 256;
    double gamma = 2.0;
    FlowParams flow;
    bool t_end_given = false;
    SpectralParams spectral;
    OutputParams output;
};

// carries every violation found, not just the first
struct ConfigError : std::runtime_error {
    explicit ConfigError(std::vector<std::string> violations_);
    std::vector<std::string> violations;
};

/* Reads and validates a JSON config file.  Defaults: mesh.K=256, mesh.gamma=2,
 * flow.tau=1e-3, flow.stop_tol=1e-6, flow.max_steps=200000,
 * flow.scheme="semi_implicit", model.fiber_scal=n(n-1), model.fiber_lambda0=n+1,
 * spectral {2000, 0.02, enabled}, output.formats=["csv","json"].  Unknown keys
 * anywhere are violations.  Throws ConfigError (aggregated) or
 * std::runtime_error for unreadable/unparseable input. */
RunConfig parse_config(const std::string& path);
RunConfig parse_config_json(const nlohmann::json& j);

// resolved snapshot; parse_config_json(config_to_json(c)) round-trips
nlohmann::json config_to_json(const RunConfig& config);

} // namespace edgeflow
