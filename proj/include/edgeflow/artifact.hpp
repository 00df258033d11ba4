/// @file artifact.hpp
/// Run artifacts on disk: series tables, state vectors, verdicts, reports,
/// and their loss-free round-trip for re-auditing.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "edgeflow/config.hpp"
#include "edgeflow/diagnostics.hpp"
#include "edgeflow/flow.hpp"
#include "edgeflow/spectral.hpp"
#include "json.hpp"

namespace edgeflow {

struct SpectralSummary {
    double lambda1 = 0.0;
    double nu_estimate = 0.0;
    std::array<int, 3> signs{0, 0, 0};
    double identity_dev = 0.0;
    bool pass = false;
};

/* Everything a run leaves behind.  Written as a directory:
 *   config.json      resolved configuration (reparseable)
 *   series.csv       one row per recorded step
 *   final_state.csv  two columns x, u
 *   verdicts.json    the pass/fail table
 *   reports.json     context the verdicts were computed from
 *   meta.json        version + wall clock
 * Doubles go through %.17g (csv) or native JSON round-trip, so re-auditing
 * reproduces verdicts bit-exactly. */
struct RunArtifact {
    RunConfig config;
    FlowRecord record;
    std::vector<double> final_x, final_u;
    std::vector<Verdict> verdicts;
    std::optional<SpectralSummary> spectral;
    ConvergenceReport convergence;
    double mp_max_u_excess = 0.0;    // worst per-row elliptic monitor excess
    double mp_max_scal_excess = 0.0; // worst per-row parabolic monitor excess
    std::string version;
    double wall_seconds = 0.0;
};

/* The one verdict-assembly path, shared by cmd_run (fresh data) and cmd_audit
 * (data re-read from disk): monotonicity and extremum-bound audits, the
 * maximum-principle and devolved-identity monitors, tail decay fits, and the
 * trichotomy outcome when spectral ran. */
std::vector<Verdict> standard_verdicts(const EdgeModel& model, const FlowRecord& record,
                                       double noise_floor,
                                       double mp_max_u_excess, double mp_max_scal_excess,
                                       const std::optional<SpectralSummary>& spectral);

// creates dir (parents included) and writes every file the formats ask for
void write_artifact(const std::string& dir, const RunArtifact& artifact);

// inverse of write_artifact; throws std::runtime_error on missing/invalid files
RunArtifact read_artifact(const std::string& dir);

// %.17g, the shortest text that round-trips a double through strtod
std::string format_double(double v);

} // namespace edgeflow
