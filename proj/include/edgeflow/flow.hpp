/// @file flow.hpp
/// Time integration of the normalized Yamabe flow for the radial conformal factor,
/// with per-step diagnostics.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "edgeflow/geometry.hpp"
#include "edgeflow/laplacian.hpp"
#include "edgeflow/mesh.hpp"

namespace edgeflow {

/* Conformal factor u at flow time t, with cached derived fields.  Caches always
 * equal recomputation from u (refresh_state recomputes all of them). */
struct ConformalState {
    double t = 0.0;
    std::vector<double> u;
    std::vector<double> lap_u;  // Delta_h u
    std::vector<double> scal_g; // conformal scalar curvature
    double rho = 0.0;
    double vol = 0.0;
};

enum class Scheme { SemiImplicit, ExplicitRK2 };

struct FlowParams {
    double tau = 1e-3;
    double t_end = 1.0;
    double stop_tol = 1e-6;  // on ||scal - rho||_inf; 0 disables early stop
    long max_steps = 200000;
    Scheme scheme = Scheme::SemiImplicit;

    bool require_negative = true;   // insist scal(g_init) < 0 at every node
    bool unnormalized_debug = false; // drop the rho term (volume no longer preserved)
    bool store_trajectory = false;   // keep u per recorded step (restart/self-convergence checks)
    double snapshot_time = -1.0;     // mid-run state capture; < 0 means t_end/2
};

struct FlowRecordRow {
    double t, rho, vol;
    double scal_min, scal_max;
    double u_min, u_max;
    double scal_minus_rho_sup;
    double dudt_sup;
    // maximum-principle monitors: measured violation, 0 when clean
    double mp_u_violation;    // elliptic, on u at its arg-extrema
    double mp_scal_violation; // parabolic, on scal at its argmax
    bool mp_ok() const { return mp_u_violation == 0.0 && mp_scal_violation == 0.0; }
};

struct FlowRecord {
    std::vector<FlowRecordRow> rows;
    std::string termination; // "stop_tol" | "t_end" | "max_steps" | "aborted: ..."
    bool aborted = false;

    // initial-data context the audits need
    std::vector<double> scal0;
    double a_bound = 0.0; // max |scal0|
    double b_rate = 0.0;  // -max scal0 (the decay rate b)
    double rho0 = 0.0;
    double tau = 0.0;

    double max_identity_dev = 0.0; // sup over steps of |rhs_devolved - (m-2)/4 (rho-scal) u|

    ConformalState snapshot; // mid-run state, for restart_check
    bool has_snapshot = false;
    int snapshot_row = -1; // row index the snapshot was taken at
    std::vector<std::vector<double>> trajectory; // u per row, when requested
};

struct FlowResult {
    FlowRecord record;
    ConformalState final_state;
};

/* Thrown when a step fails mid-run; carries whatever was recorded so partial
 * artifacts can still be written. */
struct FlowAborted : std::runtime_error {
    FlowAborted(const std::string& msg, FlowRecord rec, ConformalState last)
        : std::runtime_error(msg), record(std::move(rec)), last_state(std::move(last)) {}
    FlowRecord record;
    ConformalState last_state;
};

/* Initial state from node values; rejects nonpositive or degenerate u
 * (min u <= 1e-8) and fills the caches. */
ConformalState make_initial_state(const std::vector<double>& u0,
                                  const EdgeModel& model, const Mesh& mesh);

// recompute lap_u, scal_g, rho, vol from u
void refresh_state(ConformalState& state, const EdgeModel& model, const Mesh& mesh);

/* du/dt = (m-1) u^{1-N} Delta u - (m-2)/4 scal0 u^{2-N} + (m-2)/4 rho u,
 * with rho evaluated from the current state. */
std::vector<double> rhs_devolved(const ConformalState& state, const EdgeModel& model,
                                 const Mesh& mesh);

/* One step of (I - tau diag(a^k) Delta_h) u^{k+1} = u^k + tau F^k with
 * a^k = (m-1)(u^k)^{1-N}, solved in increment form; caches refreshed, t += tau.
 * Throws on solver failure or positivity loss (tau too large). */
ConformalState step_semi_implicit(const ConformalState& state, const FlowParams& params,
                                  const EdgeModel& model, const Mesh& mesh);

// explicit Heun step; debug oracle only (stability demands tiny tau)
ConformalState step_explicit_rk2(const ConformalState& state, const FlowParams& params,
                                 const EdgeModel& model, const Mesh& mesh);

/* Integrates until t >= t_end, ||scal - rho||_inf < stop_tol, or max_steps.
 * Requires validate_feasibility to pass and (by default) strictly negative
 * initial curvature.  On a failed step throws FlowAborted with the partial
 * record. */
FlowResult run_flow(const ConformalState& init, const FlowParams& params,
                    const EdgeModel& model, const Mesh& mesh);

struct RestartReport {
    double sup_diff = 0.0;   // glued vs uninterrupted trajectory, common interval
    double threshold = 0.0;  // 5 tau
    bool pass = false;
    double restart_t = 0.0;
};

/* Re-runs the flow from the record's stored mid-run state and compares against
 * the uninterrupted trajectory (requires store_trajectory). */
RestartReport restart_check(const FlowRecord& record, const EdgeModel& model,
                            const Mesh& mesh, const FlowParams& params);

} // namespace edgeflow
