#include "edgeflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "edgeflow/diagnostics.hpp"

namespace edgeflow {

namespace {

struct Workspace {
    DiscreteLaplacian op;
    CurvatureField scal0;
    int m = 0;
    double N = 0.0, cprime = 0.0; // N = (m+2)/(m-2), cprime = (m-2)/4
};

Workspace make_workspace(const EdgeModel& model, const Mesh& mesh) {
    Workspace ws;
    ws.op = assemble_laplacian(mesh, model, 0.0);
    ws.scal0 = initial_curvature(model, mesh);
    ws.m = model.m;
    ws.N = conf_N(model.m);
    ws.cprime = double(model.m - 2) / 4.0;
    return ws;
}

void refresh_with(const Workspace& ws, const Mesh& mesh, ConformalState& st) {
    for (double v : st.u)
        if (!(v > 0.0)) throw std::runtime_error("conformal factor lost positivity");
    st.lap_u = edgeflow::apply(ws.op, st.u);
    st.scal_g = conformal_scal(st.u, st.lap_u, ws.scal0, ws.m);
    const double p = conf_p(ws.m);
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < st.u.size(); ++i) {
        const double dv = mesh.w[i] * std::pow(st.u[i], p);
        num += st.scal_g[i] * dv;
        den += dv;
    }
    st.vol = den;
    st.rho = num / den;
}

std::vector<double> rhs_with(const Workspace& ws, const ConformalState& st, bool with_rho) {
    const size_t K1 = st.u.size();
    std::vector<double> out(K1);
    for (size_t i = 0; i < K1; ++i) {
        out[i] = (ws.m - 1) * std::pow(st.u[i], 1.0 - ws.N) * st.lap_u[i] -
                 ws.cprime * ws.scal0.values[i] * std::pow(st.u[i], 2.0 - ws.N);
        if (with_rho) out[i] += ws.cprime * st.rho * st.u[i];
    }
    return out;
}

/* Deviation of the devolved right-hand side from its curvature form
 * (m-2)/4 (rho - scal_g) u; an exact identity, so this measures only
 * floating-point noise in the two evaluation orders. */
double identity_deviation(const Workspace& ws, const ConformalState& st,
                          const std::vector<double>& rhs, bool with_rho) {
    double dev = 0.0;
    for (size_t i = 0; i < st.u.size(); ++i) {
        const double curvature_form = with_rho
                                          ? ws.cprime * (st.rho - st.scal_g[i]) * st.u[i]
                                          : -ws.cprime * st.scal_g[i] * st.u[i];
        dev = std::max(dev, std::abs(rhs[i] - curvature_form));
    }
    return dev;
}

ConformalState step_impl(const Workspace& ws, const ConformalState& state,
                         const FlowParams& params, const Mesh& mesh) {
    const size_t K1 = state.u.size();
    const bool with_rho = !params.unnormalized_debug;
    ConformalState next;
    next.t = state.t + params.tau;

    if (params.scheme == Scheme::SemiImplicit) {
        std::vector<double> a(K1), rhs = rhs_with(ws, state, with_rho);
        for (size_t i = 0; i < K1; ++i) {
            a[i] = (ws.m - 1) * std::pow(state.u[i], 1.0 - ws.N);
            rhs[i] *= params.tau;
        }
        /* Increment form: (I - tau a Delta_h) delta = tau F, u+ = u + delta.
         * Algebraically the same step, but a stationary u stays put to
         * roundoff instead of drifting by the solver's condition number. */
        const std::vector<double> delta = solve_shifted(ws.op, a, params.tau, rhs);
        next.u.resize(K1);
        for (size_t i = 0; i < K1; ++i) next.u[i] = state.u[i] + delta[i];
    } else {
        // Heun: full step on k1, then average the slopes
        const std::vector<double> k1 = rhs_with(ws, state, with_rho);
        ConformalState mid;
        mid.t = next.t;
        mid.u.resize(K1);
        for (size_t i = 0; i < K1; ++i) mid.u[i] = state.u[i] + params.tau * k1[i];
        refresh_with(ws, mesh, mid);
        const std::vector<double> k2 = rhs_with(ws, mid, with_rho);
        next.u.resize(K1);
        for (size_t i = 0; i < K1; ++i)
            next.u[i] = state.u[i] + 0.5 * params.tau * (k1[i] + k2[i]);
    }
    refresh_with(ws, mesh, next);
    return next;
}

double local_spacing(const Mesh& mesh, size_t i) {
    const size_t K = mesh.x.size() - 1;
    if (i == 0) return mesh.spacing(1);
    if (i == K) return mesh.spacing(K);
    return std::max(mesh.spacing(i), mesh.spacing(i + 1));
}

// excess of the elliptic extremum-principle violation beyond tol(h), 0 when clean
double elliptic_excess(const ConformalState& st, const Mesh& mesh) {
    size_t imin = 0, imax = 0;
    for (size_t i = 1; i < st.u.size(); ++i) {
        if (st.u[i] < st.u[imin]) imin = i;
        if (st.u[i] > st.u[imax]) imax = i;
    }
    const double raw_min = std::max(0.0, -st.lap_u[imin]);
    const double raw_max = std::max(0.0, st.lap_u[imax]);
    const double tol_min = kMaxPrincipleTolCoeff * local_spacing(mesh, imin);
    const double tol_max = kMaxPrincipleTolCoeff * local_spacing(mesh, imax);
    return std::max({0.0, raw_min - tol_min, raw_max - tol_max});
}

/* Parabolic monitor at the argmax of the previous curvature: the discrete rate
 * of scal must not exceed scal (scal - rho) by more than the scheme's
 * truncation allowance. */
double parabolic_excess(const ConformalState& prev, const ConformalState& cur,
                        const Mesh& mesh, double tau) {
    size_t iarg = 0;
    for (size_t i = 1; i < prev.scal_g.size(); ++i)
        if (prev.scal_g[i] > prev.scal_g[iarg]) iarg = i;
    const double lhs = (cur.scal_g[iarg] - prev.scal_g[iarg]) / tau;
    const double bound = prev.scal_g[iarg] * (prev.scal_g[iarg] - prev.rho);
    double hmax = 0.0;
    for (size_t i = 1; i < mesh.x.size(); ++i) hmax = std::max(hmax, mesh.spacing(i));
    const double scale = std::max(1.0, prev.scal_g[iarg] * prev.scal_g[iarg]);
    const double tol = kParabolicSlackCoeff * (tau + hmax * hmax) * scale;
    return std::max(0.0, lhs - bound - tol);
}

FlowRecordRow make_row(const ConformalState& st, const std::vector<double>& rhs,
                       const Mesh& mesh, double parabolic) {
    FlowRecordRow row;
    row.t = st.t;
    row.rho = st.rho;
    row.vol = st.vol;
    const auto [smin, smax] = std::minmax_element(st.scal_g.begin(), st.scal_g.end());
    row.scal_min = *smin;
    row.scal_max = *smax;
    const auto [umin, umax] = std::minmax_element(st.u.begin(), st.u.end());
    row.u_min = *umin;
    row.u_max = *umax;
    double gap = 0.0, dsu = 0.0;
    for (size_t i = 0; i < st.u.size(); ++i) {
        gap = std::max(gap, std::abs(st.scal_g[i] - st.rho));
        dsu = std::max(dsu, std::abs(rhs[i]));
    }
    row.scal_minus_rho_sup = gap;
    row.dudt_sup = dsu;
    row.mp_u_violation = elliptic_excess(st, mesh);
    row.mp_scal_violation = parabolic;
    return row;
}

} // namespace

ConformalState make_initial_state(const std::vector<double>& u0, const EdgeModel& model,
                                  const Mesh& mesh) {
    if (u0.size() != mesh.x.size())
        throw std::invalid_argument("initial data length disagrees with mesh");
    for (double v : u0)
        if (!(v > 1e-8))
            throw std::invalid_argument("degenerate initial data: conformal factor must "
                                        "exceed 1e-8 at every node");
    ConformalState st;
    st.t = 0.0;
    st.u = u0;
    refresh_state(st, model, mesh);
    return st;
}

void refresh_state(ConformalState& state, const EdgeModel& model, const Mesh& mesh) {
    const Workspace ws = make_workspace(model, mesh);
    refresh_with(ws, mesh, state);
}

std::vector<double> rhs_devolved(const ConformalState& state, const EdgeModel& model,
                                 const Mesh& mesh) {
    const Workspace ws = make_workspace(model, mesh);
    return rhs_with(ws, state, true);
}

ConformalState step_semi_implicit(const ConformalState& state, const FlowParams& params,
                                  const EdgeModel& model, const Mesh& mesh) {
    const Workspace ws = make_workspace(model, mesh);
    FlowParams p = params;
    p.scheme = Scheme::SemiImplicit;
    return step_impl(ws, state, p, mesh);
}

ConformalState step_explicit_rk2(const ConformalState& state, const FlowParams& params,
                                 const EdgeModel& model, const Mesh& mesh) {
    const Workspace ws = make_workspace(model, mesh);
    FlowParams p = params;
    p.scheme = Scheme::ExplicitRK2;
    return step_impl(ws, state, p, mesh);
}

FlowResult run_flow(const ConformalState& init, const FlowParams& params,
                    const EdgeModel& model, const Mesh& mesh) {
    if (!(params.tau > 0.0)) throw std::invalid_argument("time step tau must be positive");
    if (!(params.t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
    if (params.stop_tol < 0.0) throw std::invalid_argument("stop_tol must be >= 0");
    if (init.u.size() != mesh.x.size())
        throw std::invalid_argument("initial state length disagrees with mesh");
    if (!validate_feasibility(model).ok())
        throw std::invalid_argument("model fails the feasibility checks");

    const Workspace ws = make_workspace(model, mesh);
    if (params.require_negative && !ws.scal0.scalar_negative)
        throw std::invalid_argument("initial scalar curvature must be negative at every "
                                    "node (disable require_negative to override)");

    FlowRecord record;
    record.scal0 = ws.scal0.values;
    record.a_bound = ws.scal0.a_bound;
    record.tau = params.tau;
    double scal0_max = record.scal0[0];
    for (double v : record.scal0) scal0_max = std::max(scal0_max, v);
    record.b_rate = -scal0_max;

    const double snap_time = params.snapshot_time < 0.0 ? 0.5 * params.t_end
                                                        : params.snapshot_time;
    const bool with_rho = !params.unnormalized_debug;

    ConformalState state = init;
    refresh_with(ws, mesh, state); // honor the cache invariant even for hand-built states
    record.rho0 = state.rho;

    auto record_state = [&](const ConformalState& st, double parabolic) {
        const std::vector<double> rhs = rhs_with(ws, st, with_rho);
        record.max_identity_dev =
            std::max(record.max_identity_dev, identity_deviation(ws, st, rhs, with_rho));
        record.rows.push_back(make_row(st, rhs, mesh, parabolic));
        if (params.store_trajectory) record.trajectory.push_back(st.u);
        if (!record.has_snapshot && st.t >= snap_time) {
            record.snapshot = st;
            record.has_snapshot = true;
            record.snapshot_row = int(record.rows.size()) - 1;
        }
    };

    record_state(state, 0.0);
    long steps = 0;
    while (true) {
        if (params.stop_tol > 0.0 && record.rows.back().scal_minus_rho_sup < params.stop_tol) {
            record.termination = "stop_tol";
            break;
        }
        if (state.t >= params.t_end - 0.5 * params.tau) {
            record.termination = "t_end";
            break;
        }
        if (steps >= params.max_steps) {
            record.termination = "max_steps";
            break;
        }
        ConformalState next;
        try {
            next = step_impl(ws, state, params, mesh);
        } catch (const std::exception& e) {
            record.termination = std::string("aborted: ") + e.what();
            record.aborted = true;
            throw FlowAborted(e.what(), record, state);
        }
        const double parabolic = parabolic_excess(state, next, mesh, params.tau);
        state = std::move(next);
        ++steps;
        record_state(state, parabolic);
    }

    if (!record.has_snapshot) { // run ended before the snapshot time
        record.snapshot = state;
        record.has_snapshot = true;
        record.snapshot_row = int(record.rows.size()) - 1;
    }
    return FlowResult{std::move(record), std::move(state)};
}

RestartReport restart_check(const FlowRecord& record, const EdgeModel& model,
                            const Mesh& mesh, const FlowParams& params) {
    if (!record.has_snapshot || record.snapshot_row < 0)
        throw std::runtime_error("restart check needs a record with a stored mid-run state");
    if (record.trajectory.empty())
        throw std::runtime_error("restart check needs a record with a stored trajectory");

    FlowParams p = params;
    p.store_trajectory = true;
    const FlowResult rerun = run_flow(record.snapshot, p, model, mesh);

    const size_t offset = size_t(record.snapshot_row);
    const size_t overlap =
        std::min(rerun.record.trajectory.size(), record.trajectory.size() - offset);
    double sup = 0.0;
    for (size_t k = 0; k < overlap; ++k) {
        const auto& a = rerun.record.trajectory[k];
        const auto& b = record.trajectory[offset + k];
        for (size_t i = 0; i < a.size(); ++i) sup = std::max(sup, std::abs(a[i] - b[i]));
    }
    RestartReport rep;
    rep.sup_diff = sup;
    rep.threshold = 5.0 * params.tau;
    rep.pass = sup <= rep.threshold;
    rep.restart_t = record.snapshot.t;
    return rep;
}

} // namespace edgeflow
