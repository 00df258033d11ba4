#include "edgeflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edgeflow {

DecayFit fit_exponential(const std::vector<double>& t, const std::vector<double>& v,
                         double t_lo, double t_hi) {
    if (t.size() != v.size()) throw std::invalid_argument("series lengths disagree");
    std::vector<double> ts, ys;
    for (size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi) continue;
        if (!(v[i] > 0.0))
            throw std::runtime_error("nonpositive value in exponential fit window");
        ts.push_back(t[i]);
        ys.push_back(std::log(v[i]));
    }
    if (ts.size() < 10)
        throw std::runtime_error("fewer than 10 samples in the exponential fit window");

    const size_t n = ts.size();
    double tbar = 0.0, ybar = 0.0;
    for (size_t i = 0; i < n; ++i) {
        tbar += ts[i];
        ybar += ys[i];
    }
    tbar /= double(n);
    ybar /= double(n);
    double stt = 0.0, sty = 0.0;
    for (size_t i = 0; i < n; ++i) {
        stt += (ts[i] - tbar) * (ts[i] - tbar);
        sty += (ts[i] - tbar) * (ys[i] - ybar);
    }
    if (!(stt > 0.0)) throw std::runtime_error("degenerate time window in exponential fit");
    const double slope = sty / stt;
    const double intercept = ybar - slope * tbar;

    double ss_tot = 0.0, ss_res = 0.0;
    for (size_t i = 0; i < n; ++i) {
        ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
        const double r = ys[i] - (intercept + slope * ts[i]);
        ss_res += r * r;
    }
    DecayFit fit;
    fit.rate = -slope;
    fit.amplitude = std::exp(intercept);
    // a constant series is a perfect fit, not an undefined one
    fit.r_squared = ss_tot <= 1e-30 ? (ss_res <= 1e-30 ? 1.0 : 0.0) : 1.0 - ss_res / ss_tot;
    fit.t_lo = t_lo;
    fit.t_hi = t_hi;
    return fit;
}

std::vector<Verdict> audit_monotonicity(const FlowRecord& record, double noise_floor) {
    if (record.rows.empty()) throw std::invalid_argument("empty flow record");
    std::vector<Verdict> out;

    double rho_inc = 0.0, smax_inc = 0.0, smax_worst = record.rows[0].scal_max;
    double vol_drift = 0.0;
    const double vol0 = record.rows[0].vol;
    for (size_t k = 0; k < record.rows.size(); ++k) {
        if (k > 0) {
            rho_inc = std::max(rho_inc, record.rows[k].rho - record.rows[k - 1].rho);
            smax_inc = std::max(smax_inc,
                                record.rows[k].scal_max - record.rows[k - 1].scal_max);
        }
        smax_worst = std::max(smax_worst, record.rows[k].scal_max);
        vol_drift = std::max(vol_drift, std::abs(record.rows[k].vol - vol0) / vol0);
    }

    out.push_back({"rho_monotone", rho_inc <= kRhoSlackPerStep, rho_inc, kRhoSlackPerStep,
                   "average scalar curvature is nonincreasing along the normalized flow"});

    const double smax_measured = std::max(smax_inc, smax_worst > 0.0 ? smax_worst : 0.0);
    const double smax_tol = std::max(kScalMaxSlackPerStep, noise_floor);
    out.push_back({"scal_max_monotone", smax_measured <= smax_tol, smax_measured, smax_tol,
                   "the curvature maximum is nonincreasing and stays negative (measured is "
                   "the worse of the largest per-step increase and any nonnegative value)"});

    const double vol_tol = kVolDriftCoeff * record.tau;
    out.push_back({"volume_preserved", vol_drift <= vol_tol, vol_drift, vol_tol,
                   "the normalized flow preserves the conformal volume up to time "
                   "discretization drift"});
    return out;
}

std::vector<Verdict> audit_u_bounds(const FlowRecord& record, const EdgeModel& model) {
    if (record.rows.empty()) throw std::invalid_argument("empty flow record");
    if (!(record.rho0 < 0.0))
        throw std::invalid_argument("extremum bounds require rho(0) < 0");
    if (record.scal0.empty()) throw std::invalid_argument("record lacks initial curvature");

    const double q = 4.0 / double(model.m - 2);
    double s_lo = record.scal0[0], s_hi = record.scal0[0];
    for (double s : record.scal0) {
        s_lo = std::min(s_lo, s);
        s_hi = std::max(s_hi, s);
    }
    const double min_abs = std::min(std::abs(s_lo), std::abs(s_hi));
    const double max_abs = std::max(std::abs(s_lo), std::abs(s_hi));
    const double abs_rho = -record.rho0;
    const bool const_scal = (s_hi - s_lo) <= 1e-12 * std::max(1.0, std::abs(s_hi));

    const double u0min = record.rows[0].u_min, u0max = record.rows[0].u_max;
    const bool nonstandard = std::abs(u0min - 1.0) > 1e-12 || std::abs(u0max - 1.0) > 1e-12;
    const std::string flag = nonstandard ? "; nonstandard initialization u(0) != 1" : "";

    std::vector<Verdict> out;
    if (const_scal) {
        out.push_back({"u_lower_bound", true, 0.0, kUBoundSlack,
                       "pointwise lower barrier for u_min (skipped: initial curvature is "
                       "exactly constant, so the flow is stationary and the barrier "
                       "degenerates)" + flag});
    } else {
        double worst = -1e300;
        for (const FlowRecordRow& row : record.rows) {
            const double decay = std::exp(record.rho0 * row.t);
            const double bound =
                std::pow(u0min, q) * decay + (min_abs / abs_rho) * (1.0 - decay);
            worst = std::max(worst, bound - std::pow(row.u_min, q));
        }
        out.push_back({"u_lower_bound", worst <= kUBoundSlack, worst, kUBoundSlack,
                       "pointwise lower barrier for u_min from the initial curvature "
                       "extremes" + flag});
    }
    {
        const double bound = std::pow(u0max, q) + max_abs / abs_rho;
        double worst = -1e300;
        for (const FlowRecordRow& row : record.rows)
            worst = std::max(worst, std::pow(row.u_max, q) - bound);
        out.push_back({"u_upper_bound", worst <= kUBoundSlack, worst, kUBoundSlack,
                       "pointwise upper barrier for u_max from the initial curvature "
                       "extremes" + flag});
    }
    return out;
}

Verdict audit_max_principle(const ConformalState& state, const Mesh& mesh,
                            const EdgeModel&) {
    const size_t K = mesh.x.size() - 1;
    auto local_h = [&](size_t i) {
        if (i == 0) return mesh.spacing(1);
        if (i == K) return mesh.spacing(K);
        return std::max(mesh.spacing(i), mesh.spacing(i + 1));
    };
    size_t imin = 0, imax = 0;
    for (size_t i = 1; i < state.u.size(); ++i) {
        if (state.u[i] < state.u[imin]) imin = i;
        if (state.u[i] > state.u[imax]) imax = i;
    }
    const double raw_min = std::max(0.0, -state.lap_u[imin]);
    const double raw_max = std::max(0.0, state.lap_u[imax]);
    const double tol_min = kMaxPrincipleTolCoeff * local_h(imin);
    const double tol_max = kMaxPrincipleTolCoeff * local_h(imax);
    Verdict v;
    v.check_id = "max_principle";
    v.measured = std::max(raw_min, raw_max);
    v.threshold = std::min(tol_min, tol_max);
    v.pass = raw_min <= tol_min && raw_max <= tol_max;
    v.law = "the discrete Laplacian of u is >= 0 at the minimum of u and <= 0 at the "
            "maximum, up to the local mesh tolerance";
    return v;
}

ConvergenceReport detect_convergence(const FlowRecord& record, double stop_tol) {
    if (record.rows.empty()) throw std::invalid_argument("empty flow record");
    const FlowRecordRow& last = record.rows.back();
    ConvergenceReport rep;
    rep.final_gap = last.scal_minus_rho_sup;
    rep.final_rho = last.rho;
    rep.final_spread = last.scal_max - last.scal_min;
    rep.converged = stop_tol > 0.0 && rep.final_gap < stop_tol &&
                    rep.final_spread < 2.0 * stop_tol && rep.final_rho < 0.0;
    return rep;
}

} // namespace edgeflow
