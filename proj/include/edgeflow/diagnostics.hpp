/// @file diagnostics.hpp
/// Pass/fail verdicts on flow records: exponential fits, monotonicity audits,
/// explicit bound checks, maximum-principle monitors.

#pragma once

#include <limits>
#include <string>
#include <vector>

#include "edgeflow/flow.hpp"

namespace edgeflow {

// calibration constants (see README defaults table)
inline constexpr double kRhoSlackPerStep = 1e-10;
inline constexpr double kScalMaxSlackPerStep = 1e-10;
inline constexpr double kVolDriftCoeff = 2.0;       // relative drift <= coeff * tau
inline constexpr double kUBoundSlack = 1e-6;
inline constexpr double kMaxPrincipleTolCoeff = 1.0; // elliptic tol(h) = coeff * h
inline constexpr double kParabolicSlackCoeff = 20.0; // parabolic tol = coeff * (tau + h^2)
inline constexpr double kIdentityTol = 1e-9;
inline constexpr double kTipNoiseCoeff = 4.0;

/* Roundoff floor of pointwise curvature values.  The tip row of the Laplacian
 * amplifies last-digit noise in u by 2(n+1)/h1^2, and the curvature multiplies
 * that by kappa = 4(m-1)/(m-2); sup-norm curvature series flatten out at this
 * scale no matter how far the flow is run. */
inline double scal_noise_floor(double h1, int m) {
    const double kappa = 4.0 * double(m - 1) / double(m - 2);
    return kTipNoiseCoeff * std::numeric_limits<double>::epsilon() * kappa * 2.0 *
           double(m) / (h1 * h1);
}

struct DecayFit {
    double rate = 0.0;      // -slope of the least-squares line on (t, log v)
    double amplitude = 0.0; // exp(intercept)
    double r_squared = 0.0;
    double t_lo = 0.0, t_hi = 0.0;
};

struct Verdict {
    std::string check_id;
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string law; // the quantitative law being checked, stated in words
};

/* Least-squares exponential fit over rows with t in [t_lo, t_hi].  Requires at
 * least 10 rows in the window and strictly positive values (throws otherwise). */
DecayFit fit_exponential(const std::vector<double>& t, const std::vector<double>& v,
                         double t_lo, double t_hi);

/* Three verdicts: rho nonincreasing (1e-10/step slack), scal_max nonincreasing
 * and negative (slack = the larger of 1e-10 and noise_floor), relative volume
 * drift <= kVolDriftCoeff * tau. */
std::vector<Verdict> audit_monotonicity(const FlowRecord& record, double noise_floor);

/* The two integrated extremum bounds with additive slack 1e-6,
 *   u_min^{N-1}(t) >= u_min^{N-1}(0) e^{rho0 t} + (min|scal0|/|rho0|)(1 - e^{rho0 t})
 *   u_max^{N-1}(t) <= u_max^{N-1}(0) + max|scal0|/|rho0|
 * checked at every recorded time.  Requires rho(0) < 0 (throws otherwise).  The
 * lower bound is skipped for exactly-constant initial curvature (stationary
 * degenerate case), and initializations other than u(0) = 1 are flagged in the
 * verdict text. */
std::vector<Verdict> audit_u_bounds(const FlowRecord& record, const EdgeModel& model);

/* At the arg-min node of u (lowest index on ties, tip included) the discrete
 * Laplacian must be >= -tol(h); symmetric check at the arg-max.  tol(h) =
 * kMaxPrincipleTolCoeff * local spacing. */
Verdict audit_max_principle(const ConformalState& state, const Mesh& mesh,
                            const EdgeModel& model);

struct ConvergenceReport {
    double final_gap = 0.0;    // ||scal - rho||_inf at the last row
    double final_rho = 0.0;
    double final_spread = 0.0; // scal_max - scal_min at the last row
    bool converged = false;
};

// converged when the final gap < stop_tol, the spread < 2 stop_tol, and rho < 0
ConvergenceReport detect_convergence(const FlowRecord& record, double stop_tol);

} // namespace edgeflow
