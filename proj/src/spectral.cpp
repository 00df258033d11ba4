#include "edgeflow/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edgeflow {

namespace {

double dot_w(const Mesh& mesh, const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += mesh.w[i] * a[i] * b[i];
    return s;
}

double p_norm(const Mesh& mesh, const std::vector<double>& u, double p) {
    double s = 0.0;
    for (size_t i = 0; i < u.size(); ++i) s += mesh.w[i] * std::pow(u[i], p);
    return std::pow(s, 1.0 / p);
}

/* Classical 3-point Laplacian u'' + n (f'/f) u' on the nonuniform mesh, with
 * the even-reflection rows at both ends.  Deliberately a different formula
 * from the finite-volume operator: identity checks against it see genuine
 * discretization error, not the solver residual of the defining operator. */
std::vector<double> direct_laplacian(const std::vector<double>& u, const EdgeModel& model,
                                     const Mesh& mesh) {
    const size_t K = mesh.x.size() - 1;
    const double n = model.n;
    std::vector<double> out(K + 1);
    const double h1 = mesh.spacing(1);
    out[0] = 2.0 * (n + 1.0) * (u[1] - u[0]) / (h1 * h1);
    for (size_t i = 1; i < K; ++i) {
        const double hl = mesh.spacing(i), hr = mesh.spacing(i + 1);
        const double dl = (u[i] - u[i - 1]) / hl, dr = (u[i + 1] - u[i]) / hr;
        const double d2 = 2.0 * (dr - dl) / (hl + hr);
        const double d1 = (hl * dr + hr * dl) / (hl + hr);
        const double x = mesh.x[i];
        out[i] = d2 + n * (model.warp.df(x) / model.warp.f(x)) * d1;
    }
    const double hK = mesh.spacing(K);
    out[K] = 2.0 * (u[K - 1] - u[K]) / (hK * hK);
    return out;
}

// per-node signs with a zero band, combined; 2 means genuinely indefinite
int classify_field_sign(const std::vector<double>& v, double band) {
    double lo = v[0], hi = v[0];
    for (double x : v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    if (std::max(std::abs(lo), std::abs(hi)) <= band) return 0;
    if (lo >= -band) return +1; // significant values all positive
    if (hi <= band) return -1;  // significant values all negative
    return 2;
}

} // namespace

ConformalOp assemble_conformal_laplacian(const EdgeModel& model, const Mesh& mesh) {
    ConformalOp op;
    op.lap = assemble_laplacian(mesh, model, 0.0);
    op.scal0 = initial_curvature(model, mesh).values;
    op.kappa = conf_kappa(model.m);
    op.m = model.m;
    return op;
}

std::vector<double> apply_conformal(const ConformalOp& op, const std::vector<double>& u) {
    std::vector<double> out = edgeflow::apply(op.lap, u);
    for (size_t i = 0; i < out.size(); ++i) out[i] = op.scal0[i] * u[i] - op.kappa * out[i];
    return out;
}

std::pair<double, std::vector<double>> first_eigenpair(const ConformalOp& op, const Mesh& mesh) {
    const size_t N = op.scal0.size();
    if (N != mesh.x.size()) throw std::invalid_argument("operator size disagrees with mesh");

    // tridiagonal rows of Box = -kappa Delta_h + diag(scal0)
    std::vector<double> csub(N), cdiag(N), csuper(N);
    for (size_t i = 0; i < N; ++i) {
        csub[i] = -op.kappa * op.lap.sub[i];
        csuper[i] = -op.kappa * op.lap.super[i];
        cdiag[i] = op.kappa * (op.lap.sub[i] + op.lap.super[i] + op.lap.fiber_diag[i]) +
                   op.scal0[i];
    }

    double sigma = *std::min_element(op.scal0.begin(), op.scal0.end()) - 1.0;
    std::vector<double> v(N, 1.0);
    v[0] /= std::sqrt(dot_w(mesh, v, v)); // scale guard; re-normalized each sweep
    for (size_t i = 1; i < N; ++i) v[i] = v[0];

    double lambda = 0.0, res = 0.0;
    std::vector<double> shifted(N);
    for (int it = 0; it < 200; ++it) {
        for (size_t i = 0; i < N; ++i) shifted[i] = cdiag[i] - sigma;
        std::vector<double> next;
        try {
            next = detail::tridiag_solve(csub, shifted, csuper, v);
        } catch (const std::runtime_error&) {
            sigma -= 1e-8 * (1.0 + std::abs(sigma)); // nudge off the exact eigenvalue
            continue;
        }
        const double nrm = std::sqrt(dot_w(mesh, next, next));
        if (!(nrm > 0.0) || !std::isfinite(nrm))
            throw std::runtime_error("eigen iteration produced a degenerate vector");
        for (double& x : next) x /= nrm;
        v = std::move(next);

        const std::vector<double> cv = apply_conformal(op, v);
        lambda = dot_w(mesh, cv, v);
        double r2 = 0.0;
        for (size_t i = 0; i < N; ++i) {
            const double ri = cv[i] - lambda * v[i];
            r2 += mesh.w[i] * ri * ri;
        }
        res = std::sqrt(r2);
        if (res < 1e-10) break;
        if (it >= 2 && res < 1e-3) sigma = lambda; // Rayleigh acceleration
    }
    if (!(res < 1e-10))
        throw std::runtime_error("eigenpair iteration failed to reach the residual target");

    size_t peak = 0;
    for (size_t i = 1; i < N; ++i)
        if (std::abs(v[i]) > std::abs(v[peak])) peak = i;
    if (v[peak] < 0.0)
        for (double& x : v) x = -x;
    for (double x : v)
        if (!(x > 0.0))
            throw std::runtime_error("computed first eigenfunction is not positive");
    return {lambda, v};
}

IdentityReport eigen_conformal_scal_identity(double lambda1, const std::vector<double>& phi1,
                                             const EdgeModel& model, const Mesh& mesh) {
    if (phi1.size() != mesh.x.size())
        throw std::invalid_argument("eigenfunction length disagrees with mesh");
    const CurvatureField scal0 = initial_curvature(model, mesh);
    const std::vector<double> lap = direct_laplacian(phi1, model, mesh);
    const std::vector<double> scal_conf = conformal_scal(phi1, lap, scal0, model.m);

    const double e = -4.0 / double(model.m - 2);
    double dev = 0.0, ref_sup = 0.0;
    std::vector<double> diff(phi1.size());
    for (size_t i = 0; i < phi1.size(); ++i) {
        const double ref = lambda1 * std::pow(phi1[i], e);
        ref_sup = std::max(ref_sup, std::abs(ref));
        dev = std::max(dev, std::abs(scal_conf[i] - ref));
    }
    IdentityReport rep;
    rep.max_rel_dev = dev / std::max(ref_sup, 1.0);
    rep.sign_conformal_scal = classify_field_sign(scal_conf, 1e-6);
    return rep;
}

double minimize_yamabe_functional(const EdgeModel& model, const Mesh& mesh, int iters,
                                  double step) {
    if (iters < 1) throw std::invalid_argument("iteration count must be >= 1");
    if (!(step > 0.0)) throw std::invalid_argument("step size must be positive");

    const DiscreteLaplacian op = assemble_laplacian(mesh, model, 0.0);
    const CurvatureField scal0 = initial_curvature(model, mesh);
    const double kappa = conf_kappa(model.m);
    const double p = conf_p(model.m);
    const size_t N = mesh.x.size();

    // value at unit volume normalization; iterates keep ||u||_p = 1
    auto value = [&](const std::vector<double>& u) {
        const std::vector<double> lap = edgeflow::apply(op, u);
        double q = 0.0;
        for (size_t i = 0; i < N; ++i)
            q += mesh.w[i] * u[i] * (scal0.values[i] * u[i] - kappa * lap[i]);
        return q;
    };

    std::vector<double> u(N, 1.0);
    {
        const double nrm = p_norm(mesh, u, p);
        for (double& x : u) x /= nrm;
    }
    double best = value(u);
    int fails = 0;
    for (int it = 0; it < iters; ++it) {
        const std::vector<double> lap = edgeflow::apply(op, u);
        std::vector<double> grad(N);
        double gnorm2 = 0.0;
        for (size_t i = 0; i < N; ++i) {
            grad[i] = (scal0.values[i] * u[i] - kappa * lap[i]) -
                      best * std::pow(u[i], p - 1.0);
            gnorm2 += mesh.w[i] * grad[i] * grad[i];
        }
        if (std::sqrt(gnorm2) < 1e-12 * (1.0 + std::abs(best))) break;

        std::vector<double> trial(N);
        for (size_t i = 0; i < N; ++i) trial[i] = std::max(u[i] - step * grad[i], 1e-8);
        const double nrm = p_norm(mesh, trial, p);
        for (double& x : trial) x /= nrm;
        const double cand = value(trial);
        if (cand <= best + 1e-14 * (1.0 + std::abs(best))) {
            u = std::move(trial);
            best = std::min(best, cand);
            fails = 0;
        } else {
            // rejection under a shrinking step means the discrete minimum is reached
            // up to the roundoff floor of the functional, not a failure
            step *= 0.5;
            if (++fails >= 10 || step < 1e-15) break;
        }
    }
    return best;
}

TrichotomyReport trichotomy_check(const EdgeModel& model, const Mesh& mesh, int iters,
                                  double step) {
    const ConformalOp op = assemble_conformal_laplacian(model, mesh);
    const auto [lambda1, phi1] = first_eigenpair(op, mesh);
    const IdentityReport idrep = eigen_conformal_scal_identity(lambda1, phi1, model, mesh);
    const double nu = minimize_yamabe_functional(model, mesh, iters, step);

    TrichotomyReport rep;
    rep.result.lambda1 = lambda1;
    rep.result.phi1 = phi1;
    rep.result.nu_estimate = nu;
    rep.result.trichotomy_signs = {sign_with_band(lambda1), idrep.sign_conformal_scal,
                                   sign_with_band(nu)};
    rep.identity_dev = idrep.max_rel_dev;
    const auto& s = rep.result.trichotomy_signs;
    rep.pass = (s[0] == s[1] && s[1] == s[2] && s[0] != 2);
    return rep;
}

int sign_with_band(double value, double band) {
    if (std::abs(value) < band) return 0;
    return value > 0.0 ? +1 : -1;
}

} // namespace edgeflow
