#include "edgeflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "edgeflow/laplacian.hpp"
#include "edgeflow/mesh.hpp"

namespace edgeflow {

namespace {

enum class Shape { X3Gauss, X2Gauss };

Shape shape_of(const WarpSpec& w) {
    if (w.shape_id.empty() || w.shape_id == "x3gauss") return Shape::X3Gauss;
    if (w.shape_id == "x2gauss") return Shape::X2Gauss;
    throw std::invalid_argument("unknown perturbation shape: " + w.shape_id);
}

// perturbation p and derivatives for the two built-in shapes
double pert(Shape s, double x) {
    const double g = std::exp(-x * x);
    return s == Shape::X3Gauss ? x * x * x * g : x * x * g;
}
double dpert(Shape s, double x) {
    const double g = std::exp(-x * x);
    return s == Shape::X3Gauss ? (3.0 * x * x - 2.0 * x * x * x * x) * g
                               : (2.0 * x - 2.0 * x * x * x) * g;
}
double d2pert(Shape s, double x) {
    const double g = std::exp(-x * x);
    const double x2 = x * x;
    return s == Shape::X3Gauss
               ? (6.0 * x - 14.0 * x * x2 + 4.0 * x * x2 * x2) * g
               : (2.0 - 10.0 * x2 + 4.0 * x2 * x2) * g;
}

} // namespace

double WarpSpec::f(double x) const {
    switch (kind) {
        case WarpKind::Linear: return x;
        case WarpKind::Sinh: return std::sinh(x);
        case WarpKind::PerturbedSinh: return std::sinh(x) + eps * pert(shape_of(*this), x);
    }
    return 0.0;
}

double WarpSpec::df(double x) const {
    switch (kind) {
        case WarpKind::Linear: return 1.0;
        case WarpKind::Sinh: return std::cosh(x);
        case WarpKind::PerturbedSinh: return std::cosh(x) + eps * dpert(shape_of(*this), x);
    }
    return 0.0;
}

double WarpSpec::d2f(double x) const {
    switch (kind) {
        case WarpKind::Linear: return 0.0;
        case WarpKind::Sinh: return std::sinh(x);
        case WarpKind::PerturbedSinh: return std::sinh(x) + eps * d2pert(shape_of(*this), x);
    }
    return 0.0;
}

/* (f'^2 - 1)/f^2 without forming f'^2 - 1 by subtraction: for the sinh-based
 * warps cosh^2 - 1 is replaced by sinh^2, so every term is computed at its own
 * scale.  Near the tip the naive quotient loses v (1/f^2 ~ 1e9 at the first
 * node of a fine graded mesh) about eight digits; this form loses none. */
double WarpSpec::g1(double x) const {
    switch (kind) {
        case WarpKind::Linear: return 0.0;
        case WarpKind::Sinh: return 1.0;
        case WarpKind::PerturbedSinh: {
            const double s = std::sinh(x);
            const double q = eps * dpert(shape_of(*this), x);
            const double fv = f(x);
            if (x == 0.0) { // limit: x3gauss -> 1 + 6 eps, x2gauss diverges
                return shape_of(*this) == Shape::X3Gauss
                           ? 1.0 + 6.0 * eps
                           : std::numeric_limits<double>::infinity();
            }
            return (s * s + 2.0 * q * std::cosh(x) + q * q) / (fv * fv);
        }
    }
    return 0.0;
}

double WarpSpec::g2(double x) const {
    switch (kind) {
        case WarpKind::Linear: return 0.0;
        case WarpKind::Sinh: return 1.0;
        case WarpKind::PerturbedSinh: {
            if (x == 0.0) {
                return shape_of(*this) == Shape::X3Gauss
                           ? 1.0 + 6.0 * eps
                           : std::numeric_limits<double>::infinity();
            }
            return d2f(x) / f(x);
        }
    }
    return 0.0;
}

WarpSpec linear_warp() { return WarpSpec{WarpKind::Linear, 0.0, ""}; }

WarpSpec sinh_warp() { return WarpSpec{WarpKind::Sinh, 0.0, ""}; }

WarpSpec perturbed_sinh_warp(double eps, const std::string& shape_id) {
    if (eps < 0.0) throw std::invalid_argument("perturbation amplitude must be >= 0");
    WarpSpec w{WarpKind::PerturbedSinh, eps, shape_id};
    shape_of(w); // validates the shape id
    return w;
}

void EdgeModel::validate() const {
    if (m < 3) throw std::invalid_argument("dimension m must be >= 3");
    if (n < 1) throw std::invalid_argument("fiber dimension n must be >= 1");
    if (m != n + 1) throw std::invalid_argument("m must equal n + 1");
    if (!(x_max > 0.0)) throw std::invalid_argument("x_max must be positive");
}

EdgeModel make_model(int m, const WarpSpec& warp, double x_max, double fiber_scal,
                     double fiber_lambda0) {
    EdgeModel model{m, m - 1, fiber_scal, fiber_lambda0, warp, x_max};
    model.validate();
    return model;
}

double conf_N(int m) { return double(m + 2) / double(m - 2); }
double conf_kappa(int m) { return 4.0 * double(m - 1) / double(m - 2); }
double conf_p(int m) { return 2.0 * double(m) / double(m - 2); }
double conf_c(int m) { return double(m + 2) / 4.0; }

double warped_scalar_curvature(const EdgeModel& model, double x) {
    if (!(x > 0.0)) throw std::domain_error("curvature requested at x <= 0");
    const double fv = model.warp.f(x);
    if (!(fv > 0.0)) throw std::domain_error("warp function nonpositive at x");
    const double n = model.n;
    const double d = model.fiber_scal - n * (n - 1.0); // exact zero for feasible fibers
    return d / (fv * fv) - n * (n - 1.0) * model.warp.g1(x) - 2.0 * n * model.warp.g2(x);
}

CurvatureField initial_curvature(const EdgeModel& model, const Mesh& mesh) {
    const double n = model.n;
    CurvatureField field;
    field.values.resize(mesh.x.size());

    // tip value is the x->0 limit; finite only when the fiber obstruction holds
    const double d = model.fiber_scal - n * (n - 1.0);
    const double tip = -n * (n - 1.0) * model.warp.g1(0.0) - 2.0 * n * model.warp.g2(0.0);
    if (d != 0.0 || !std::isfinite(tip))
        throw std::domain_error("initial curvature unbounded at the tip");
    field.values[0] = tip;
    for (size_t i = 1; i < mesh.x.size(); ++i)
        field.values[i] = warped_scalar_curvature(model, mesh.x[i]);

    double lo = field.values[0], hi = field.values[0];
    for (double v : field.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    field.scalar_negative = hi < 0.0;
    field.a_bound = std::max(std::abs(lo), std::abs(hi));
    field.b_bound = std::min(std::abs(lo), std::abs(hi));
    return field;
}

namespace {

void require_positive(const std::vector<double>& u) {
    for (double v : u)
        if (!(v > 0.0)) throw std::invalid_argument("conformal factor must be positive");
}

} // namespace

std::vector<double> conformal_scal(const std::vector<double>& u,
                                   const std::vector<double>& lap_u,
                                   const CurvatureField& scal0, int m) {
    if (u.size() != lap_u.size() || u.size() != scal0.values.size())
        throw std::invalid_argument("node array lengths disagree");
    require_positive(u);
    const double kappa = conf_kappa(m);
    const double e = -double(m + 2) / double(m - 2);
    std::vector<double> out(u.size());
    for (size_t i = 0; i < u.size(); ++i)
        out[i] = (scal0.values[i] * u[i] - kappa * lap_u[i]) * std::pow(u[i], e);
    return out;
}

double conformal_volume(const std::vector<double>& u, const EdgeModel& model,
                        const Mesh& mesh) {
    if (u.size() != mesh.x.size())
        throw std::invalid_argument("node array length disagrees with mesh");
    require_positive(u);
    const double p = conf_p(model.m);
    double vol = 0.0;
    for (size_t i = 0; i < u.size(); ++i) vol += mesh.w[i] * std::pow(u[i], p);
    return vol;
}

namespace {

// Dirichlet-form numerator  sum_i w_i u_i (scal0_i u_i - kappa (Delta u)_i)
double dirichlet_numerator(const std::vector<double>& u, const EdgeModel& model,
                           const Mesh& mesh) {
    const DiscreteLaplacian op = assemble_laplacian(mesh, model, 0.0);
    const CurvatureField scal0 = initial_curvature(model, mesh);
    const std::vector<double> lap = edgeflow::apply(op, u);
    const double kappa = conf_kappa(model.m);
    double q = 0.0;
    for (size_t i = 0; i < u.size(); ++i)
        q += mesh.w[i] * u[i] * (scal0.values[i] * u[i] - kappa * lap[i]);
    return q;
}

} // namespace

double total_scalar_functional(const std::vector<double>& u, const EdgeModel& model,
                               const Mesh& mesh) {
    if (u.size() != mesh.x.size())
        throw std::invalid_argument("node array length disagrees with mesh");
    require_positive(u);
    const double q = dirichlet_numerator(u, model, mesh);
    const double vol = conformal_volume(u, model, mesh);
    // ||u||^2_{2m/(m-2)} = vol^{(m-2)/m}
    return q * std::pow(vol, -double(model.m - 2) / double(model.m));
}

double total_scalar_functional_direct(const std::vector<double>& u,
                                      const EdgeModel& model, const Mesh& mesh) {
    if (u.size() != mesh.x.size())
        throw std::invalid_argument("node array length disagrees with mesh");
    require_positive(u);
    const DiscreteLaplacian op = assemble_laplacian(mesh, model, 0.0);
    const CurvatureField scal0 = initial_curvature(model, mesh);
    const std::vector<double> scal_g = conformal_scal(u, edgeflow::apply(op, u), scal0, model.m);
    const double p = conf_p(model.m);
    double integral = 0.0, vol = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
        const double dv = mesh.w[i] * std::pow(u[i], p);
        integral += scal_g[i] * dv;
        vol += dv;
    }
    return integral * std::pow(vol, -double(model.m - 2) / double(model.m));
}

double average_scalar_rho(const std::vector<double>& u, const EdgeModel& model,
                          const Mesh& mesh) {
    if (u.size() != mesh.x.size())
        throw std::invalid_argument("node array length disagrees with mesh");
    require_positive(u);
    const DiscreteLaplacian op = assemble_laplacian(mesh, model, 0.0);
    const CurvatureField scal0 = initial_curvature(model, mesh);
    const std::vector<double> scal_g = conformal_scal(u, edgeflow::apply(op, u), scal0, model.m);
    const double p = conf_p(model.m);
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
        const double dv = mesh.w[i] * std::pow(u[i], p);
        num += scal_g[i] * dv;
        den += dv;
    }
    return num / den;
}

bool FeasibilityReport::ok() const {
    return std::none_of(findings.begin(), findings.end(), [](const FeasibilityFinding& f) {
        return f.level == FeasibilityFinding::Level::Error;
    });
}

FeasibilityReport validate_feasibility(const EdgeModel& model) {
    FeasibilityReport report;
    using Level = FeasibilityFinding::Level;

    // (1) |f^2 - x^2| / x^4 must stay bounded approaching the tip
    {
        double prev = -1.0;
        int growing = 0;
        double worst = 0.0;
        for (int k = 1; k <= 6; ++k) {
            const double x = model.x_max * std::pow(10.0, -k);
            const double fv = model.warp.f(x);
            const double r = std::abs(fv * fv - x * x) / (x * x * x * x);
            worst = std::max(worst, r);
            if (prev >= 0.0 && r > 3.0 * prev && r > 1e-8) ++growing;
            prev = r;
        }
        if (growing >= 3)
            report.findings.push_back(
                {Level::Error, "warp perturbation too large near the tip: |f^2 - x^2|/x^4 "
                               "grows without bound (needs |f^2 - x^2| = O(x^4))"});
        else
            report.findings.push_back(
                {Level::Pass, "warp perturbation admissible: |f^2 - x^2|/x^4 bounded near 0"});
    }

    // (2) fiber obstruction: S_F must equal n(n-1)
    {
        const double want = double(model.n) * double(model.n - 1);
        if (std::abs(model.fiber_scal - want) > 1e-12)
            report.findings.push_back(
                {Level::Error, "fiber obstruction violated: fiber scalar curvature must equal "
                               "n(n-1) for the conic metric to have bounded curvature"});
        else
            report.findings.push_back({Level::Pass, "fiber obstruction satisfied: S_F = n(n-1)"});
    }

    // (3) fiber spectral gap; droppable, so only a warning
    {
        if (model.fiber_lambda0 <= double(model.n))
            report.findings.push_back(
                {Level::Warning, "fiber spectral gap lambda0 <= n; proceeding (the gap "
                                 "assumption is droppable in this setting)"});
        else
            report.findings.push_back({Level::Pass, "fiber spectral gap lambda0 > n"});
    }
    return report;
}

} // namespace edgeflow
