/// @file geometry.hpp
/// Model cone geometry: warp functions, curvature, and the conformal-transformation
/// quantities (volume, total scalar curvature, average scalar curvature).

#pragma once

#include <string>
#include <vector>

namespace edgeflow {

struct Mesh;

enum class WarpKind { Linear, Sinh, PerturbedSinh };

/* Warp function f of the model metric dx^2 + f(x)^2 g_F, with f(0)=0, f'(0)=1.
 * Besides f, f', f'' each kind provides the combinations
 *   g1 = (f'^2 - 1)/f^2   and   g2 = f''/f
 * in cancellation-free form; the curvature formula evaluated through them keeps
 * full precision near the tip, where the naive quotients lose ~8 digits. */
struct WarpSpec {
    WarpKind kind = WarpKind::Linear;
    double eps = 0.0;          // PerturbedSinh amplitude
    std::string shape_id = ""; // PerturbedSinh perturbation shape

    double f(double x) const;
    double df(double x) const;
    double d2f(double x) const;
    double g1(double x) const; // (f'^2 - 1)/f^2, finite limit at x=0
    double g2(double x) const; // f''/f, finite limit at x=0
};

WarpSpec linear_warp();
WarpSpec sinh_warp();
// shape_id "x3gauss": f = sinh x + eps*x^3*exp(-x^2)  (admissible O(x^3) perturbation)
// shape_id "x2gauss": f = sinh x + eps*x^2*exp(-x^2)  (inadmissible; feasibility negative control)
WarpSpec perturbed_sinh_warp(double eps, const std::string& shape_id = "x3gauss");

/* The model edge manifold: an isolated conic point, total dimension m = n+1,
 * fiber summarized by its constant scalar curvature and spectral gap. */
struct EdgeModel {
    int m = 0;                  // total dimension, >= 3
    int n = 0;                  // fiber dimension, m = n+1
    double fiber_scal = 0.0;    // S_F
    double fiber_lambda0 = 0.0; // first nonzero fiber eigenvalue (metadata)
    WarpSpec warp;
    double x_max = 0.0;

    void validate() const; // throws std::invalid_argument on a bad combination
};

EdgeModel make_model(int m, const WarpSpec& warp, double x_max,
                     double fiber_scal, double fiber_lambda0);

// exponents and constants of the conformal-factor equations
double conf_N(int m);      // (m+2)/(m-2)
double conf_kappa(int m);  // 4(m-1)/(m-2)
double conf_p(int m);      // 2m/(m-2), the volume exponent
double conf_c(int m);      // (m+2)/4

struct CurvatureField {
    std::vector<double> values;  // scal(g_init) at the mesh nodes
    double a_bound = 0.0;        // max |scal|
    double b_bound = 0.0;        // min |scal| (= -max scal when sign-definite negative)
    bool scalar_negative = false;
};

/* scal of dx^2 + f^2 g_F at radius x:  S_F/f^2 - 2n f''/f - n(n-1) f'^2/f^2.
 * Throws std::domain_error for x <= 0 or f(x) <= 0. */
double warped_scalar_curvature(const EdgeModel& model, double x);

/* Curvature sampled at every mesh node; the tip value is the x->0 limit, which is
 * finite only when S_F = n(n-1) (throws std::domain_error otherwise). */
CurvatureField initial_curvature(const EdgeModel& model, const Mesh& mesh);

/* scal of u^{4/(m-2)} g_init given u and its Laplacian at the same nodes:
 * u^{-(m+2)/(m-2)} (-kappa * lap_u + scal0 * u). */
std::vector<double> conformal_scal(const std::vector<double>& u,
                                   const std::vector<double>& lap_u,
                                   const CurvatureField& scal0, int m);

// integral of u^{2m/(m-2)} f^n dx by mesh quadrature (fiber volume normalized to 1)
double conformal_volume(const std::vector<double>& u, const EdgeModel& model,
                        const Mesh& mesh);

/* Total scalar curvature functional in Dirichlet form,
 *   S(u) = [ sum_i w_i (kappa |grad u|^2 + scal0 u^2) ] / ||u||^2_{2m/(m-2)},
 * scale-invariant in u. The _direct variant integrates the conformal curvature
 * against the conformal volume instead; the two agree by summation by parts. */
double total_scalar_functional(const std::vector<double>& u, const EdgeModel& model,
                               const Mesh& mesh);
double total_scalar_functional_direct(const std::vector<double>& u,
                                      const EdgeModel& model, const Mesh& mesh);

// rho = (integral of scal(g) dvol_g) / vol(g) for g = u^{4/(m-2)} g_init
double average_scalar_rho(const std::vector<double>& u, const EdgeModel& model,
                          const Mesh& mesh);

struct FeasibilityFinding {
    enum class Level { Pass, Warning, Error };
    Level level;
    std::string what;
};

struct FeasibilityReport {
    std::vector<FeasibilityFinding> findings;
    bool ok() const; // no Error findings
};

/* Three findings: (1) |f^2 - x^2|/x^4 bounded near 0, (2) S_F = n(n-1) to 1e-12,
 * (3) fiber_lambda0 > n (warning only when violated). */
FeasibilityReport validate_feasibility(const EdgeModel& model);

} // namespace edgeflow
