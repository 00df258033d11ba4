#include "edgeflow/mesh.hpp"

#include <cmath>
#include <stdexcept>

#include "edgeflow/geometry.hpp"

namespace edgeflow {

namespace {

// 4-point Gauss-Legendre on [a,b]
double gauss4(double a, double b, const WarpSpec& warp, int n) {
    static const double node[2] = {0.3399810435848563, 0.8611363115940526};
    static const double wt[2] = {0.6521451548625461, 0.3478548451374538};
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int j = 0; j < 2; ++j) {
        s += wt[j] * (std::pow(warp.f(mid - half * node[j]), n) +
                      std::pow(warp.f(mid + half * node[j]), n));
    }
    return half * s;
}

} // namespace

Mesh build_mesh(int K, double gamma, double x_max, const EdgeModel& model) {
    if (K < 2) throw std::invalid_argument("mesh needs K >= 2 cells");
    if (!(gamma >= 1.0)) throw std::invalid_argument("grading exponent gamma must be >= 1");
    if (!(x_max > 0.0)) throw std::invalid_argument("x_max must be positive");

    Mesh mesh;
    mesh.gamma = gamma;
    mesh.x_max = x_max;
    mesh.x.resize(K + 1);
    for (int i = 0; i <= K; ++i) mesh.x[i] = x_max * std::pow(double(i) / K, gamma);
    mesh.x[K] = x_max; // exact endpoint regardless of pow rounding

    /* Control-volume weights: w_i integrates f^n over the cell
     * [x_{i-1/2}, x_{i+1/2}].  The tip weight is chosen so that the first row
     * of the assembled Laplacian is exactly the even-reflection regular limit
     * 2(n+1)(u_1 - u_0)/h_1^2: w_0 = f(x_{1/2})^n h_1 / (2(n+1)). */
    const int n = model.n;
    mesh.w.resize(K + 1);
    const double h1 = mesh.x[1] - mesh.x[0];
    const double face0 = 0.5 * (mesh.x[0] + mesh.x[1]);
    mesh.w[0] = std::pow(model.warp.f(face0), n) * h1 / (2.0 * (n + 1));
    for (int i = 1; i < K; ++i) {
        const double lo = 0.5 * (mesh.x[i - 1] + mesh.x[i]);
        const double hi = 0.5 * (mesh.x[i] + mesh.x[i + 1]);
        mesh.w[i] = gauss4(lo, mesh.x[i], model.warp, n) + gauss4(mesh.x[i], hi, model.warp, n);
    }
    const double lastface = 0.5 * (mesh.x[K - 1] + mesh.x[K]);
    mesh.w[K] = gauss4(lastface, mesh.x[K], model.warp, n);
    return mesh;
}

} // namespace edgeflow
