#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "edgeflow/geometry.hpp"
#include "edgeflow/laplacian.hpp"
#include "edgeflow/mesh.hpp"

using namespace edgeflow;

namespace {

double dot_w(const Mesh& mesh, const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += mesh.w[i] * a[i] * b[i];
    return acc;
}

double norm_w(const Mesh& mesh, const std::vector<double>& a) {
    return std::sqrt(dot_w(mesh, a, a));
}

// test function vanishing to second order at the tip (compatible with the
// Neumann-type condition u'(0) = 0) and its radial Laplacian
double test_u(double x) { return std::cos(x) + 0.25 * x * x; }
double test_lap(const EdgeModel& model, double x) {
    const double du = -std::sin(x) + 0.5 * x;
    const double d2u = -std::cos(x) + 0.5;
    return d2u + double(model.n) * (model.warp.df(x) / model.warp.f(x)) * du;
}

} // namespace

TEST_CASE("constants are bitwise harmonic") {
    EdgeModel model = make_model(4, perturbed_sinh_warp(0.1, "x3gauss"), 4.0, 6.0, 4.0);
    Mesh mesh = build_mesh(128, 2.0, 4.0, model);
    DiscreteLaplacian op = assemble_laplacian(mesh, model, 0.0);
    std::vector<double> ones(mesh.x.size(), 1.0);
    std::vector<double> out = apply(op, ones);
    for (double v : out) CHECK(v == 0.0);
    std::vector<double> sevens(mesh.x.size(), 7.0);
    out = apply(op, sevens);
    for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("weighted self-adjointness to near machine precision") {
    for (int m : {3, 4, 5}) {
        EdgeModel model = make_model(m, perturbed_sinh_warp(0.05, "x3gauss"), 4.0,
                                     double((m - 1) * (m - 2)), double(m - 1));
        Mesh mesh = build_mesh(192, 2.0, 4.0, model);
        DiscreteLaplacian op = assemble_laplacian(mesh, model, 0.0);
        std::vector<double> u(mesh.x.size()), v(mesh.x.size());
        for (size_t i = 0; i < u.size(); ++i) {
            u[i] = std::sin(1.0 + 0.7 * mesh.x[i]);
            v[i] = std::exp(-0.3 * mesh.x[i]) + 0.1 * mesh.x[i];
        }
        std::vector<double> Lu = apply(op, u), Lv = apply(op, v);
        const double asym = std::abs(dot_w(mesh, Lu, v) - dot_w(mesh, u, Lv));
        const double scale = norm_w(mesh, Lu) * norm_w(mesh, v) +
                             norm_w(mesh, u) * norm_w(mesh, Lv);
        CHECK(asym / scale < 1e-12);
    }
}

TEST_CASE("tip row is the regular-limit formula, written literally") {
    EdgeModel model = make_model(4, sinh_warp(), 4.0, 6.0, 4.0);
    Mesh mesh = build_mesh(64, 2.0, 4.0, model);
    DiscreteLaplacian op = assemble_laplacian(mesh, model, 0.0);
    const double h1 = mesh.x[1];
    std::vector<double> u(mesh.x.size(), 0.0);
    u[1] = 1.0;
    std::vector<double> out = apply(op, u);
    // Delta u at the tip = 2(n+1)(u_1 - u_0)/h_1^2 exactly
    CHECK(out[0] == 2.0 * 4.0 * (1.0 - 0.0) / (h1 * h1));
}

TEST_CASE("operator is nonpositive: quadratic form <= 0") {
    EdgeModel model = make_model(4, perturbed_sinh_warp(0.1, "x3gauss"), 4.0, 6.0, 4.0);
    Mesh mesh = build_mesh(96, 2.0, 4.0, model);
    for (double lambda : {0.0, 4.0}) {
        DiscreteLaplacian op = assemble_laplacian(mesh, model, lambda);
        std::vector<double> u(mesh.x.size());
        for (size_t i = 0; i < u.size(); ++i) u[i] = std::sin(3.0 * mesh.x[i]) + 0.2;
        std::vector<double> Lu = apply(op, u);
        CHECK(dot_w(mesh, Lu, u) <= 1e-10 * dot_w(mesh, u, u));
    }
}

TEST_CASE("consistency order >= 2 away from the tip") {
    EdgeModel model = make_model(4, sinh_warp(), 4.0, 6.0, 4.0);
    auto interior_error = [&](int K) {
        Mesh mesh = build_mesh(K, 2.0, 4.0, model);
        DiscreteLaplacian op = assemble_laplacian(mesh, model, 0.0);
        std::vector<double> u(mesh.x.size());
        for (size_t i = 0; i < u.size(); ++i) u[i] = test_u(mesh.x[i]);
        std::vector<double> Lu = apply(op, u);
        double err = 0.0;
        for (size_t i = 0; i < u.size(); ++i) {
            if (mesh.x[i] < 0.5 || mesh.x[i] > 3.5) continue;
            err = std::max(err, std::abs(Lu[i] - test_lap(model, mesh.x[i])));
        }
        return err;
    };
    const double e1 = interior_error(128);
    const double e2 = interior_error(256);
    const double e3 = interior_error(512);
    const double order12 = std::log2(e1 / e2);
    const double order23 = std::log2(e2 / e3);
    CHECK(order12 > 1.9);
    CHECK(order23 > 1.9);
    CHECK(order23 < 2.6);
}

TEST_CASE("fiber penalty lambda > 0 damps the tip value") {
    // with lambda > 0 the tip diagonal picks up an h^{-2}-scale penalty: the
    // operator applied to a constant is strongly negative at the tip
    EdgeModel model = make_model(4, sinh_warp(), 4.0, 6.0, 4.0);
    Mesh mesh = build_mesh(64, 2.0, 4.0, model);
    DiscreteLaplacian op = assemble_laplacian(mesh, model, 4.0);
    std::vector<double> ones(mesh.x.size(), 1.0);
    std::vector<double> out = apply(op, ones);
    CHECK(out[0] < -1.0 / (mesh.x[1] * mesh.x[1]) * 0.01);
    for (size_t i = 1; i < out.size(); ++i) CHECK(out[i] < 0.0);
}

TEST_CASE("solve_shifted inverts (I - tau a Delta)") {
    EdgeModel model = make_model(4, perturbed_sinh_warp(0.1, "x3gauss"), 4.0, 6.0, 4.0);
    Mesh mesh = build_mesh(128, 2.0, 4.0, model);
    DiscreteLaplacian op = assemble_laplacian(mesh, model, 0.0);
    const double tau = 1e-3;
    std::vector<double> a(mesh.x.size()), rhs(mesh.x.size());
    for (size_t i = 0; i < a.size(); ++i) {
        a[i] = 1.0 + 0.5 * std::sin(mesh.x[i]);
        rhs[i] = std::cos(2.0 * mesh.x[i]);
    }
    std::vector<double> v = solve_shifted(op, a, tau, rhs);
    std::vector<double> Lv = apply(op, v);
    double worst = 0.0;
    for (size_t i = 0; i < v.size(); ++i)
        worst = std::max(worst, std::abs(v[i] - tau * a[i] * Lv[i] - rhs[i]));
    CHECK(worst < 1e-11);
}

TEST_CASE("solve_shifted rejects a corrupted non-dominant system") {
    EdgeModel model = make_model(4, sinh_warp(), 4.0, 6.0, 4.0);
    Mesh mesh = build_mesh(32, 2.0, 4.0, model);
    DiscreteLaplacian op = assemble_laplacian(mesh, model, 0.0);
    op.sub[10] = -op.sub[10]; // flip one face conductance
    std::vector<double> a(mesh.x.size(), 1.0), rhs(mesh.x.size(), 1.0);
    CHECK_THROWS_AS(solve_shifted(op, a, 1.0, rhs), std::runtime_error);
}

TEST_CASE("detail::tridiag_solve on a frozen 3x3 system") {
    // [2 1 0; 1 3 1; 0 1 2] x = [3, 5, 3] has the exact solution [1, 1, 1]
    std::vector<double> sub{0.0, 1.0, 1.0}, diag{2.0, 3.0, 2.0}, super{1.0, 1.0, 0.0};
    std::vector<double> rhs{3.0, 5.0, 3.0};
    std::vector<double> x = detail::tridiag_solve(sub, diag, super, rhs);
    for (double v : x) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
}
