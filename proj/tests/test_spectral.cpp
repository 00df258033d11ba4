#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include <lapacke.h>

#include "edgeflow/geometry.hpp"
#include "edgeflow/mesh.hpp"
#include "edgeflow/spectral.hpp"

using namespace edgeflow;

namespace {

double dot_w(const Mesh& mesh, const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += mesh.w[i] * a[i] * b[i];
    return acc;
}

/* Reference smallest eigenvalue: extract the operator column by column, map to
 * the similar symmetric tridiagonal via D = diag(sqrt(w)), hand it to LAPACK. */
double lapack_lambda1(const ConformalOp& op, const Mesh& mesh) {
    const int n = int(mesh.x.size());
    std::vector<std::vector<double>> cols(n);
    std::vector<double> e_j(n, 0.0);
    for (int j = 0; j < n; ++j) {
        e_j[j] = 1.0;
        cols[j] = apply_conformal(op, e_j);
        e_j[j] = 0.0;
    }
    std::vector<double> d(n), e(n - 1);
    for (int i = 0; i < n; ++i) d[i] = cols[i][i];
    for (int i = 0; i + 1 < n; ++i)
        e[i] = cols[i + 1][i] * std::sqrt(mesh.w[i] / mesh.w[i + 1]);
    const int info = LAPACKE_dstev(LAPACK_COL_MAJOR, 'N', n, d.data(), e.data(),
                                   nullptr, n);
    REQUIRE(info == 0);
    double lo = d[0];
    for (double v : d) lo = std::min(lo, v);
    return lo;
}

} // namespace

TEST_CASE("first eigenpair matches the LAPACK tridiagonal oracle") {
    for (int m : {3, 4}) {
        EdgeModel model = make_model(m, perturbed_sinh_warp(0.1, "x3gauss"), 4.0,
                                     double((m - 1) * (m - 2)), double(m - 1));
        Mesh mesh = build_mesh(128, 2.0, 4.0, model);
        ConformalOp op = assemble_conformal_laplacian(model, mesh);
        auto [lambda1, phi1] = first_eigenpair(op, mesh);
        const double oracle = lapack_lambda1(op, mesh);
        CHECK(lambda1 == doctest::Approx(oracle).epsilon(1e-9));
        for (double v : phi1) CHECK(v > 0.0);
        // L2(w) normalization
        CHECK(dot_w(mesh, phi1, phi1) == doctest::Approx(1.0).epsilon(1e-12));
        // eigen-residual in the weighted norm
        std::vector<double> r = apply_conformal(op, phi1);
        for (size_t i = 0; i < r.size(); ++i) r[i] -= lambda1 * phi1[i];
        CHECK(std::sqrt(dot_w(mesh, r, r)) < 1e-8 * std::max(1.0, std::abs(lambda1)));
    }
}

TEST_CASE("hyperbolic cone: lambda1 = scal exactly, eigenfunction constant") {
    EdgeModel model = make_model(4, sinh_warp(), 4.0, 6.0, 4.0);
    Mesh mesh = build_mesh(96, 2.0, 4.0, model);
    ConformalOp op = assemble_conformal_laplacian(model, mesh);
    auto [lambda1, phi1] = first_eigenpair(op, mesh);
    CHECK(lambda1 == doctest::Approx(-12.0).epsilon(1e-12));
    const double c = phi1[0];
    for (double v : phi1) CHECK(v == doctest::Approx(c).epsilon(1e-10));
}

TEST_CASE("flat cone: lambda1 vanishes within the zero band") {
    EdgeModel model = make_model(4, linear_warp(), 4.0, 6.0, 4.0);
    Mesh mesh = build_mesh(128, 2.0, 4.0, model);
    ConformalOp op = assemble_conformal_laplacian(model, mesh);
    auto [lambda1, phi1] = first_eigenpair(op, mesh);
    CHECK(std::abs(lambda1) < 1e-6);
    (void)phi1;
}

TEST_CASE("Rayleigh quotients of random positive trials stay above lambda1") {
    EdgeModel model = make_model(4, perturbed_sinh_warp(0.1, "x3gauss"), 4.0, 6.0, 4.0);
    Mesh mesh = build_mesh(96, 2.0, 4.0, model);
    ConformalOp op = assemble_conformal_laplacian(model, mesh);
    auto [lambda1, phi1] = first_eigenpair(op, mesh);
    (void)phi1;
    std::mt19937 rng(20240817u);
    std::uniform_real_distribution<double> dist(0.1, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> v(mesh.x.size());
        for (double& x : v) x = dist(rng);
        const double quot = dot_w(mesh, apply_conformal(op, v), v) / dot_w(mesh, v, v);
        CHECK(quot >= lambda1 - 1e-8);
    }
}

TEST_CASE("eigen-metric curvature identity: constant eigenfunction is exact") {
    // phi == c solves the eigenproblem on a constant-scal model with
    // lambda = scal; both sides of the identity collapse to scal * c^{1-N}
    EdgeModel model = make_model(4, sinh_warp(), 4.0, 6.0, 4.0);
    Mesh mesh = build_mesh(64, 2.0, 4.0, model);
    std::vector<double> phi(mesh.x.size(), 0.8);
    IdentityReport rep = eigen_conformal_scal_identity(-12.0, phi, model, mesh);
    CHECK(rep.max_rel_dev <= 1e-12);
    CHECK(rep.sign_conformal_scal == -1);
}

TEST_CASE("eigen-metric curvature identity sharpens under refinement") {
    EdgeModel model = make_model(4, perturbed_sinh_warp(0.1, "x3gauss"), 4.0, 6.0, 4.0);
    auto dev_at = [&](int K) {
        Mesh mesh = build_mesh(K, 2.0, 4.0, model);
        ConformalOp op = assemble_conformal_laplacian(model, mesh);
        auto [lambda1, phi1] = first_eigenpair(op, mesh);
        return eigen_conformal_scal_identity(lambda1, phi1, model, mesh).max_rel_dev;
    };
    const double d128 = dev_at(128);
    const double d256 = dev_at(256);
    CHECK(d256 < 1e-3);
    CHECK(d256 < d128);
}

TEST_CASE("total scalar functional is scale invariant") {
    EdgeModel model = make_model(4, perturbed_sinh_warp(0.1, "x3gauss"), 4.0, 6.0, 4.0);
    Mesh mesh = build_mesh(64, 2.0, 4.0, model);
    std::vector<double> u(mesh.x.size());
    for (size_t i = 0; i < u.size(); ++i) u[i] = 1.0 + 0.3 * std::sin(mesh.x[i]);
    std::vector<double> u3(u);
    for (double& v : u3) v *= 3.0;
    const double s1 = total_scalar_functional(u, model, mesh);
    const double s3 = total_scalar_functional(u3, model, mesh);
    CHECK(s1 == doctest::Approx(s3).epsilon(1e-12));
}

TEST_CASE("minimizer never exceeds the start and is negative on sinh") {
    EdgeModel model = make_model(4, sinh_warp(), 4.0, 6.0, 4.0);
    Mesh mesh = build_mesh(96, 2.0, 4.0, model);
    std::vector<double> ones(mesh.x.size(), 1.0);
    const double start = total_scalar_functional(ones, model, mesh);
    const double nu = minimize_yamabe_functional(model, mesh, 500, 0.02);
    CHECK(nu <= start + 1e-8 * std::abs(start));
    CHECK(nu < 0.0);
}

TEST_CASE("trichotomy sign patterns on the three reference models") {
    struct Case {
        EdgeModel model;
        int K;
        std::array<int, 3> expect;
    };
    const std::vector<Case> cases = {
        {make_model(4, sinh_warp(), 4.0, 6.0, 4.0), 128, {-1, -1, -1}},
        {make_model(4, linear_warp(), 4.0, 6.0, 4.0), 128, {0, 0, 0}},
        {make_model(4, perturbed_sinh_warp(0.1, "x3gauss"), 4.0, 6.0, 4.0), 128,
         {-1, -1, -1}},
    };
    for (const Case& c : cases) {
        Mesh mesh = build_mesh(c.K, 2.0, 4.0, c.model);
        TrichotomyReport rep = trichotomy_check(c.model, mesh, 2000, 0.02);
        CHECK(rep.pass);
        CHECK(rep.result.trichotomy_signs == c.expect);
    }
}

TEST_CASE("sign_with_band maps the zero band to zero") {
    CHECK(sign_with_band(0.5) == 1);
    CHECK(sign_with_band(-0.5) == -1);
    CHECK(sign_with_band(1e-9) == 0);
    CHECK(sign_with_band(-1e-9) == 0);
    CHECK(sign_with_band(2e-6) == 1);
    CHECK(sign_with_band(2e-6, 1e-5) == 0);
}
