/// @file mesh.hpp
/// Graded radial mesh with quadrature weights against the measure f(x)^n dx.

#pragma once

#include <vector>

#include "edgeflow/geometry.hpp"

namespace edgeflow {

/* Nodes x_i = x_max (i/K)^gamma, i = 0..K.  w_i is the f^n-integral of the i-th
 * control volume [x_{i-1/2}, x_{i+1/2}]; the same weights serve as the quadrature
 * rule and as the finite-volume scaling of the Laplacian, which is what makes the
 * operator exactly self-adjoint in the weighted inner product sum w_i u_i v_i. */
struct Mesh {
    std::vector<double> x; // K+1 nodes, x[0] = 0
    std::vector<double> w; // K+1 nonnegative weights, sum = integral of f^n + O(h^2)
    double gamma = 1.0;
    double x_max = 0.0;

    int K() const { return static_cast<int>(x.size()) - 1; }
    double spacing(int i) const { return x[i] - x[i - 1]; } // h_i, i = 1..K
};

/* Throws std::invalid_argument for K < 2, gamma < 1, or x_max <= 0.
 * (Production configs additionally require K >= 16; see RunConfig.) */
Mesh build_mesh(int K, double gamma, double x_max, const EdgeModel& model);

} // namespace edgeflow
