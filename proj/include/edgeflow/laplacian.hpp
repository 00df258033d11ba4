/// @file laplacian.hpp
/// Discrete radial Laplace-Beltrami operator Delta u = u'' + n(f'/f)u' - lambda f^{-2} u
/// on the graded mesh, with the regular-solution (even reflection) row at the tip.

#pragma once

#include <vector>

#include "edgeflow/mesh.hpp"

namespace edgeflow {

/* Tridiagonal rows; row i is sub[i]*u_{i-1} + diag[i]*u_i + super[i]*u_{i+1}.
 * sub[0] and super[K] are zero.  Assembled in finite-volume form: off-diagonals
 * are face conductances divided by the node weight, so the operator is
 * self-adjoint w.r.t. the mesh weights by construction, nonpositive, and
 * satisfies the discrete maximum principle at every node including the tip. */
struct DiscreteLaplacian {
    std::vector<double> sub, diag, super;
    std::vector<double> fiber_diag; // lambda * f(x_i)^{-2} part, kept separate
    double lambda = 0.0;
};

/* lambda = 0: tip row is the regular-limit row 2(n+1)(u_1 - u_0)/h_1^2
 * (Neumann reflection, Delta u(0) = (n+1) u''(0)); outer row reflects.
 * lambda > 0: the tip diagonal gains a finite-volume penalty ~ h^{-2} selecting
 * the decaying branch. Throws std::runtime_error if f(x_i) <= 0 for i >= 1. */
DiscreteLaplacian assemble_laplacian(const Mesh& mesh, const EdgeModel& model,
                                     double lambda);

/* Matrix-vector product, evaluated in grouped-difference form
 *   sub_i (u_{i-1} - u_i) + super_i (u_{i+1} - u_i) - fiber_diag_i u_i
 * so constants are bitwise harmonic for lambda = 0. */
std::vector<double> apply(const DiscreteLaplacian& op, const std::vector<double>& u);

/* Solves (I - tau diag(a) op) v = rhs by the Thomas algorithm.  The system is
 * verified diagonally dominant first (throws std::runtime_error otherwise; with
 * the assembled Laplacian dominance holds for every tau > 0, so a failure
 * signals a corrupted operator). Throws on a vanishing pivot. */
std::vector<double> solve_shifted(const DiscreteLaplacian& op,
                                  const std::vector<double>& a, double tau,
                                  const std::vector<double>& rhs);

namespace detail {

/* Plain Thomas solve of a general tridiagonal system (no dominance requirement;
 * zero-pivot check only).  Used by the spectral inverse iteration, where shifts
 * approach the spectrum. */
std::vector<double> tridiag_solve(const std::vector<double>& sub,
                                  const std::vector<double>& diag,
                                  const std::vector<double>& super,
                                  const std::vector<double>& rhs);

} // namespace detail

} // namespace edgeflow
