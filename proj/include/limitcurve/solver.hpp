#pragma once

#include "limitcurve/core.hpp"

#include <string>

namespace limitcurve {

/// Options for the damped, regularized semismooth Newton iterations.
struct NewtonOptions {
    double tol_rel = 1e-10;
    double tol_abs = 1e-12;
    int max_iter = 100;

    // Backtracking line search on the nonlinear residual norm.
    double backtrack_factor = 0.5;
    double min_step = 1e-8;
    double armijo_slope = 1e-4;

    // Diagonal regularization ladder applied when the tangent solve fails
    // or the line search stalls: eps * max(diag H) * I, eps doubling.
    double reg_epsilon = 1e-8;
    double reg_epsilon_max = 1e-2;
};

enum class FailureReason {
    none,
    max_iter,
    singular_tangent,
    line_search_stall,
    diverged,
    constraint_violation,
};

const char* to_string(FailureReason reason);

struct SolveOutcome {
    Vector u;
    double extra = 0.0;  // t for load-factor saddles, lambda for strength saddles
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    FailureReason failure_reason = FailureReason::none;
};

struct LinearSolveResult {
    Vector x;
    bool ok = false;
};

/// Solves K x = rhs for symmetric K by sparse LDLT factorization, falling
/// back to diagonally preconditioned conjugate gradients (at most 10n
/// iterations). ok is set when ||K x - rhs|| <= 1e-10 * (1 + ||rhs||).
LinearSolveResult linear_solve(const SparseMatrix& K, const Vector& rhs);

struct BorderedSolveResult {
    Vector du;
    double ds = 0.0;
    bool ok = false;
    bool regularized = false;
};

/// Solves the bordered system
///   [ H  -g ] [du]   [r1]
///   [ g'  0 ] [ds] = [r2]
/// by a Schur complement on H, regularizing H when its factorization fails.
/// Fails with ok = false when |g' H^-1 g| <= 1e-14 * ||g||^2 after the
/// regularization ladder is exhausted.
BorderedSolveResult solve_bordered(const SparseMatrix& H, const Vector& g,
                                   const Vector& r1, double r2,
                                   const NewtonOptions& opts = {});

/// Newton iteration for F(u) = t*b starting from u0. Non-convergence is
/// reported through the outcome, never thrown: for loads past the limit the
/// iteration has nothing to converge to and the caller decides what a
/// failure means.
SolveOutcome newton_solve(const PotentialModel& model, const LoadVector& b, double t,
                          Vector u0, const NewtonOptions& opts = {});

/// Newton iteration for the extended system F(u) = t*b, b'u = omega with
/// unknowns (u, t). A solution exists for every omega >= 0.
SolveOutcome saddle_solve_ll(const PotentialModel& model, const LoadVector& b, double omega,
                             Vector u0, double t0, const NewtonOptions& opts = {});

/// Newton iteration for the extended system F_lambda(u) = b, b'u = omega with
/// unknowns (u, lambda). If the iteration converges to lambda below lambda0
/// the outcome carries failure_reason = constraint_violation (omega was below
/// the admissible work range).
SolveOutcome saddle_solve_ssr(const ParamFamily& family, const LoadVector& b, double omega,
                              Vector u0, double lambda_init, const NewtonOptions& opts = {});

}  // namespace limitcurve
