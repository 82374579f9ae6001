#pragma once

#include <Eigen/Core>

#include "imagtime/grid.hpp"

namespace imagtime {

enum class SchemeKind {
    LinearlyImplicit, // Laplacian and unknown implicit, nonlinear coefficient frozen
    SemiExplicit,     // Laplacian implicit, nonlinearity fully explicit
    FullyImplicit,    // everything implicit, solved by Newton iteration
};

const char* to_string(SchemeKind scheme);

/// Tridiagonal matrix of order n: sub/super diagonals have length n-1.
struct TridiagonalSystem {
    Eigen::VectorXd sub;
    Eigen::VectorXd diag;
    Eigen::VectorXd super;
};

/// Thomas elimination without pivoting. Throws SingularSystemError (with the
/// offending row) when a pivot falls below 1e-30 times the row scale.
Eigen::VectorXd solve_tridiagonal(const TridiagonalSystem& sys,
                                  const Eigen::VectorXd& rhs);

/// One step of psi* = psi + tau*( (1/2) Lap_h psi* + psi^2 psi* ):
/// a single tridiagonal solve with the nonlinear coefficient frozen at psi.
/// Throws StepFailureError if the system is singular (large tau * max psi^2).
StateVector step_linearly_implicit(const StateVector& psi, double tau);

/// One step of psi* = psi + tau*( (1/2) Lap_h psi* + psi^3 ):
/// constant-coefficient tridiagonal solve, strictly diagonally dominant.
StateVector step_semi_explicit(const StateVector& psi, double tau);

struct NewtonStats {
    int iterations = 0;
    double final_update = 0.0;
};

/// One step of psi* = psi + tau*( (1/2) Lap_h psi* + (psi*)^3 ), solved by
/// Newton iteration with tridiagonal Jacobian, warm-started from the
/// linearly implicit step. Stops when ||update||_inf <= 1e-12 (1 + ||psi*||_inf);
/// throws NonconvergenceError after 50 iterations.
StateVector step_fully_implicit(const StateVector& psi, double tau,
                                NewtonStats* stats = nullptr);

/// Dispatch on SchemeKind.
StateVector apply_step(const StateVector& psi, double tau, SchemeKind scheme);

/// psi / sqrt(N_h(psi)), restoring the unit discrete L2 sphere.
/// Throws DegenerateStateError when l2_sq(psi) <= 1e-30.
StateVector normalize(const StateVector& psi);

} // namespace imagtime
