#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "imagtime/flow.hpp"

namespace imagtime {

/// Local coordinates psi = (1 + r) eta_ref + u with u orthogonal to eta_ref.
struct Decomposition {
    double r;
    StateVector u;
};

/// P_eta psi = <psi, eta_ref> eta_ref.
StateVector project_P_eta(const StateVector& psi, const GroundStateRef& ref);

/// P_W psi = psi - P_eta psi; the result is orthogonal to eta_ref.
StateVector project_P_W(const StateVector& psi, const GroundStateRef& ref);

/// r = <psi, eta_ref> - 1, u = psi - <psi, eta_ref> eta_ref.
Decomposition decompose(const StateVector& psi, const GroundStateRef& ref);

/// r(u) = -1 + sqrt(1 - ||u||^2): the radial coordinate restoring unit norm,
/// valid for ||u|| < 1. Throws OutOfChartError otherwise.
double r_of_u(const StateVector& u);

/// Linearized operator A u = P_W( lambda_h u - (1/2)Lap_h u - 3 eta_ref^2 u ).
/// Requires u orthogonal to eta_ref (relative tolerance 1e-10); maps W to W.
StateVector operator_A(const StateVector& u, const GroundStateRef& ref);

/// Smallest eigenvalue of a symmetric operator restricted to the even
/// subspace of W (basis: symmetrized coordinate vectors orthogonalized
/// against eta_ref), by dense symmetric eigensolve. Grids with K > 2048
/// are rejected; an iterative eigensolver would be needed there.
double min_eigenvalue_symmetric_W(
    const GroundStateRef& ref,
    const std::function<StateVector(const StateVector&)>& op);

/// min_eigenvalue_symmetric_W applied to operator_A; strictly positive for
/// valid ground states (coercivity of the constrained second variation).
double min_eigenvalue_A(const GroundStateRef& ref);

struct RateFit {
    double rate = 0.0;      // per unit time (or power-law slope)
    double intercept = 0.0;
    double r_squared = 0.0;
    int points_used = 0;
    bool degenerate = false; // constant data: rate 0, r_squared meaningless
};

struct ErrorWindow {
    double lo;
    double hi;
};

/// Least-squares line through (x, y); shared backend of the two fits below.
RateFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Least-squares fit of ln(err_ref) against n*tau over the trace records
/// whose err_ref lies inside the window; rate is the negated slope.
/// Throws InsufficientDataError with fewer than 3 usable points.
RateFit fit_exponential_rate(const FlowTrace& trace, double tau, ErrorWindow window);

/// Least-squares slope of ln(error) against ln(parameter): the estimated
/// convergence order of a (parameter, error) sweep.
RateFit fit_power_slope(const std::vector<std::pair<double, double>>& pairs);

} // namespace imagtime
