#pragma once

#include <vector>

#include "imagtime/grid.hpp"

namespace imagtime {

/// The exact ground state eta(x) = (1/2) sech(x/2), evaluated through
/// exp(-|x|/2) so that large arguments underflow gracefully instead of
/// overflowing.
double eta(double x);

/// eta'(x) = -(1/4) sech(x/2) tanh(x/2).
double eta_prime(double x);

/// Multiplier lambda of the constrained Euler-Lagrange equation
///   -(1/2) eta'' - eta^3 = -lambda * eta,
/// which the sech profile satisfies with lambda = 1/8.
double lambda_exact();

/// Samples eta on the grid nodes; exactly even in the node index.
StateVector sample_soliton(const Grid& grid);

/// Piecewise-linear (hat function) interpolant of a StateVector,
/// identically zero for |x| >= (K+1)h.
class PiecewiseLinear {
public:
    explicit PiecewiseLinear(StateVector psi);

    double value(double x) const;
    double derivative(double x) const;
    double operator()(double x) const { return value(x); }

    const StateVector& state() const { return psi_; }

private:
    StateVector psi_;
};

PiecewiseLinear embed(const StateVector& psi);

/// Per-cell Gauss-Legendre rule on [-1, 1] plus the extent to which the
/// soliton tail is integrated outside the lattice support.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    double tail_extent = 80.0;

    /// order in {2, 4, 8}; default matches the accuracy analysis in the
    /// docs (degree-7 exactness per cell).
    static QuadratureRule gauss(int order = 4, double tail_extent = 80.0);
};

/// Continuous H1(R) norm of (embed(psi) - eta), by per-cell quadrature of
/// (i_h psi - eta)^2 + ((i_h psi)' - eta')^2 over the lattice support and
/// of eta^2 + eta'^2 over the tail up to max((K+1)h, tail_extent). The
/// remainder beyond |x| = 80 is below 1e-34 and is neglected.
double h1_error_vs_exact(const StateVector& psi,
                         const QuadratureRule& rule = QuadratureRule::gauss());

} // namespace imagtime
