#pragma once

#include <cmath>

#include <Eigen/Core>

#include "imagtime/errors.hpp"

namespace imagtime {

/// Uniform symmetric 1D lattice: nodes x_l = l*h for l in {-K, ..., K},
/// with homogeneous Dirichlet values implied for |l| > K.
struct Grid {
    Grid(double spacing, int cutoff);

    double h;
    int K;

    int size() const { return 2 * K + 1; }
    double node(int ell) const { return ell * h; }

    friend bool operator==(const Grid&, const Grid&) = default;
};

/// Real node values on a Grid. Values are immutable once constructed;
/// indices outside the cutoff read as zero.
class StateVector {
public:
    StateVector(Grid grid, Eigen::VectorXd values);

    static StateVector zeros(const Grid& grid);

    const Grid& grid() const { return grid_; }
    const Eigen::VectorXd& values() const { return values_; }

    /// Value at node index ell in {-K, ..., K}; zero outside.
    double at(int ell) const {
        if (ell < -grid_.K || ell > grid_.K) return 0.0;
        return values_[ell + grid_.K];
    }

    int cutoff() const { return grid_.K; }
    double spacing() const { return grid_.h; }

private:
    Grid grid_;
    Eigen::VectorXd values_;
};

StateVector operator+(const StateVector& a, const StateVector& b);
StateVector operator-(const StateVector& a, const StateVector& b);
StateVector operator-(const StateVector& a);
StateVector operator*(double c, const StateVector& a);

/// Second-difference operator (psi^{l+1} + psi^{l-1} - 2 psi^l)/h^2 with
/// Dirichlet neighbors beyond the cutoff treated as zero.
StateVector laplacian(const StateVector& psi);

/// Discrete squared L2 norm N_h(psi) = h * sum |psi^l|^2.
double l2_sq(const StateVector& psi);

/// Discrete L2 scalar product h * sum psi^l phi^l. Throws GridMismatchError
/// if the states live on different grids.
double inner(const StateVector& psi, const StateVector& phi);

/// Discrete H1 norm squared,
///   2h * sum_j |psi^{j+1} - psi^j|^2 / h^2 + h * sum_j |psi^j|^2,
/// with out-of-range values zero. Note the weight 2 on the difference term;
/// it is part of the norm convention used throughout this project.
double h1_norm_sq(const StateVector& psi);

/// Discrete H1 distance sqrt(h1_norm_sq(a - b)).
double h1_dist(const StateVector& a, const StateVector& b);

/// Discrete Hamiltonian
///   H_h(psi) = h * sum_j [ |(psi^j - psi^{j-1})/h|^2 - |psi^j|^4 / 2 ].
/// Used as a reporting/Lyapunov diagnostic; the flow steps are defined by
/// their own update equations, not by a gradient of H_h.
double hamiltonian_h(const StateVector& psi);

namespace detail {

/// Neumaier compensated accumulator: reduction error stays at a few ulps
/// independent of the number of terms. All norms and scalar products in
/// this module reduce through it.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace detail

} // namespace imagtime
