#include "imagtime/grid.hpp"

#include <cmath>
#include <string>

namespace imagtime {

Grid::Grid(double spacing, int cutoff) : h(spacing), K(cutoff) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw Error("Grid: spacing must be positive and finite, got h=" + std::to_string(spacing));
    }
    if (K < 1) {
        throw Error("Grid: cutoff index must be >= 1, got K=" + std::to_string(cutoff));
    }
}

StateVector::StateVector(Grid grid, Eigen::VectorXd values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw Error("StateVector: expected " + std::to_string(grid_.size()) +
                    " values, got " + std::to_string(values_.size()));
    }
    if (!values_.allFinite()) {
        throw NonFiniteError("StateVector: non-finite value");
    }
}

StateVector StateVector::zeros(const Grid& grid) {
    return StateVector(grid, Eigen::VectorXd::Zero(grid.size()));
}

namespace {

void require_same_grid(const StateVector& a, const StateVector& b, const char* op) {
    if (!(a.grid() == b.grid())) {
        throw GridMismatchError(std::string(op) + ": states live on different grids");
    }
}

} // namespace

StateVector operator+(const StateVector& a, const StateVector& b) {
    require_same_grid(a, b, "operator+");
    return StateVector(a.grid(), a.values() + b.values());
}

StateVector operator-(const StateVector& a, const StateVector& b) {
    require_same_grid(a, b, "operator-");
    return StateVector(a.grid(), a.values() - b.values());
}

StateVector operator-(const StateVector& a) {
    return StateVector(a.grid(), -a.values());
}

StateVector operator*(double c, const StateVector& a) {
    return StateVector(a.grid(), c * a.values());
}

StateVector laplacian(const StateVector& psi) {
    const Eigen::VectorXd& v = psi.values();
    const Eigen::Index n = v.size();
    const double inv_h2 = 1.0 / (psi.spacing() * psi.spacing());
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double right = (i + 1 < n ? v[i + 1] : 0.0) - v[i];
        const double left = (i > 0 ? v[i - 1] : 0.0) - v[i];
        // Grouped differences: adjacent values of smooth states cancel
        // exactly (Sterbenz), which keeps the rounding floor of the
        // stencil near u*|lap| instead of u/h^2.
        out[i] = (right + left) * inv_h2;
    }
    return StateVector(psi.grid(), std::move(out));
}

double l2_sq(const StateVector& psi) {
    const Eigen::VectorXd& v = psi.values();
    detail::CompensatedSum s;
    for (Eigen::Index i = 0; i < v.size(); ++i) s.add(v[i] * v[i]);
    return psi.spacing() * s.value();
}

double inner(const StateVector& psi, const StateVector& phi) {
    require_same_grid(psi, phi, "inner");
    const Eigen::VectorXd& a = psi.values();
    const Eigen::VectorXd& b = phi.values();
    detail::CompensatedSum s;
    for (Eigen::Index i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
    return psi.spacing() * s.value();
}

double h1_norm_sq(const StateVector& psi) {
    const Eigen::VectorXd& v = psi.values();
    const Eigen::Index n = v.size();
    const double h = psi.spacing();
    detail::CompensatedSum diff_sq;
    for (Eigen::Index j = 0; j <= n; ++j) {
        // difference psi^{j+1} - psi^j across all j, zero outside the cutoff
        const double d = (j < n ? v[j] : 0.0) - (j > 0 ? v[j - 1] : 0.0);
        diff_sq.add(d * d);
    }
    detail::CompensatedSum mass;
    for (Eigen::Index i = 0; i < n; ++i) mass.add(v[i] * v[i]);
    return 2.0 / h * diff_sq.value() + h * mass.value();
}

double h1_dist(const StateVector& a, const StateVector& b) {
    return std::sqrt(h1_norm_sq(a - b));
}

double hamiltonian_h(const StateVector& psi) {
    const Eigen::VectorXd& v = psi.values();
    const Eigen::Index n = v.size();
    const double h = psi.spacing();
    detail::CompensatedSum diff_sq;
    for (Eigen::Index j = 0; j <= n; ++j) {
        const double d = (j < n ? v[j] : 0.0) - (j > 0 ? v[j - 1] : 0.0);
        diff_sq.add(d * d);
    }
    detail::CompensatedSum quartic;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sq = v[i] * v[i];
        quartic.add(sq * sq);
    }
    return diff_sq.value() / h - 0.5 * h * quartic.value();
}

} // namespace imagtime
