#include "imagtime/integrators.hpp"

#include <cmath>
#include <string>

namespace imagtime {

const char* to_string(SchemeKind scheme) {
    switch (scheme) {
        case SchemeKind::LinearlyImplicit: return "linimp";
        case SchemeKind::SemiExplicit: return "semiexp";
        case SchemeKind::FullyImplicit: return "fullimp";
    }
    return "?";
}

Eigen::VectorXd solve_tridiagonal(const TridiagonalSystem& sys,
                                  const Eigen::VectorXd& rhs) {
    const Eigen::Index n = sys.diag.size();
    if (sys.sub.size() != n - 1 || sys.super.size() != n - 1 || rhs.size() != n) {
        throw Error("solve_tridiagonal: inconsistent sizes");
    }

    Eigen::VectorXd c(n - 1); // modified super-diagonal
    Eigen::VectorXd d(n);     // modified rhs

    auto check_pivot = [&](double pivot, Eigen::Index row) {
        double scale = std::abs(sys.diag[row]);
        if (row > 0) scale = std::max(scale, std::abs(sys.sub[row - 1]));
        if (row < n - 1) scale = std::max(scale, std::abs(sys.super[row]));
        if (std::abs(pivot) < 1e-30 * scale || pivot == 0.0) {
            throw SingularSystemError(
                "solve_tridiagonal: singular system, zero pivot at row " +
                    std::to_string(row),
                static_cast<long>(row));
        }
    };

    double pivot = sys.diag[0];
    check_pivot(pivot, 0);
    if (n > 1) c[0] = sys.super[0] / pivot;
    d[0] = rhs[0] / pivot;
    for (Eigen::Index i = 1; i < n; ++i) {
        pivot = sys.diag[i] - sys.sub[i - 1] * c[i - 1];
        check_pivot(pivot, i);
        if (i < n - 1) c[i] = sys.super[i] / pivot;
        d[i] = (rhs[i] - sys.sub[i - 1] * d[i - 1]) / pivot;
    }
    for (Eigen::Index i = n - 2; i >= 0; --i) {
        d[i] -= c[i] * d[i + 1];
    }
    return d;
}

namespace {

void require_positive_tau(double tau, const char* who) {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw Error(std::string(who) + ": tau must be positive and finite");
    }
}

// System (I - tau((1/2)Lap_h + diag(coef))) with Dirichlet cutoff:
// diagonal 1 + tau/h^2 - tau*coef_l, off-diagonals -tau/(2h^2).
TridiagonalSystem implicit_system(const Grid& grid, double tau,
                                  const Eigen::VectorXd& coef) {
    const Eigen::Index n = grid.size();
    const double off = -tau / (2.0 * grid.h * grid.h);
    TridiagonalSystem sys;
    sys.sub = Eigen::VectorXd::Constant(n - 1, off);
    sys.super = Eigen::VectorXd::Constant(n - 1, off);
    sys.diag = ((1.0 + tau / (grid.h * grid.h)) - tau * coef.array()).matrix();
    return sys;
}

} // namespace

StateVector step_linearly_implicit(const StateVector& psi, double tau) {
    require_positive_tau(tau, "step_linearly_implicit");
    const Eigen::VectorXd coef = psi.values().array().square();
    const TridiagonalSystem sys = implicit_system(psi.grid(), tau, coef);
    try {
        return StateVector(psi.grid(), solve_tridiagonal(sys, psi.values()));
    } catch (const SingularSystemError& e) {
        throw StepFailureError(
            std::string("step_linearly_implicit: implicit system is singular (") +
            e.what() + "); reduce tau");
    }
}

StateVector step_semi_explicit(const StateVector& psi, double tau) {
    require_positive_tau(tau, "step_semi_explicit");
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(psi.grid().size());
    const TridiagonalSystem sys = implicit_system(psi.grid(), tau, zero);
    const Eigen::VectorXd rhs =
        psi.values() + tau * psi.values().array().cube().matrix();
    return StateVector(psi.grid(), solve_tridiagonal(sys, rhs));
}

StateVector step_fully_implicit(const StateVector& psi, double tau,
                                NewtonStats* stats) {
    require_positive_tau(tau, "step_fully_implicit");
    const Grid& grid = psi.grid();
    constexpr int max_newton = 50;
    constexpr double stop_factor = 1e-12;

    StateVector x = step_linearly_implicit(psi, tau); // warm start, O(tau) from the root
    double update_norm = 0.0;
    for (int it = 1; it <= max_newton; ++it) {
        // Residual G(x) = x - psi - tau((1/2)Lap_h x + x^3)
        const StateVector lap = laplacian(x);
        const Eigen::VectorXd residual =
            x.values() - psi.values() -
            tau * (0.5 * lap.values().array() + x.values().array().cube()).matrix();
        // Jacobian I - tau((1/2)Lap_h + 3 diag(x^2))
        const Eigen::VectorXd jac_coef = 3.0 * x.values().array().square();
        const TridiagonalSystem jac = implicit_system(grid, tau, jac_coef);
        const Eigen::VectorXd delta = solve_tridiagonal(jac, residual);
        x = StateVector(grid, x.values() - delta);
        update_norm = delta.lpNorm<Eigen::Infinity>();
        if (stats) {
            stats->iterations = it;
            stats->final_update = update_norm;
        }
        if (update_norm <= stop_factor * (1.0 + x.values().lpNorm<Eigen::Infinity>())) {
            return x;
        }
    }
    throw NonconvergenceError(
        "step_fully_implicit: Newton did not converge in " +
            std::to_string(max_newton) + " iterations (last update " +
            std::to_string(update_norm) + "); reduce tau",
        update_norm);
}

StateVector apply_step(const StateVector& psi, double tau, SchemeKind scheme) {
    switch (scheme) {
        case SchemeKind::LinearlyImplicit: return step_linearly_implicit(psi, tau);
        case SchemeKind::SemiExplicit: return step_semi_explicit(psi, tau);
        case SchemeKind::FullyImplicit: return step_fully_implicit(psi, tau);
    }
    throw Error("apply_step: unknown scheme");
}

StateVector normalize(const StateVector& psi) {
    const double n_h = l2_sq(psi);
    if (n_h <= 1e-30) {
        throw DegenerateStateError("normalize: state has (numerically) zero norm");
    }
    return StateVector(psi.grid(), psi.values() / std::sqrt(n_h));
}

} // namespace imagtime
