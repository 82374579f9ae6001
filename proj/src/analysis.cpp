#include "imagtime/analysis.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

namespace imagtime {

namespace {

void require_same_grid(const StateVector& psi, const GroundStateRef& ref,
                       const char* op) {
    if (!(psi.grid() == ref.grid)) {
        throw GridMismatchError(std::string(op) + ": state and reference grids differ");
    }
}

} // namespace

StateVector project_P_eta(const StateVector& psi, const GroundStateRef& ref) {
    require_same_grid(psi, ref, "project_P_eta");
    return StateVector(psi.grid(), inner(psi, ref.state) * ref.state.values());
}

StateVector project_P_W(const StateVector& psi, const GroundStateRef& ref) {
    require_same_grid(psi, ref, "project_P_W");
    return StateVector(psi.grid(),
                       psi.values() - inner(psi, ref.state) * ref.state.values());
}

Decomposition decompose(const StateVector& psi, const GroundStateRef& ref) {
    require_same_grid(psi, ref, "decompose");
    const double overlap = inner(psi, ref.state);
    return Decomposition{
        overlap - 1.0,
        StateVector(psi.grid(), psi.values() - overlap * ref.state.values())};
}

double r_of_u(const StateVector& u) {
    const double sq = l2_sq(u);
    if (sq >= 1.0) {
        throw OutOfChartError(
            "r_of_u: ||u||^2 = " + std::to_string(sq) +
            " >= 1, outside the sphere chart");
    }
    return -1.0 + std::sqrt(1.0 - sq);
}

StateVector operator_A(const StateVector& u, const GroundStateRef& ref) {
    require_same_grid(u, ref, "operator_A");
    const double norm_u = std::sqrt(l2_sq(u));
    if (std::abs(inner(u, ref.state)) > 1e-10 * std::max(norm_u, 1e-300)) {
        throw Error("operator_A: input is not orthogonal to the reference state");
    }
    const StateVector lap = laplacian(u);
    const Eigen::VectorXd core =
        ref.lambda_h * u.values().array() - 0.5 * lap.values().array() -
        3.0 * ref.state.values().array().square() * u.values().array();
    return project_P_W(StateVector(u.grid(), core), ref);
}

double min_eigenvalue_symmetric_W(
    const GroundStateRef& ref,
    const std::function<StateVector(const StateVector&)>& op) {
    const Grid& grid = ref.grid;
    if (grid.K > 2048) {
        throw Error("min_eigenvalue_symmetric_W: dense path supports K <= 2048; "
                    "an iterative eigensolver would be needed for larger grids");
    }
    const int n = grid.size();
    const int m = grid.K + 1; // dimension of the even subspace

    // Orthonormal (w.r.t. <,>_h) basis of the even subspace: b_0 = e_0/sqrt(h),
    // b_k = (e_k + e_{-k})/sqrt(2h). A coefficient vector c in R^m maps to the
    // lattice vector with values c_0/sqrt(h) at 0 and c_k/sqrt(2h) at +-k.
    const double w0 = 1.0 / std::sqrt(grid.h);
    const double wk = 1.0 / std::sqrt(2.0 * grid.h);

    auto to_state = [&](const Eigen::VectorXd& c) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
        v[grid.K] = c[0] * w0;
        for (int k = 1; k <= grid.K; ++k) {
            v[grid.K + k] = c[k] * wk;
            v[grid.K - k] = c[k] * wk;
        }
        return StateVector(grid, std::move(v));
    };

    // Coefficients of eta_ref in that basis (eta_ref is even and unit-norm,
    // so |c| = 1).
    Eigen::VectorXd c_eta(m);
    c_eta[0] = ref.state.at(0) / w0;
    for (int k = 1; k <= grid.K; ++k) {
        c_eta[k] = ref.state.at(k) / wk;
    }
    c_eta /= c_eta.norm();

    // Householder vector mapping e_0 onto +-c_eta; columns 1..m-1 of the
    // reflector span the orthogonal complement of c_eta, i.e. the even
    // subspace of W in coefficient coordinates.
    Eigen::VectorXd v = c_eta;
    v[0] += (c_eta[0] >= 0.0 ? 1.0 : -1.0);
    const double beta = 2.0 / v.squaredNorm();

    auto householder_column = [&](int j) {
        Eigen::VectorXd c = -beta * v[j] * v;
        c[j] += 1.0;
        return c;
    };

    // Assemble the dense restriction M_ij = <phi_i, op(phi_j)>_h.
    const int dim = m - 1;
    Eigen::MatrixXd basis(n, dim);
    Eigen::MatrixXd image(n, dim);
    for (int j = 0; j < dim; ++j) {
        const StateVector phi = to_state(householder_column(j + 1));
        basis.col(j) = phi.values();
        image.col(j) = op(phi).values();
    }
    Eigen::MatrixXd m_op = grid.h * (basis.transpose() * image);
    m_op = 0.5 * (m_op + m_op.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m_op,
                                                          Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw Error("min_eigenvalue_symmetric_W: eigensolver failed to converge");
    }
    return solver.eigenvalues()(0);
}

double min_eigenvalue_A(const GroundStateRef& ref) {
    return min_eigenvalue_symmetric_W(
        ref, [&ref](const StateVector& u) { return operator_A(u, ref); });
}

RateFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3) {
        throw InsufficientDataError("fit_line: need at least 3 points");
    }
    const int n = static_cast<int>(x.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (int i = 0; i < n; ++i) {
        mean_x += x[i];
        mean_y += y[i];
    }
    mean_x /= n;
    mean_y /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    RateFit fit;
    fit.points_used = n;
    if (sxx <= 0.0) {
        throw InsufficientDataError("fit_line: abscissae are all identical");
    }
    fit.rate = sxy / sxx;
    fit.intercept = mean_y - fit.rate * mean_x;
    if (syy <= 0.0) {
        // Perfectly constant ordinates: slope 0 fits exactly but the usual
        // R^2 is 0/0; report the fit as degenerate.
        fit.rate = 0.0;
        fit.intercept = mean_y;
        fit.r_squared = 0.0;
        fit.degenerate = true;
    } else {
        fit.r_squared = (sxy * sxy) / (sxx * syy);
    }
    return fit;
}

RateFit fit_exponential_rate(const FlowTrace& trace, double tau, ErrorWindow window) {
    if (!(tau > 0.0)) {
        throw Error("fit_exponential_rate: tau must be positive");
    }
    std::vector<double> t;
    std::vector<double> log_err;
    for (const TraceRecord& rec : trace.records) {
        if (!rec.err_ref) continue;
        const double e = *rec.err_ref;
        if (e < window.lo || e > window.hi || !(e > 0.0)) continue;
        t.push_back(static_cast<double>(rec.n) * tau);
        log_err.push_back(std::log(e));
    }
    if (t.size() < 3) {
        throw InsufficientDataError(
            "fit_exponential_rate: fewer than 3 records inside the window");
    }
    RateFit fit = fit_line(t, log_err);
    fit.rate = -fit.rate; // decay rate is the negated slope
    return fit;
}

RateFit fit_power_slope(const std::vector<std::pair<double, double>>& pairs) {
    std::vector<double> log_p;
    std::vector<double> log_e;
    for (const auto& [param, err] : pairs) {
        if (!(param > 0.0) || !(err > 0.0)) {
            throw InsufficientDataError(
                "fit_power_slope: parameters and errors must be positive");
        }
        log_p.push_back(std::log(param));
        log_e.push_back(std::log(err));
    }
    if (log_p.size() < 3) {
        throw InsufficientDataError("fit_power_slope: need at least 3 pairs");
    }
    return fit_line(log_p, log_e);
}

} // namespace imagtime
