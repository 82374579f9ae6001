#include "imagtime/flow.hpp"

#include <cmath>
#include <random>
#include <string>

#include "imagtime/soliton.hpp"

namespace imagtime {

void FlowConfig::validate() const {
    if (!(tau > 0.0) || tau > 1.0) {
        throw Error("FlowConfig: tau must lie in (0, 1]");
    }
    if (max_iters < 1) {
        throw Error("FlowConfig: max_iters must be >= 1");
    }
    if (!(tol_residual >= 1e-14)) {
        throw Error("FlowConfig: tol_residual must be >= 1e-14");
    }
    if (!(init.eps >= 0.0) || init.eps > 0.5) {
        throw Error("FlowConfig: init.eps must lie in [0, 0.5]");
    }
    if (record_every < 1) {
        throw Error("FlowConfig: record_every must be >= 1");
    }
}

GroundStateRef::GroundStateRef(StateVector s, double lambda, double res)
    : state(std::move(s)), lambda_h(lambda), residual(res), grid(state.grid()) {
    if (!(lambda_h > 0.0)) {
        throw Error("GroundStateRef: lambda_h must be positive");
    }
    if (std::abs(l2_sq(state) - 1.0) > 1e-13) {
        throw Error("GroundStateRef: state is not unit-norm");
    }
}

StateVector make_initial_state(const Grid& grid, const InitSpec& init) {
    if (!(init.eps >= 0.0) || init.eps > 0.5) {
        throw Error("make_initial_state: eps must lie in [0, 0.5]");
    }
    StateVector base = sample_soliton(grid);
    switch (init.kind) {
        case InitKind::SolitonSample:
            return normalize(base);
        case InitKind::Perturbed: {
            Eigen::VectorXd v = base.values();
            for (int ell = -grid.K; ell <= grid.K; ++ell) {
                const double x = grid.node(ell);
                v[ell + grid.K] += init.eps * std::exp(-x * x);
            }
            return normalize(StateVector(grid, std::move(v)));
        }
        case InitKind::Custom: {
            // Smooth random even field: a few Gaussians of varying width with
            // seeded uniform amplitudes. mt19937 output is identical across
            // platforms; no std:: distribution is used so the bytes are too.
            std::mt19937 rng(static_cast<std::uint32_t>(init.seed));
            auto uniform = [&rng]() {
                return 2.0 * (static_cast<double>(rng()) / 4294967296.0) - 1.0;
            };
            constexpr int n_modes = 6;
            double amp[n_modes];
            for (int m = 0; m < n_modes; ++m) amp[m] = uniform();
            Eigen::VectorXd v = base.values();
            for (int ell = -grid.K; ell <= grid.K; ++ell) {
                const double x = grid.node(ell);
                double bump = 0.0;
                for (int m = 0; m < n_modes; ++m) {
                    const double w = 1.0 + m;
                    bump += amp[m] * std::exp(-x * x / (2.0 * w * w));
                }
                v[ell + grid.K] += init.eps * bump;
            }
            return normalize(StateVector(grid, std::move(v)));
        }
    }
    throw Error("make_initial_state: unknown init kind");
}

StateVector gradient_step(const StateVector& psi, double tau, SchemeKind scheme) {
    if (std::abs(l2_sq(psi) - 1.0) > 1e-10) {
        throw Error("gradient_step: input is not unit-norm");
    }
    return normalize(apply_step(psi, tau, scheme));
}

namespace {

StateVector stationary_gradient(const StateVector& psi) {
    // G = (1/2)Lap_h psi + psi^3
    const StateVector lap = laplacian(psi);
    return StateVector(psi.grid(),
                       (0.5 * lap.values().array() +
                        psi.values().array().cube()).matrix());
}

} // namespace

LambdaResidual lambda_and_residual(const StateVector& psi) {
    const double n_h = l2_sq(psi);
    if (n_h <= 0.0) {
        throw DegenerateStateError("lambda_and_residual: zero state");
    }
    const StateVector g = stationary_gradient(psi);
    const double lambda = inner(g, psi) / n_h;
    const StateVector r = StateVector(psi.grid(), g.values() - lambda * psi.values());
    return {lambda, std::sqrt(l2_sq(r))};
}

namespace {

double max_asymmetry(const StateVector& psi) {
    double worst = 0.0;
    for (int ell = 1; ell <= psi.cutoff(); ++ell) {
        worst = std::max(worst, std::abs(psi.at(ell) - psi.at(-ell)));
    }
    return worst;
}

} // namespace

FlowTrace run_flow(const StateVector& psi0, const FlowConfig& config,
                   const GroundStateRef* reference, const FlowObserver& observer) {
    config.validate();
    if (std::abs(l2_sq(psi0) - 1.0) > 1e-10) {
        throw Error("run_flow: psi0 is not unit-norm");
    }
    const double amp = psi0.values().lpNorm<Eigen::Infinity>();
    if (max_asymmetry(psi0) > 1e-10 * std::max(amp, 1.0)) {
        throw Error("run_flow: psi0 is not symmetric");
    }
    if (reference && !(reference->grid == psi0.grid())) {
        throw GridMismatchError("run_flow: reference lives on a different grid");
    }

    FlowTrace trace{{}, psi0, false, 0};

    auto make_record = [&](long n, const StateVector& state, double prenorm) {
        TraceRecord rec;
        rec.n = n;
        rec.energy = hamiltonian_h(state);
        rec.prenorm_l2sq = prenorm;
        const LambdaResidual lr = lambda_and_residual(state);
        rec.lambda_h = lr.lambda_h;
        rec.residual = lr.residual;
        if (reference) rec.err_ref = h1_dist(state, reference->state);
        return rec;
    };

    // Already stationary? Record the initial state and stop.
    {
        const LambdaResidual lr0 = lambda_and_residual(psi0);
        if (lr0.residual <= config.tol_residual) {
            TraceRecord rec = make_record(0, psi0, l2_sq(psi0));
            trace.records.push_back(rec);
            if (observer) observer(rec, psi0);
            trace.converged = true;
            return trace;
        }
    }

    StateVector psi = psi0;
    for (long n = 1; n <= config.max_iters; ++n) {
        double prenorm = 0.0;
        try {
            const StateVector psi_star = apply_step(psi, config.tau, config.scheme);
            prenorm = l2_sq(psi_star);
            psi = normalize(psi_star);
        } catch (const FlowAbortedError&) {
            throw;
        } catch (const Error& e) {
            trace.final_state = psi;
            trace.iterations_used = n - 1;
            throw FlowAbortedError(
                "run_flow: aborted at iteration " + std::to_string(n) + ": " + e.what(),
                std::move(trace));
        }

        trace.iterations_used = n;
        const LambdaResidual lr = lambda_and_residual(psi);
        const bool done = lr.residual <= config.tol_residual || n == config.max_iters;
        if (n % config.record_every == 0 || done) {
            TraceRecord rec;
            rec.n = n;
            rec.energy = hamiltonian_h(psi);
            rec.prenorm_l2sq = prenorm;
            rec.lambda_h = lr.lambda_h;
            rec.residual = lr.residual;
            if (reference) rec.err_ref = h1_dist(psi, reference->state);
            trace.records.push_back(rec);
            if (observer) observer(rec, psi);
        }
        if (lr.residual <= config.tol_residual) {
            trace.converged = true;
            break;
        }
    }
    trace.final_state = psi;
    return trace;
}

GroundStateRef compute_ground_state(const Grid& grid, double tau, double tol,
                                    long* iterations_out) {
    if (!(tol >= 1e-14)) {
        throw Error("compute_ground_state: tol must be >= 1e-14");
    }
    FlowConfig config;
    config.scheme = SchemeKind::LinearlyImplicit;
    config.tau = tau;
    config.max_iters = 100000;
    config.tol_residual = tol;
    config.record_every = 1000;
    config.init.kind = InitKind::SolitonSample;

    const StateVector psi0 = make_initial_state(grid, config.init);
    const FlowTrace trace = run_flow(psi0, config);
    if (iterations_out) *iterations_out = trace.iterations_used;
    const LambdaResidual lr = lambda_and_residual(trace.final_state);
    if (!trace.converged) {
        throw NonconvergenceError(
            "compute_ground_state: residual " + std::to_string(lr.residual) +
                " after " + std::to_string(trace.iterations_used) + " iterations",
            lr.residual);
    }
    return GroundStateRef(trace.final_state, lr.lambda_h, lr.residual);
}

StateVector cngf_rhs(const StateVector& psi) {
    const double n_h = l2_sq(psi);
    if (n_h <= 0.0) {
        throw DegenerateStateError("cngf_rhs: zero state");
    }
    const StateVector g = stationary_gradient(psi);
    const StateVector hat = StateVector(psi.grid(), psi.values() / std::sqrt(n_h));
    const double coef = inner(g, hat);
    return StateVector(psi.grid(), g.values() - coef * hat.values());
}

StateVector integrate_cngf(const StateVector& psi0, double dt, double T) {
    if (!(dt > 0.0) || !(T > 0.0)) {
        throw Error("integrate_cngf: dt and T must be positive");
    }
    if (std::abs(l2_sq(psi0) - 1.0) > 1e-10) {
        throw Error("integrate_cngf: psi0 is not unit-norm");
    }
    const Grid& grid = psi0.grid();
    StateVector psi = psi0;
    double t = 0.0;
    while (t < T) {
        const double step = std::min(dt, T - t);
        try {
            const Eigen::VectorXd k1 = cngf_rhs(psi).values();
            const Eigen::VectorXd k2 =
                cngf_rhs(StateVector(grid, psi.values() + 0.5 * step * k1)).values();
            const Eigen::VectorXd k3 =
                cngf_rhs(StateVector(grid, psi.values() + 0.5 * step * k2)).values();
            const Eigen::VectorXd k4 =
                cngf_rhs(StateVector(grid, psi.values() + step * k3)).values();
            Eigen::VectorXd next =
                psi.values() + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!next.allFinite()) {
                throw NonFiniteError("non-finite RK4 update");
            }
            psi = normalize(StateVector(grid, std::move(next)));
        } catch (const NonFiniteError& e) {
            throw BlowUpError("integrate_cngf: blow-up at t = " + std::to_string(t) +
                                  " (" + e.what() + "); reduce dt",
                              t);
        }
        t += step;
    }
    return psi;
}

} // namespace imagtime
