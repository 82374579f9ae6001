#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "imagtime/integrators.hpp"

namespace imagtime {

enum class InitKind {
    SolitonSample, // normalize(sampled eta)
    Perturbed,     // normalize(sampled eta + eps * gaussian bump)
    Custom,        // normalize(sampled eta + eps * seeded smooth random even field)
};

struct InitSpec {
    InitKind kind = InitKind::Perturbed;
    double eps = 0.05;
    unsigned long seed = 0; // used by Custom only
};

struct FlowConfig {
    SchemeKind scheme = SchemeKind::LinearlyImplicit;
    double tau = 0.1;           // in (0, 1]
    long max_iters = 100000;    // >= 1
    double tol_residual = 1e-12; // >= 1e-14
    InitSpec init;              // carried for orchestration; run_flow takes psi0 explicitly
    long record_every = 1;      // >= 1

    void validate() const;
};

struct TraceRecord {
    long n = 0;
    double energy = 0.0;        // H_h(psi_n)
    double prenorm_l2sq = 0.0;  // N_h(psi*) before normalization
    double residual = 0.0;
    double lambda_h = 0.0;
    std::optional<double> err_ref; // ||psi_n - eta_ref||_h when a reference is given
};

struct FlowTrace {
    std::vector<TraceRecord> records;
    StateVector final_state;
    bool converged = false;
    long iterations_used = 0;
};

/// Converged discrete ground state together with its multiplier and the
/// residual it was accepted at.
struct GroundStateRef {
    GroundStateRef(StateVector s, double lambda, double res);

    StateVector state;
    double lambda_h;
    double residual;
    Grid grid;
};

/// A flow run aborted mid-iteration; carries the diagnostics collected so far.
class FlowAbortedError : public Error {
public:
    FlowAbortedError(const std::string& what, FlowTrace partial_trace)
        : Error(what), partial(std::make_shared<FlowTrace>(std::move(partial_trace))) {}
    std::shared_ptr<const FlowTrace> partial;
};

StateVector make_initial_state(const Grid& grid, const InitSpec& init);

/// normalize(apply_step(psi, tau, scheme)). Requires N_h(psi) = 1 within 1e-10.
StateVector gradient_step(const StateVector& psi, double tau, SchemeKind scheme);

struct LambdaResidual {
    double lambda_h;
    double residual;
};

/// lambda_h(psi) = <(1/2)Lap_h psi + psi^3, psi> / N_h(psi) and the norm of
/// (1/2)Lap_h psi + psi^3 - lambda_h psi; the residual vanishes exactly on
/// solutions of the discrete stationary equation.
LambdaResidual lambda_and_residual(const StateVector& psi);

/// Called at every recorded iteration with the fresh record and the state it
/// describes (used by the CLI to derive extra per-iteration columns).
using FlowObserver = std::function<void(const TraceRecord&, const StateVector&)>;

/// Iterates step + normalize until the stationary residual drops below
/// config.tol_residual or max_iters is reached. Records diagnostics every
/// record_every iterations plus the final one. psi0 must be unit-norm
/// (within 1e-10) and symmetric.
FlowTrace run_flow(const StateVector& psi0, const FlowConfig& config,
                   const GroundStateRef* reference = nullptr,
                   const FlowObserver& observer = {});

/// Runs the linearly implicit flow from the normalized sampled soliton until
/// the stationary residual is <= tol. Throws NonconvergenceError after 1e5
/// iterations. iterations_out, when given, receives the iteration count.
GroundStateRef compute_ground_state(const Grid& grid, double tau = 0.5,
                                    double tol = 1e-13,
                                    long* iterations_out = nullptr);

/// Right-hand side of the normalized gradient flow projected onto the
/// discrete unit sphere: F(psi) = G - <G, psi_hat> psi_hat with
/// G = (1/2)Lap_h psi + psi^3; <F(psi), psi> = 0 up to rounding.
StateVector cngf_rhs(const StateVector& psi);

/// Classical RK4 on d/dt psi = cngf_rhs(psi) up to time T, renormalizing
/// after every step. Throws BlowUpError (with the failing time) if the
/// integration produces non-finite values.
StateVector integrate_cngf(const StateVector& psi0, double dt, double T);

} // namespace imagtime
