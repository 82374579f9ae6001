#include "cli.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <thread>

#include <CLI11.hpp>

#include "imagtime/analysis.hpp"
#include "imagtime/soliton.hpp"

namespace imagtime::cli {

namespace {

class IoError : public Error {
public:
    using Error::Error;
};

// ---- validation helpers ----

void require_range(bool ok, const std::string& what) {
    if (!ok) throw UsageError(what);
}

void validate_common(const RunSpec& spec) {
    require_range(spec.h > 0.0 && std::isfinite(spec.h), "--h must be positive");
    require_range(spec.K >= 1, "--K must be >= 1");
    require_range(spec.tau > 0.0 && spec.tau <= 1.0, "--tau must lie in (0, 1]");
    require_range(spec.max_iters >= 1, "--max-iters must be >= 1");
    require_range(spec.tol >= 1e-14, "--tol must be >= 1e-14");
    require_range(spec.init.eps >= 0.0 && spec.init.eps <= 0.5,
                  "--eps must lie in [0, 0.5]");
    require_range(spec.record_every >= 1, "--record-every must be >= 1");
    require_range(spec.kh > 0.0, "--kh must be positive");
    require_range(spec.cngf_dt > 0.0, "--dt must be positive");
    require_range(spec.cngf_time > 0.0, "--T must be positive");
    require_range(spec.threads >= 0, "--threads must be >= 0");
    require_range(!spec.out.empty(), "an output path (--out) is required");
}

void validate_list(const std::vector<double>& list, const std::string& name) {
    require_range(!list.empty(), name + " must not be empty");
    for (double v : list) {
        require_range(v > 0.0 && std::isfinite(v), name + " entries must be positive");
    }
    if (list.size() > 1) {
        const bool ascending = list[1] > list[0];
        for (std::size_t i = 1; i < list.size(); ++i) {
            require_range(ascending ? list[i] > list[i - 1] : list[i] < list[i - 1],
                          name + " must be strictly monotone");
        }
    }
}

int cutoff_for(double kh, double h) {
    return static_cast<int>(std::lround(kh / h));
}

// ---- bounded worker pool over sweep indices ----

void run_indexed(std::size_t jobs, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || jobs <= 1) {
        for (std::size_t i = 0; i < jobs; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(jobs);
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs) return;
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min<int>(threads, static_cast<int>(jobs));
    pool.reserve(n);
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

int resolve_threads(const RunSpec& spec) {
    if (spec.threads > 0) return spec.threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// ---- per-point measurements shared by the sweep commands ----

struct GroundStatePoint {
    GroundStateRef ref;
    long iterations;
};

GroundStatePoint ground_state_point(const Grid& grid) {
    long iters = 0;
    GroundStateRef ref = compute_ground_state(grid, 0.5, 1e-13, &iters);
    return {std::move(ref), iters};
}

/// Runs the configured scheme to its limit (tol or the full budget) while
/// snapshotting sparsely, then fits the decay rate of the distance to the
/// limit state. Distances below the rounding floor are left out of the fit.
struct LimitRun {
    FlowTrace trace;
    double dist_to_ref = 0.0;
    std::optional<RateFit> rate;
};

LimitRun run_to_limit(const StateVector& psi0, FlowConfig cfg,
                      const GroundStateRef& ref) {
    cfg.record_every = std::max<long>(1, cfg.max_iters / 512);
    std::vector<std::pair<long, StateVector>> snapshots;
    FlowTrace trace = run_flow(psi0, cfg, &ref,
                               [&](const TraceRecord& rec, const StateVector& state) {
                                   snapshots.emplace_back(rec.n, state);
                               });
    LimitRun out{std::move(trace), 0.0, std::nullopt};
    out.dist_to_ref = h1_dist(out.trace.final_state, ref.state);

    std::vector<double> t, log_d;
    const long n_final = out.trace.iterations_used;
    for (const auto& [n, state] : snapshots) {
        if (n >= n_final) continue;
        const double d = h1_dist(state, out.trace.final_state);
        if (d < 1e-9 || d > 0.5) continue;
        t.push_back(static_cast<double>(n) * cfg.tau);
        log_d.push_back(std::log(d));
    }
    if (t.size() >= 3) {
        RateFit fit = fit_line(t, log_d);
        fit.rate = -fit.rate;
        out.rate = fit;
    }
    return out;
}

// ---- CSV rendering ----

std::string comment_params(const RunSpec& spec);

void append_fit_comment(CsvReport& report, const std::vector<std::pair<double, double>>& pairs,
                        const std::string& label) {
    if (pairs.size() >= 3) {
        const RateFit fit = fit_power_slope(pairs);
        report.trailing_comments.push_back(
            "# " + label + ": slope=" + format_cell(fit.rate) +
            " r_squared=" + format_cell(fit.r_squared));
    }
}

// ---- subcommand implementations ----

int run_solve(const RunSpec& spec) {
    const Grid grid(spec.h, spec.K);
    std::optional<GroundStateRef> ref;
    if (spec.with_errors) ref.emplace(compute_ground_state(grid, 0.5, 1e-13));

    FlowConfig cfg;
    cfg.scheme = spec.scheme;
    cfg.tau = spec.tau;
    cfg.max_iters = spec.max_iters;
    cfg.tol_residual = spec.tol;
    cfg.init = spec.init;
    cfg.record_every = spec.record_every;

    CsvReport report;
    report.leading_comments.push_back(comment_params(spec));
    report.header = {"n", "t", "energy_Hh", "residual", "lambda_h",
                     "err_ref_h1disc", "err_exact_h1cont"};

    auto observer = [&](const TraceRecord& rec, const StateVector& state) {
        std::vector<Cell> row;
        row.emplace_back(static_cast<long long>(rec.n));
        row.emplace_back(static_cast<double>(rec.n) * spec.tau);
        row.emplace_back(rec.energy);
        row.emplace_back(rec.residual);
        row.emplace_back(rec.lambda_h);
        if (spec.with_errors && rec.err_ref) {
            row.emplace_back(*rec.err_ref);
            row.emplace_back(h1_error_vs_exact(state));
        } else {
            row.emplace_back(std::monostate{});
            row.emplace_back(std::monostate{});
        }
        report.rows.push_back(std::move(row));
    };

    const StateVector psi0 = make_initial_state(grid, spec.init);
    bool converged = false;
    try {
        FlowTrace trace = run_flow(psi0, cfg, ref ? &*ref : nullptr, observer);
        converged = trace.converged;
        if (!converged) {
            report.trailing_comments.push_back(
                "# nonconverged: residual=" +
                format_cell(trace.records.empty() ? -1.0 : trace.records.back().residual) +
                " after " + std::to_string(trace.iterations_used) + " iterations");
        }
    } catch (const FlowAbortedError& e) {
        report.trailing_comments.push_back(std::string("# aborted: ") + e.what());
    }
    write_csv(report, spec.out);
    return converged ? 0 : 1;
}

int run_ground_state(const RunSpec& spec) {
    const Grid grid(spec.h, spec.K);
    CsvReport report;
    report.leading_comments.push_back(comment_params(spec));
    report.header = {"h", "K", "lambda_h", "residual", "iterations"};
    try {
        long iters = 0;
        GroundStateRef ref = compute_ground_state(grid, spec.tau, spec.tol, &iters);
        report.rows.push_back({Cell{spec.h}, Cell{static_cast<long long>(spec.K)},
                               Cell{ref.lambda_h}, Cell{ref.residual},
                               Cell{static_cast<long long>(iters)}});
    } catch (const NonconvergenceError& e) {
        report.trailing_comments.push_back(
            "# nonconverged: last residual=" + format_cell(e.last_residual));
        write_csv(report, spec.out);
        return 1;
    }
    write_csv(report, spec.out);
    return 0;
}

int run_sweep_h(const RunSpec& spec) {
    struct Point {
        double h;
        int K;
        GroundStatePoint gs;
        double err;
    };
    const std::size_t n = spec.h_list.size();
    std::vector<std::optional<Point>> points(n);
    std::vector<std::exception_ptr> failures(n);
    run_indexed(n, resolve_threads(spec), [&](std::size_t i) {
        const double h = spec.h_list[i];
        const int K = cutoff_for(spec.kh, h);
        try {
            GroundStatePoint gs = ground_state_point(Grid(h, K));
            const double err = h1_error_vs_exact(gs.ref.state);
            points[i] = Point{h, K, std::move(gs), err};
        } catch (...) {
            failures[i] = std::current_exception();
        }
    });

    CsvReport report;
    report.leading_comments.push_back(comment_params(spec));
    report.header = {"h", "K", "lambda_h", "residual", "iterations", "err_h1cont"};
    std::vector<std::pair<double, double>> fit_pairs;
    bool failed = false;
    for (std::size_t i = 0; i < n && !failed; ++i) {
        if (failures[i]) {
            failed = true;
            report.trailing_comments.push_back("# nonconverged at h=" +
                                               format_cell(spec.h_list[i]));
            break;
        }
        const Point& p = *points[i];
        report.rows.push_back({Cell{p.h}, Cell{static_cast<long long>(p.K)},
                               Cell{p.gs.ref.lambda_h}, Cell{p.gs.ref.residual},
                               Cell{static_cast<long long>(p.gs.iterations)},
                               Cell{p.err}});
        fit_pairs.emplace_back(p.h, p.err);
    }
    if (!failed) append_fit_comment(report, fit_pairs, "order fit err_h1cont vs h");
    write_csv(report, spec.out);
    return failed ? 1 : 0;
}

int run_sweep_k(const RunSpec& spec) {
    struct Point {
        double kh;
        int K;
        GroundStatePoint gs;
        double err;
    };
    const std::size_t n = spec.kh_list.size();
    std::vector<std::optional<Point>> points(n);
    std::vector<std::exception_ptr> failures(n);
    run_indexed(n, resolve_threads(spec), [&](std::size_t i) {
        const double kh = spec.kh_list[i];
        const int K = cutoff_for(kh, spec.h);
        try {
            GroundStatePoint gs = ground_state_point(Grid(spec.h, K));
            const double err = h1_error_vs_exact(gs.ref.state);
            points[i] = Point{kh, K, std::move(gs), err};
        } catch (...) {
            failures[i] = std::current_exception();
        }
    });

    CsvReport report;
    report.leading_comments.push_back(comment_params(spec));
    report.header = {"h", "K", "kh", "lambda_h", "residual", "iterations", "err_h1cont"};
    bool failed = false;
    for (std::size_t i = 0; i < n && !failed; ++i) {
        if (failures[i]) {
            failed = true;
            report.trailing_comments.push_back("# nonconverged at kh=" +
                                               format_cell(spec.kh_list[i]));
            break;
        }
        const Point& p = *points[i];
        report.rows.push_back({Cell{spec.h}, Cell{static_cast<long long>(p.K)},
                               Cell{p.kh}, Cell{p.gs.ref.lambda_h},
                               Cell{p.gs.ref.residual},
                               Cell{static_cast<long long>(p.gs.iterations)},
                               Cell{p.err}});
    }
    write_csv(report, spec.out);
    return failed ? 1 : 0;
}

int run_sweep_tau(const RunSpec& spec) {
    const Grid grid(spec.h, spec.K);
    const GroundStateRef ref = compute_ground_state(grid, 0.5, 1e-13);
    const StateVector psi0 = make_initial_state(grid, spec.init);

    const std::size_t n = spec.tau_list.size();
    std::vector<std::optional<LimitRun>> runs(n);
    run_indexed(n, resolve_threads(spec), [&](std::size_t i) {
        FlowConfig cfg;
        cfg.scheme = spec.scheme;
        cfg.tau = spec.tau_list[i];
        cfg.max_iters = spec.max_iters;
        cfg.tol_residual = spec.tol;
        cfg.init = spec.init;
        runs[i] = run_to_limit(psi0, cfg, ref);
    });

    CsvReport report;
    report.leading_comments.push_back(comment_params(spec));
    report.header = {"tau", "scheme", "iterations", "converged", "residual",
                     "dist_ref_h1disc", "rate", "r_squared"};
    std::vector<std::pair<double, double>> fit_pairs;
    for (std::size_t i = 0; i < n; ++i) {
        const LimitRun& run = *runs[i];
        std::vector<Cell> row{
            Cell{spec.tau_list[i]},
            Cell{std::string(to_string(spec.scheme))},
            Cell{static_cast<long long>(run.trace.iterations_used)},
            Cell{static_cast<long long>(run.trace.converged ? 1 : 0)},
            Cell{run.trace.records.empty() ? -1.0 : run.trace.records.back().residual},
            Cell{run.dist_to_ref}};
        if (run.rate) {
            row.emplace_back(run.rate->rate);
            row.emplace_back(run.rate->r_squared);
        } else {
            row.emplace_back(std::monostate{});
            row.emplace_back(std::monostate{});
        }
        report.rows.push_back(std::move(row));
        fit_pairs.emplace_back(spec.tau_list[i], run.dist_to_ref);
    }
    append_fit_comment(report, fit_pairs, "order fit dist_ref vs tau");
    write_csv(report, spec.out);
    return 0;
}

int run_compare_schemes(const RunSpec& spec) {
    const Grid grid(spec.h, spec.K);
    const GroundStateRef ref = compute_ground_state(grid, 0.5, 1e-13);
    const StateVector psi0 = make_initial_state(grid, spec.init);

    const SchemeKind schemes[] = {SchemeKind::LinearlyImplicit,
                                  SchemeKind::SemiExplicit,
                                  SchemeKind::FullyImplicit};
    std::vector<std::optional<LimitRun>> runs(3);
    run_indexed(3, resolve_threads(spec), [&](std::size_t i) {
        FlowConfig cfg;
        cfg.scheme = schemes[i];
        cfg.tau = spec.tau;
        cfg.max_iters = spec.max_iters;
        cfg.tol_residual = spec.tol;
        cfg.init = spec.init;
        runs[i] = run_to_limit(psi0, cfg, ref);
    });

    CsvReport report;
    report.leading_comments.push_back(comment_params(spec));
    report.header = {"scheme", "fixed_point_distance", "rate", "r_squared"};
    for (std::size_t i = 0; i < 3; ++i) {
        const LimitRun& run = *runs[i];
        std::vector<Cell> row{Cell{std::string(to_string(schemes[i]))},
                              Cell{run.dist_to_ref}};
        if (run.rate) {
            row.emplace_back(run.rate->rate);
            row.emplace_back(run.rate->r_squared);
        } else {
            row.emplace_back(std::monostate{});
            row.emplace_back(std::monostate{});
        }
        report.rows.push_back(std::move(row));
    }
    write_csv(report, spec.out);
    return 0;
}

int run_coercivity(const RunSpec& spec) {
    std::vector<std::pair<double, int>> grids;
    if (!spec.h_list.empty()) {
        for (double h : spec.h_list) grids.emplace_back(h, cutoff_for(spec.kh, h));
    } else {
        grids.emplace_back(spec.h, spec.K);
    }

    struct Point {
        GroundStatePoint gs;
        double min_eig;
    };
    const std::size_t n = grids.size();
    std::vector<std::optional<Point>> points(n);
    run_indexed(n, resolve_threads(spec), [&](std::size_t i) {
        GroundStatePoint gs = ground_state_point(Grid(grids[i].first, grids[i].second));
        const double ev = min_eigenvalue_A(gs.ref);
        points[i] = Point{std::move(gs), ev};
    });

    CsvReport report;
    report.leading_comments.push_back(comment_params(spec));
    report.header = {"h", "K", "lambda_h", "residual", "min_eig_A"};
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p = *points[i];
        report.rows.push_back({Cell{grids[i].first},
                               Cell{static_cast<long long>(grids[i].second)},
                               Cell{p.gs.ref.lambda_h}, Cell{p.gs.ref.residual},
                               Cell{p.min_eig}});
    }
    write_csv(report, spec.out);
    return 0;
}

int run_cngf_check(const RunSpec& spec) {
    const Grid grid(spec.h, spec.K);
    const StateVector psi0 = make_initial_state(grid, spec.init);
    const StateVector target = integrate_cngf(psi0, spec.cngf_dt, spec.cngf_time);

    const std::size_t n = spec.tau_list.size();
    std::vector<double> discrepancy(n, 0.0);
    std::vector<long> steps(n, 0);
    run_indexed(n, resolve_threads(spec), [&](std::size_t i) {
        const double tau = spec.tau_list[i];
        FlowConfig cfg;
        cfg.tau = tau;
        cfg.max_iters = std::max<long>(1, std::lround(spec.cngf_time / tau));
        cfg.tol_residual = 1e-14;
        cfg.init = spec.init;
        cfg.record_every = cfg.max_iters;
        FlowTrace tr = run_flow(psi0, cfg);
        steps[i] = tr.iterations_used;
        discrepancy[i] = h1_dist(tr.final_state, target);
    });

    CsvReport report;
    report.leading_comments.push_back(comment_params(spec));
    report.leading_comments.push_back("# reference: rk4 dt=" + format_cell(spec.cngf_dt) +
                                      " T=" + format_cell(spec.cngf_time));
    report.header = {"tau", "steps", "discrepancy_h1disc"};
    for (std::size_t i = 0; i < n; ++i) {
        report.rows.push_back({Cell{spec.tau_list[i]}, Cell{static_cast<long long>(steps[i])},
                               Cell{discrepancy[i]}});
    }
    write_csv(report, spec.out);
    return 0;
}

std::string comment_params(const RunSpec& spec) {
    std::string s = "# imagtime";
    switch (spec.command) {
        case Command::Solve: s += " solve"; break;
        case Command::GroundState: s += " ground-state"; break;
        case Command::SweepH: s += " sweep-h"; break;
        case Command::SweepK: s += " sweep-k"; break;
        case Command::SweepTau: s += " sweep-tau"; break;
        case Command::CompareSchemes: s += " compare-schemes"; break;
        case Command::Coercivity: s += " coercivity"; break;
        case Command::CngfCheck: s += " cngf-check"; break;
    }
    s += " h=" + format_cell(spec.h);
    s += " K=" + std::to_string(spec.K);
    s += " tau=" + format_cell(spec.tau);
    s += " scheme=";
    s += to_string(spec.scheme);
    s += " init=";
    switch (spec.init.kind) {
        case InitKind::SolitonSample: s += "soliton"; break;
        case InitKind::Perturbed: s += "perturbed"; break;
        case InitKind::Custom: s += "custom"; break;
    }
    s += " eps=" + format_cell(spec.init.eps);
    s += " seed=" + std::to_string(spec.init.seed);
    s += " tol=" + format_cell(spec.tol);
    return s;
}

} // namespace

RunSpec parse_args(const std::vector<std::string>& args) {
    RunSpec spec;

    if (const char* env = std::getenv("IMAGTIME_THREADS")) {
        int value = 0;
        const auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), value);
        if (ec == std::errc{} && value > 0) spec.threads = value;
    }

    CLI::App app{"ground states of the 1D focusing cubic NLS by normalized gradient flow", "imagtime"};
    app.require_subcommand(1);
    // --h is a documented option, so the help flag must not claim -h
    app.set_help_flag("--help", "print usage");
    auto add_sub = [&app](const std::string& name, const std::string& desc) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->set_help_flag("--help", "print usage");
        return sub;
    };

    std::string scheme_name = "linimp";
    std::string init_name = "perturbed";

    const std::map<std::string, SchemeKind> scheme_map{
        {"linimp", SchemeKind::LinearlyImplicit},
        {"semiexp", SchemeKind::SemiExplicit},
        {"fullimp", SchemeKind::FullyImplicit}};
    const std::map<std::string, InitKind> init_map{
        {"soliton", InitKind::SolitonSample},
        {"perturbed", InitKind::Perturbed},
        {"custom", InitKind::Custom}};

    auto add_grid = [&](CLI::App* sub) {
        sub->add_option("--h", spec.h, "mesh spacing");
        sub->add_option("--K", spec.K, "cutoff index (values vanish for |l| > K)");
    };
    auto add_flow = [&](CLI::App* sub) {
        sub->add_option("--tau", spec.tau, "time step");
        sub->add_option("--scheme", scheme_name, "linimp | semiexp | fullimp")
            ->check(CLI::IsMember({"linimp", "semiexp", "fullimp"}));
        sub->add_option("--max-iters", spec.max_iters, "iteration budget");
        sub->add_option("--tol", spec.tol, "residual tolerance");
        sub->add_option("--init", init_name, "soliton | perturbed | custom")
            ->check(CLI::IsMember({"soliton", "perturbed", "custom"}));
        sub->add_option("--eps", spec.init.eps, "perturbation amplitude");
        sub->add_option("--seed", spec.init.seed, "seed for --init custom");
    };
    auto add_out = [&](CLI::App*ic) {
        ic->add_option("--out", spec.out, "output CSV path")->required();
        ic->add_option("--threads", spec.threads,
                       "worker count for sweeps (default: IMAGTIME_THREADS or all cores)");
    };

    CLI::App* solve = add_sub("solve", "run one flow and record its trace");
    add_grid(solve);
    add_flow(solve);
    add_out(solve);
    solve->add_option("--record-every", spec.record_every, "trace cadence");
    solve->add_flag("--errors", spec.with_errors,
                    "fill err_ref_h1disc / err_exact_h1cont (computes the reference state)");

    CLI::App* gs = add_sub("ground-state", "compute the reference ground state");
    add_grid(gs);
    add_out(gs);
    CLI::Option* gs_tau = gs->add_option("--tau", spec.tau, "time step (default 0.5)");
    CLI::Option* gs_tol = gs->add_option("--tol", spec.tol, "residual tolerance (default 1e-13)");

    CLI::App* sweep_h = add_sub("sweep-h", "ground-state error across mesh sizes");
    sweep_h->add_option("--h-list", spec.h_list, "mesh spacings")->delimiter(',')->required();
    sweep_h->add_option("--kh", spec.kh, "fixed K*h product (default 40)");
    add_out(sweep_h);

    CLI::App* sweep_k = add_sub("sweep-k", "ground-state error across cutoffs");
    sweep_k->add_option("--kh-list", spec.kh_list, "K*h products")->delimiter(',')->required();
    sweep_k->add_option("--h", spec.h, "mesh spacing");
    add_out(sweep_k);

    CLI::App* sweep_tau = add_sub("sweep-tau", "scheme limits across time steps");
    sweep_tau->add_option("--tau-list", spec.tau_list, "time steps")->delimiter(',')->required();
    add_grid(sweep_tau);
    add_flow(sweep_tau);
    add_out(sweep_tau);

    CLI::App* compare = add_sub("compare-schemes",
                                           "limits of all three schemes at one tau");
    add_grid(compare);
    add_flow(compare);
    add_out(compare);

    CLI::App* coercivity = add_sub("coercivity",
                                              "smallest eigenvalue of the linearized operator");
    add_grid(coercivity);
    coercivity->add_option("--h-list", spec.h_list, "mesh spacings (overrides --h/--K)")
        ->delimiter(',');
    coercivity->add_option("--kh", spec.kh, "fixed K*h product for --h-list");
    add_out(coercivity);

    CLI::App* cngf = add_sub("cngf-check",
                                        "discrete flow against the continuous reference");
    add_grid(cngf);
    cngf->add_option("--tau-list", spec.tau_list, "time steps")->delimiter(',')->required();
    cngf->add_option("--dt", spec.cngf_dt, "RK4 step (default 1e-3)");
    cngf->add_option("--T", spec.cngf_time, "integration time (default 5)");
    cngf->add_option("--eps", spec.init.eps, "perturbation amplitude");
    cngf->add_option("--init", init_name, "soliton | perturbed | custom")
        ->check(CLI::IsMember({"soliton", "perturbed", "custom"}));
    cngf->add_option("--seed", spec.init.seed, "seed for --init custom");
    add_out(cngf);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp& e) {
        throw HelpRequested{app.help()};
    } catch (const CLI::CallForAllHelp& e) {
        throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    spec.scheme = scheme_map.at(scheme_name);
    spec.init.kind = init_map.at(init_name);

    if (solve->parsed()) spec.command = Command::Solve;
    if (gs->parsed()) {
        spec.command = Command::GroundState;
        if (gs_tau->count() == 0) spec.tau = 0.5;
        if (gs_tol->count() == 0) spec.tol = 1e-13;
    }
    if (sweep_h->parsed()) spec.command = Command::SweepH;
    if (sweep_k->parsed()) spec.command = Command::SweepK;
    if (sweep_tau->parsed()) spec.command = Command::SweepTau;
    if (compare->parsed()) spec.command = Command::CompareSchemes;
    if (coercivity->parsed()) spec.command = Command::Coercivity;
    if (cngf->parsed()) spec.command = Command::CngfCheck;

    validate_common(spec);
    if (spec.command == Command::SweepH) validate_list(spec.h_list, "--h-list");
    if (spec.command == Command::SweepK) validate_list(spec.kh_list, "--kh-list");
    if (spec.command == Command::SweepTau || spec.command == Command::CngfCheck) {
        validate_list(spec.tau_list, "--tau-list");
        for (double tau : spec.tau_list) {
            require_range(tau <= 1.0, "--tau-list entries must lie in (0, 1]");
        }
    }
    if (spec.command == Command::Coercivity && !spec.h_list.empty()) {
        validate_list(spec.h_list, "--h-list");
    }
    return spec;
}

std::string format_cell(const Cell& cell) {
    struct Visitor {
        std::string operator()(std::monostate) const { return {}; }
        std::string operator()(double v) const {
            char buf[64];
            const auto [ptr, ec] =
                std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 16);
            return std::string(buf, ptr);
        }
        std::string operator()(long long v) const { return std::to_string(v); }
        std::string operator()(const std::string& v) const { return v; }
    };
    return std::visit(Visitor{}, cell);
}

void write_csv(const CsvReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    for (const std::string& line : report.leading_comments) out << line << '\n';
    for (std::size_t i = 0; i < report.header.size(); ++i) {
        if (i) out << ',';
        out << report.header[i];
    }
    out << '\n';
    for (const auto& row : report.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << format_cell(row[i]);
        }
        out << '\n';
    }
    for (const std::string& line : report.trailing_comments) out << line << '\n';
    out.flush();
    if (!out) {
        throw IoError("failed while writing '" + path + "'");
    }
}

int execute(const RunSpec& spec) {
    std::fprintf(stderr,
                 "note: the normalization step divides by sqrt(N_h(psi*)) so that "
                 "N_h(psi_{n+1}) = 1\n");
    try {
        switch (spec.command) {
            case Command::Solve: return run_solve(spec);
            case Command::GroundState: return run_ground_state(spec);
            case Command::SweepH: return run_sweep_h(spec);
            case Command::SweepK: return run_sweep_k(spec);
            case Command::SweepTau: return run_sweep_tau(spec);
            case Command::CompareSchemes: return run_compare_schemes(spec);
            case Command::Coercivity: return run_coercivity(spec);
            case Command::CngfCheck: return run_cngf_check(spec);
        }
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const NonconvergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}

} // namespace imagtime::cli
