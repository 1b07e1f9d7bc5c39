#pragma once

#include "detc/codesign.hpp"
#include "detc/etm.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

// Closed-loop event-triggered simulation of a DAR plant under a synthesized
// design, plus the batch experiments: event-count statistics over sampled
// initial conditions, a region-of-attraction boundary sweep, and the
// three-scheduler comparison.

namespace detc {

struct SimConfig {
    int horizon = 100; ///< decision instants k = 0..horizon inclusive
    Vector x0;
    double eta0 = 0.0;
    Scheduler scheduler = Scheduler::dynamic;
    std::optional<double> lambda; ///< override the design value
    std::optional<double> theta;
};

struct SimStep {
    long k = 0;
    Vector x, u;
    double eta = 0.0;
    double gamma = 0.0;
    bool event = false;
    double V = 0.0;
    double W = 0.0;
    bool excursion = false;
};

struct SimTrace {
    std::vector<SimStep> steps;
    std::vector<long> events;
    std::vector<long> inter_event;
    bool any_excursion = false;

    int event_count() const { return static_cast<int>(events.size()); }

    double min_eta() const {
        double lo = std::numeric_limits<double>::infinity();
        for (const auto &s : steps)
            lo = std::min(lo, s.eta);
        return lo;
    }

    double max_w() const {
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto &s : steps)
            hi = std::max(hi, s.W);
        return hi;
    }
};

/// Run one closed loop: at every instant the ETM decides, the held input is
/// applied, and the plant advances through the DAR dynamics. The trace has
/// horizon+1 rows; the recorded eta/V/W are the values at instant k, gamma
/// is the value entering the eta recursion.
inline SimTrace simulate(const DarModel &model, const EtcDesign &design,
                         const SimConfig &config) {
    if (config.x0.size() != model.n)
        throw DimensionError("initial state dimension mismatch");
    if (!in_domain(model, config.x0))
        throw DomainError("initial state outside the validity polytope");
    if (config.eta0 < 0.0)
        throw ValidationError("eta0 must be nonnegative");
    if (config.horizon < 0)
        throw ValidationError("horizon must be nonnegative");

    EtcDesign d = design;
    if (config.lambda)
        d.lambda = *config.lambda;
    if (config.theta)
        d.theta = *config.theta;
    if (!(d.lambda > 0.0 && d.lambda < 1.0))
        throw ValidationError("lambda must lie in (0,1)");

    SimTrace trace;
    trace.steps.reserve(static_cast<std::size_t>(config.horizon) + 1);

    EtmState state;
    state.scheduler = config.scheduler;
    state.eta = config.scheduler == Scheduler::dynamic ? config.eta0 : 0.0;

    Vector x = config.x0;
    for (long k = 0; k <= config.horizon; ++k) {
        const double eta_k = state.eta;
        const EtmStepResult step = etm_step(state, d, model, x, k);

        SimStep row;
        row.k = k;
        row.x = x;
        row.u = step.u;
        row.eta = eta_k;
        row.gamma = step.post.gamma;
        row.event = step.transmit;
        row.V = x.dot(d.P * x);
        row.W = row.V + eta_k;
        row.excursion = step.post.clamped || !in_domain(model, x);
        trace.any_excursion |= row.excursion;
        trace.steps.push_back(std::move(row));

        if (step.transmit) {
            if (!trace.events.empty())
                trace.inter_event.push_back(k - trace.events.back());
            trace.events.push_back(k);
        }
        if (k < config.horizon)
            x = step_dar(model, x, step.u);
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Batch experiments.
// ---------------------------------------------------------------------------

/// Draw an initial state inside the region: boundary direction uniform in
/// angle (n = 2) or a normalized Gaussian direction, with the V-level
/// uniform in [0, level].
template <class Rng>
Vector sample_in_region(const RoaRegion &region, Rng &rng) {
    const int n = static_cast<int>(region.P.rows());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(region.P);
    const Matrix P_inv_sqrt =
        eig.eigenvectors() *
        eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
        eig.eigenvectors().transpose();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector dir(n);
    if (n == 2) {
        const double ang = 2.0 * M_PI * unif(rng);
        dir << std::cos(ang), std::sin(ang);
    } else {
        std::normal_distribution<double> normal(0.0, 1.0);
        do {
            for (int i = 0; i < n; ++i)
                dir(i) = normal(rng);
        } while (dir.norm() < 1e-12);
        dir /= dir.norm();
    }
    const double level = unif(rng) * region.level; // uniform in V
    return std::sqrt(level) * (P_inv_sqrt * dir);
}

struct BatchRun {
    int run = 0;
    Vector x0;
    int events = 0;
    double min_eta = 0.0;
};

struct BatchResult {
    double mean_events = 0.0;
    std::vector<BatchRun> runs;
};

/// N simulations with initial conditions drawn by `sampler`. A hard failure
/// aborts the whole batch, tagged with the offending run index.
template <class Sampler>
BatchResult batch_events_with(const DarModel &model, const EtcDesign &design,
                              int n_runs, int horizon, Scheduler scheduler,
                              Sampler &&sampler, double eta0 = 0.0,
                              std::optional<double> lambda = {},
                              std::optional<double> theta = {}) {
    BatchResult result;
    result.runs.reserve(static_cast<std::size_t>(n_runs));
    double total = 0.0;
    for (int i = 0; i < n_runs; ++i) {
        SimConfig cfg;
        cfg.horizon = horizon;
        cfg.x0 = sampler(i);
        cfg.eta0 = eta0;
        cfg.scheduler = scheduler;
        cfg.lambda = lambda;
        cfg.theta = theta;
        try {
            const SimTrace trace = simulate(model, design, cfg);
            result.runs.push_back(
                {i, cfg.x0, trace.event_count(), trace.min_eta()});
            total += trace.event_count();
        } catch (const Error &e) {
            throw Error("batch run " + std::to_string(i) +
                        " failed: " + e.what());
        }
    }
    result.mean_events = n_runs > 0 ? total / n_runs : 0.0;
    return result;
}

/// Convenience wrapper: seeded sampling inside the admissible region.
inline BatchResult batch_events(const DarModel &model,
                                const EtcDesign &design, int n_runs,
                                int horizon, Scheduler scheduler,
                                std::uint64_t seed, double eta0 = 0.0,
                                std::optional<double> lambda = {},
                                std::optional<double> theta = {}) {
    const RoaRegion region = roa_ellipse(design, eta0);
    std::mt19937_64 rng(seed);
    return batch_events_with(
        model, design, n_runs, horizon, scheduler,
        [&](int) { return sample_in_region(region, rng); }, eta0, lambda,
        theta);
}

// ---------------------------------------------------------------------------
// Region-of-attraction boundary sweep.
// ---------------------------------------------------------------------------

struct RoaSweepRow {
    Vector x0;
    bool converged = false;
    bool stayed_in_domain = false;
    bool w_bounded = false; ///< max W <= W(x0, eta0) + 1e-9
    double final_norm = 0.0;
    double max_w = 0.0;
    int events = 0;
};

struct RoaSweepReport {
    std::vector<RoaSweepRow> rows;
    bool all_converged = true;
    bool all_in_domain = true;
    bool all_w_bounded = true;
};

/// Trajectories from boundary points of R0 with eta0 = 0: convergence is
/// ||x_horizon|| <= 1e-2, containment is never leaving D_x, and W must not
/// rise above its initial value.
inline RoaSweepReport roa_sweep(const DarModel &model,
                                const EtcDesign &design, int n_boundary,
                                int horizon) {
    const RoaRegion region = roa_ellipse(design, 0.0);
    RoaSweepReport report;
    for (const Vector &x0 : roa_boundary(region, n_boundary)) {
        SimConfig cfg;
        cfg.horizon = horizon;
        cfg.x0 = x0;
        cfg.eta0 = 0.0;
        cfg.scheduler = Scheduler::dynamic;
        const SimTrace trace = simulate(model, design, cfg);

        RoaSweepRow row;
        row.x0 = x0;
        row.final_norm = trace.steps.back().x.norm();
        row.converged = row.final_norm <= 1e-2;
        row.stayed_in_domain = true;
        for (const auto &s : trace.steps)
            row.stayed_in_domain &= in_domain(model, s.x);
        row.max_w = trace.max_w();
        row.w_bounded = row.max_w <= x0.dot(design.P * x0) + 1e-9;
        row.events = trace.event_count();

        report.all_converged &= row.converged;
        report.all_in_domain &= row.stayed_in_domain;
        report.all_w_bounded &= row.w_bounded;
        report.rows.push_back(std::move(row));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Scheduler comparison.
// ---------------------------------------------------------------------------

struct SchedulerComparison {
    SimTrace dynamic;
    SimTrace static_etc;
    SimTrace periodic;

    int dynamic_events() const { return dynamic.event_count(); }
    int static_events() const { return static_etc.event_count(); }
    int periodic_events() const { return periodic.event_count(); }
};

/// Same initial condition under all three schedulers.
inline SchedulerComparison compare_schedulers(const DarModel &model,
                                              const EtcDesign &design,
                                              const Vector &x0, int horizon,
                                              double eta0 = 0.0) {
    SchedulerComparison cmp;
    SimConfig cfg;
    cfg.horizon = horizon;
    cfg.x0 = x0;
    cfg.eta0 = eta0;
    cfg.scheduler = Scheduler::dynamic;
    cmp.dynamic = simulate(model, design, cfg);
    cfg.scheduler = Scheduler::static_etc;
    cmp.static_etc = simulate(model, design, cfg);
    cfg.scheduler = Scheduler::periodic;
    cmp.periodic = simulate(model, design, cfg);
    return cmp;
}

} // namespace detc
