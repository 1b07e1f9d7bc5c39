#pragma once

#include "detc/codesign.hpp"
#include "detc/dar.hpp"

#include <optional>
#include <utility>

// Event-triggering runtime: evaluate the trigger function with the
// asynchronism-compensation term, run the internal variable eta, and decide
// transmissions for the dynamic, static and periodic schedulers.

namespace detc {

enum class Scheduler { dynamic, static_etc, periodic };

inline const char *to_string(Scheduler s) {
    switch (s) {
    case Scheduler::dynamic: return "dynamic";
    case Scheduler::static_etc: return "static";
    case Scheduler::periodic: return "periodic";
    }
    return "unknown";
}

/// Gains scheduled at x: K(x) = sum_j alpha_j(x) K_j, likewise L. In op2
/// mode L(x) is identically zero. Out-of-range states throw DomainError
/// unless `clamp` is set, in which case the weights are clamped onto the
/// simplex and `clamped` records the excursion.
inline std::pair<Matrix, Matrix> scheduled_gains(const EtcDesign &design,
                                                 const DarModel &model,
                                                 const Vector &x,
                                                 bool clamp = false,
                                                 bool *clamped = nullptr) {
    bool did_clamp = false;
    const Vector alpha = clamp ? weights_clamped(model, x, did_clamp)
                               : weights(model, x);
    if (clamped)
        *clamped = did_clamp;
    Matrix K = Matrix::Zero(design.m, design.n);
    Matrix L = Matrix::Zero(design.m, design.p);
    for (int j = 0; j < static_cast<int>(design.K.size()); ++j) {
        K += alpha(j) * design.K[static_cast<std::size_t>(j)];
        if (design.uses_nonlinearity())
            L += alpha(j) * design.L[static_cast<std::size_t>(j)];
    }
    return {K, L};
}

struct ControlInput {
    Vector u;
    Vector pi_hat;
    bool clamped = false;
};

/// Input and nonlinearity vector at a transmission instant. They satisfy
/// the joint fixed point u = K(xh) xh + L(xh) pih with pih solving the
/// algebraic constraint at (xh, u).
inline ControlInput control_input(const EtcDesign &design,
                                  const DarModel &model, const Vector &x_hat,
                                  bool clamp = false) {
    ControlInput out;
    const auto [K, L] = scheduled_gains(design, model, x_hat, clamp,
                                        &out.clamped);
    const auto z = model.z_of(x_hat);
    const Matrix O2 = model.Omega2.eval(z);
    Eigen::FullPivLU<Matrix> o2_lu(O2);
    if (!o2_lu.isInvertible())
        throw AlgebraicLoopError("Omega2 singular at the transmitted state");
    const Matrix O2i_O3 = o2_lu.solve(model.Omega3.eval(z));
    const Matrix O2i_O1 = o2_lu.solve(model.Omega1.eval(z));
    // (I + O2^{-1} O3 L) pih = -O2^{-1} (O1 + O3 K) xh
    const Matrix fixed_point =
        Matrix::Identity(model.p, model.p) + O2i_O3 * L;
    Eigen::FullPivLU<Matrix> fp_lu(fixed_point);
    if (!fp_lu.isInvertible())
        throw AlgebraicLoopError(
            "controller/nonlinearity fixed point is singular");
    out.pi_hat = fp_lu.solve(-(O2i_O1 + O2i_O3 * K) * x_hat);
    out.u = K * x_hat + L * out.pi_hat;
    return out;
}

/// Full trigger evaluation at state x against held values (x_hat, pi_hat).
struct EtmEvaluation {
    Vector e, delta;   ///< transmission errors
    Vector pi, u;      ///< current nonlinearity vector and applied input
    Vector phi1, phi2; ///< nominal closed-loop pieces
    Vector xi1, xi2;   ///< asynchronism-induced pieces
    double xi = 0.0;
    double gamma = 0.0;
    bool clamped = false;
};

inline EtmEvaluation evaluate_gamma(const EtcDesign &design,
                                    const DarModel &model, const Vector &x,
                                    const Vector &x_hat,
                                    const Vector &pi_hat,
                                    bool clamp = false) {
    EtmEvaluation ev;
    bool clamped_x = false, clamped_h = false;
    const auto [Kx, Lx] = scheduled_gains(design, model, x, clamp,
                                          &clamped_x);
    const auto [Kh, Lh] = scheduled_gains(design, model, x_hat, clamp,
                                          &clamped_h);
    ev.clamped = clamped_x || clamped_h;

    ev.u = Kh * x_hat + Lh * pi_hat;
    ev.pi = eval_pi(model, x, ev.u);
    ev.e = x_hat - x;
    ev.delta = pi_hat - ev.pi;

    const auto z = model.z_of(x);
    const Matrix A1 = model.A1.eval(z), A2 = model.A2.eval(z),
                 A3 = model.A3.eval(z);
    const Matrix O1 = model.Omega1.eval(z), O2 = model.Omega2.eval(z),
                 O3 = model.Omega3.eval(z);

    ev.phi1 = (A1 + A3 * Kx) * x + A3 * Kx * ev.e +
              (A2 + A3 * Lx) * ev.pi + A3 * Lx * ev.delta;
    ev.phi2 = (O1 + O3 * Kx) * x + O3 * Kx * ev.e +
              (O2 + O3 * Lx) * ev.pi + O3 * Lx * ev.delta;

    // Gain mismatch between the scheduling at x and at x_hat = x + e.
    const Vector mismatch =
        (Kh - Kx) * x_hat + (Lh - Lx) * (ev.delta + ev.pi);
    ev.xi1 = A3 * mismatch;
    ev.xi2 = O3 * mismatch;

    ev.xi = 2.0 * ev.phi1.dot(design.P * ev.xi1) +
            ev.xi1.dot(design.P * ev.xi1) +
            2.0 * ev.pi.dot(design.Z * ev.xi2);

    ev.gamma = x.dot(design.Qx * x) - ev.e.dot(design.Qe * ev.e) - ev.xi;
    if (design.uses_nonlinearity())
        ev.gamma += ev.pi.dot(design.Qpi * ev.pi) -
                    ev.delta.dot(design.Qdelta * ev.delta);
    return ev;
}

/// Scheduler state carried between decision instants.
struct EtmState {
    double eta = 0.0;
    Vector x_hat;
    Vector pi_hat;
    long last_event_k = -1; ///< negative before the first transmission
    Scheduler scheduler = Scheduler::dynamic;
};

struct EtmStepResult {
    bool transmit = false;
    Vector u;
    EtmEvaluation post; ///< evaluation with post-decision held values
    double gamma_held = 0.0;
};

/// One decision instant. Order matters: the trigger condition sees the held
/// values, the eta recursion sees the post-decision ones (errors reset to
/// zero at a transmission, since k_j belongs to its own interval I_j).
inline EtmStepResult etm_step(EtmState &state, const EtcDesign &design,
                              const DarModel &model, const Vector &x, long k,
                              bool clamp = true) {
    if (state.scheduler == Scheduler::dynamic &&
        design.theta < 1.0 / (1.0 - design.lambda))
        throw ValidationError("dynamic ETM requires theta >= 1/(1-lambda)");

    EtmStepResult result;
    const bool first = state.last_event_k < 0;

    std::optional<EtmEvaluation> held;
    if (!first) {
        held = evaluate_gamma(design, model, x, state.x_hat, state.pi_hat,
                              clamp);
        result.gamma_held = held->gamma;
    }

    switch (state.scheduler) {
    case Scheduler::dynamic:
        result.transmit = first || state.eta + design.theta * held->gamma <
                                       0.0;
        break;
    case Scheduler::static_etc:
        result.transmit = first || held->gamma < 0.0;
        break;
    case Scheduler::periodic:
        result.transmit = true;
        break;
    }

    if (result.transmit) {
        const ControlInput ci = control_input(design, model, x, clamp);
        state.x_hat = x;
        state.pi_hat = ci.pi_hat;
        state.last_event_k = k;
        result.post = evaluate_gamma(design, model, x, state.x_hat,
                                     state.pi_hat, clamp);
        result.post.clamped |= ci.clamped;
    } else {
        result.post = *held;
    }
    result.u = result.post.u;

    if (state.scheduler == Scheduler::dynamic)
        state.eta = (1.0 - design.lambda) * state.eta + result.post.gamma;
    return result;
}

} // namespace detc
