#pragma once

#include "detc/dar.hpp"
#include "detc/lmi.hpp"
#include "detc/sdp.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

// Controller/ETM co-design: solve the OP1/OP2 optimization problems, recover
// the runtime parameters from the tilde variables, and provide the design
// exploration tools (Pareto sweep over the trace budget, inter-event metric,
// region-of-attraction ellipsoid, maximal validity box search).

namespace detc {

struct EtcDesign {
    DesignMode mode = DesignMode::op1;
    int n = 0, m = 0, p = 0, r = 0;

    std::vector<Matrix> K; ///< m x n gain per vertex
    std::vector<Matrix> L; ///< m x p gain per vertex; empty in op2 mode
    Matrix Qx, Qe;         ///< n x n trigger weights
    Matrix Qpi, Qdelta;    ///< p x p trigger weights; 0x0 in op2 mode
    Matrix P;              ///< Lyapunov matrix, X^{-1}
    Matrix Z;              ///< multiplier, Zt^{-T}
    Matrix X;              ///< solver-side X, kept for consistency checks

    double lambda = 1e-3;
    double theta = 100.0;
    double eta0 = 0.0;
    double sigma = std::numeric_limits<double>::quiet_NaN();
    double epsilon = std::numeric_limits<double>::quiet_NaN();
    double Lambda_metric = std::numeric_limits<double>::quiet_NaN();

    /// Raw solver blocks (X, Qx_t, ..., K_t[j], ...), retained so a design
    /// can be re-verified against the original matrix inequalities.
    std::map<std::string, Matrix> tilde;

    bool uses_nonlinearity() const { return mode == DesignMode::op1; }

    void validate() const;
};

namespace detail {

inline double spd_min_eig(const Matrix &M) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (M + M.transpose()),
                                              Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

inline double spd_max_eig(const Matrix &M) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (M + M.transpose()),
                                              Eigen::EigenvaluesOnly);
    return eig.eigenvalues().maxCoeff();
}

inline double sym_cond(const Matrix &M) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (M + M.transpose()),
                                              Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().cwiseAbs().minCoeff();
    const double hi = eig.eigenvalues().cwiseAbs().maxCoeff();
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

inline double full_cond(const Matrix &M) {
    Eigen::JacobiSVD<Matrix> svd(M);
    const double lo = svd.singularValues().minCoeff();
    const double hi = svd.singularValues().maxCoeff();
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

/// Symmetric positive definite inverse with one Newton refinement step to
/// push the residual ||M Minv - I|| toward machine precision.
inline Matrix spd_inverse(const Matrix &M, const std::string &name) {
    const Matrix sym = 0.5 * (M + M.transpose());
    Eigen::LLT<Matrix> llt(sym);
    if (llt.info() != Eigen::Success)
        throw Error("recovery: " + name + " is not positive definite");
    Matrix inv = llt.solve(Matrix::Identity(M.rows(), M.cols()));
    inv = inv * (2.0 * Matrix::Identity(M.rows(), M.cols()) - sym * inv);
    return 0.5 * (inv + inv.transpose());
}

} // namespace detail

inline void EtcDesign::validate() const {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw ValidationError("lambda must lie in (0,1)");
    if (!(theta > 1.0 / (1.0 - lambda)))
        throw ValidationError("theta must exceed 1/(1-lambda)");
    if (!(eta0 >= 0.0 && eta0 < 1.0))
        throw ValidationError("eta0 must lie in [0,1)");
    if (detail::spd_min_eig(P) <= 0.0)
        throw ValidationError("P is not positive definite");
    if (detail::spd_min_eig(Qx) <= 0.0 || detail::spd_min_eig(Qe) <= 0.0)
        throw ValidationError("trigger weights Qx/Qe are not positive "
                              "definite");
    if (mode == DesignMode::op1 &&
        (detail::spd_min_eig(Qpi) <= 0.0 ||
         detail::spd_min_eig(Qdelta) <= 0.0))
        throw ValidationError("trigger weights Qpi/Qdelta are not positive "
                              "definite");
    if ((P * X - Matrix::Identity(n, n)).norm() > 1e-8)
        throw ValidationError("P is not a faithful inverse of X");
    if (!std::isnan(sigma) && detail::spd_max_eig(P) > sigma + 1e-6)
        throw ValidationError("sigma does not dominate lambda_max(P)");
    if (static_cast<int>(K.size()) != (1 << r))
        throw DimensionError("one K gain required per vertex");
    if (mode == DesignMode::op1 && L.size() != K.size())
        throw DimensionError("one L gain required per vertex in op1 mode");
}

/// Inter-event eigenvalue ratio: max eigenvalue of the error weights over
/// min eigenvalue of the state weights. Smaller values slow the trigger
/// function's drift toward the threshold.
inline double lambda_metric(const EtcDesign &design) {
    double num = detail::spd_max_eig(design.Qe);
    double den = detail::spd_min_eig(design.Qx);
    if (design.mode == DesignMode::op1) {
        num = std::max(num, detail::spd_max_eig(design.Qdelta));
        den = std::min(den, detail::spd_min_eig(design.Qpi));
    }
    return num / den;
}

struct SynthesisOptions {
    DesignMode mode = DesignMode::op1;
    double epsilon = 1e3;
    double lambda = 1e-3;
    double theta = 100.0;
    double eta0 = 0.0;
    double delta_pd = 1e-6;
    SolverSettings solver;
};

struct SynthesisResult {
    SolveStatus status = SolveStatus::solver_failure;
    std::optional<EtcDesign> design;
    Solution solution;
    double delta_strict = 0.0;
};

/// Undo the tilde change of variables (Theorem 1 / Corollary 1).
inline EtcDesign recover(const DarModel &model, const PolytopicModel &poly,
                         const Solution &solution,
                         const SynthesisOptions &opts) {
    if (!is_usable(solution.status))
        throw Error("recover requires an optimal/feasible solution");
    EtcDesign d;
    d.mode = opts.mode;
    d.n = model.n;
    d.m = model.m;
    d.p = model.p;
    d.r = poly.r;
    d.lambda = opts.lambda;
    d.theta = opts.theta;
    d.eta0 = opts.eta0;
    d.epsilon = opts.epsilon;
    d.tilde = solution.values;

    const Matrix &Xv = solution.values.at("X");
    if (detail::sym_cond(Xv) > 1e8)
        throw Error("recovery: X condition number exceeds 1e8");
    d.X = Xv;
    d.P = detail::spd_inverse(Xv, "X");

    d.Qx = detail::spd_inverse(solution.values.at("Qx_t"), "Qx_t");
    d.Qe = d.P * solution.values.at("Qe_t") * d.P;
    d.Qe = 0.5 * (d.Qe + d.Qe.transpose());

    const Matrix &Zt = solution.values.at("Z_t");
    if (detail::full_cond(Zt) > 1e8)
        throw Error("recovery: Z_t condition number exceeds 1e8 (" +
                    std::to_string(detail::full_cond(Zt)) + ")");
    Eigen::PartialPivLU<Matrix> Zt_lu(Zt);
    Eigen::PartialPivLU<Matrix> ZtT_lu(Zt.transpose().eval());
    d.Z = ZtT_lu.solve(Matrix::Identity(model.p, model.p)); // Zt^{-T}

    if (opts.mode == DesignMode::op1) {
        d.Qpi = detail::spd_inverse(solution.values.at("Qpi_t"), "Qpi_t");
        // Qdelta = Zt^{-T} Qdelta_t Zt^{-1}
        const Matrix Y = ZtT_lu.solve(solution.values.at("Qdelta_t"));
        Matrix Qd = ZtT_lu.solve(Y.transpose()).transpose();
        d.Qdelta = 0.5 * (Qd + Qd.transpose());
    } else {
        d.Qpi.resize(0, 0);
        d.Qdelta.resize(0, 0);
    }

    const int nv = 1 << poly.r;
    for (int j = 0; j < nv; ++j) {
        const Matrix &Kt =
            solution.values.at("K_t[" + std::to_string(j) + "]");
        d.K.push_back(Kt * d.P); // K = Kt X^{-1}
        if (opts.mode == DesignMode::op1) {
            const Matrix &Lt =
                solution.values.at("L_t[" + std::to_string(j) + "]");
            // L = Lt Zt^{-1}  <=>  L' = Zt^{-T} Lt'
            d.L.push_back(ZtT_lu.solve(Lt.transpose()).transpose());
        }
    }

    d.sigma = solution.values.at("sigma")(0, 0);
    d.Lambda_metric = lambda_metric(d);
    d.validate();
    return d;
}

/// Solve one co-design instance (OP1 with the nonlinearity-aware law and
/// trigger, OP2 with the state-feedback-only variants).
inline SynthesisResult synthesize(const DarModel &model,
                                  const SynthesisOptions &opts) {
    if (!(opts.lambda > 0.0 && opts.lambda < 1.0))
        throw ValidationError("lambda must lie in (0,1)");
    if (!(opts.theta > 1.0 / (1.0 - opts.lambda)))
        throw ValidationError("theta must exceed 1/(1-lambda)");
    if (!(opts.eta0 >= 0.0 && opts.eta0 < 1.0))
        throw ValidationError("eta0 must lie in [0,1)");
    model.validate();
    const PolytopicModel poly = vertexify(model);

    AssemblyOptions aopts;
    aopts.mode = opts.mode;
    aopts.epsilon = opts.epsilon;
    aopts.delta_pd = opts.delta_pd;
    AssembledProblem assembled = assemble(model, poly, aopts);

    SynthesisResult result;
    result.delta_strict = assembled.delta_strict;
    result.solution = solve(assembled.problem, opts.solver);
    result.status = result.solution.status;
    if (!is_usable(result.status))
        return result;

    // An ill-conditioned multiplier makes the recovered parameters
    // meaningless even when the backend is happy.
    if (detail::full_cond(result.solution.values.at("Z_t")) > 1e8) {
        result.status = SolveStatus::inaccurate;
        result.solution.status = SolveStatus::inaccurate;
        result.solution.diagnostic =
            "Z_t condition number exceeds 1e8; recovery would be unreliable";
        return result;
    }

    result.design = recover(model, poly, result.solution, opts);
    return result;
}

inline SynthesisResult solve_op1(const DarModel &model,
                                 SynthesisOptions opts) {
    opts.mode = DesignMode::op1;
    return synthesize(model, opts);
}

inline SynthesisResult solve_op2(const DarModel &model,
                                 SynthesisOptions opts) {
    opts.mode = DesignMode::op2;
    return synthesize(model, opts);
}

// ---------------------------------------------------------------------------
// Pareto sweep over the trace budget.
// ---------------------------------------------------------------------------

struct ParetoPoint {
    double epsilon = 0.0;
    double sigma = std::numeric_limits<double>::quiet_NaN();
    SolveStatus status = SolveStatus::solver_failure;
    double Lambda_metric = std::numeric_limits<double>::quiet_NaN();
};

inline std::vector<ParetoPoint> pareto_sweep(const DarModel &model,
                                             const std::vector<double> &grid,
                                             SynthesisOptions opts) {
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw ValidationError("epsilon grid must be strictly ascending");
    std::vector<ParetoPoint> points;
    points.reserve(grid.size());
    for (const double eps : grid) {
        ParetoPoint pt;
        pt.epsilon = eps;
        opts.epsilon = eps;
        try {
            const SynthesisResult res = synthesize(model, opts);
            pt.status = res.status;
            if (res.design) {
                pt.sigma = res.design->sigma;
                pt.Lambda_metric = res.design->Lambda_metric;
            }
        } catch (const Error &) {
            pt.status = SolveStatus::solver_failure;
        }
        points.push_back(pt);
    }
    return points;
}

/// Feasible sigma values must not increase along the ascending grid.
inline bool pareto_monotone(const std::vector<ParetoPoint> &points,
                            double rtol = 1e-6) {
    double prev = std::numeric_limits<double>::infinity();
    for (const auto &pt : points) {
        if (!is_usable(pt.status))
            continue;
        if (pt.sigma > prev * (1.0 + rtol))
            return false;
        prev = pt.sigma;
    }
    return true;
}

/// Log-spaced grid helper (inclusive endpoints).
inline std::vector<double> log_grid(double lo, double hi, int count) {
    if (count < 1 || lo <= 0.0 || hi <= lo)
        throw ValidationError("log grid needs 0 < lo < hi and count >= 1");
    std::vector<double> g;
    if (count == 1) {
        g.push_back(lo);
        return g;
    }
    const double step = (std::log10(hi) - std::log10(lo)) / (count - 1);
    for (int i = 0; i < count; ++i)
        g.push_back(std::pow(10.0, std::log10(lo) + step * i));
    return g;
}

// ---------------------------------------------------------------------------
// Region of attraction.
// ---------------------------------------------------------------------------

/// Ellipsoidal admissible-initial-state set { x : x'Px <= level }.
struct RoaRegion {
    Matrix P;
    double level = 1.0;
};

inline RoaRegion roa_ellipse(const EtcDesign &design, double eta0) {
    if (eta0 >= 1.0)
        throw ValidationError("eta0 >= 1 leaves an empty admissible region");
    if (eta0 < 0.0)
        throw ValidationError("eta0 must be nonnegative");
    return {design.P, 1.0 - eta0};
}

inline bool roa_contains(const RoaRegion &region, const Vector &x) {
    return x.dot(region.P * x) <= region.level;
}

/// N points with x'Px = level: uniform in angle for n = 2, normalized random
/// directions otherwise (seeded).
inline std::vector<Vector> roa_boundary(const RoaRegion &region, int count,
                                        std::uint64_t seed = 0) {
    const int n = static_cast<int>(region.P.rows());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(region.P);
    if (eig.eigenvalues().minCoeff() <= 0.0)
        throw ValidationError("region matrix is not positive definite");
    const Matrix P_inv_sqrt =
        eig.eigenvectors() *
        eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
        eig.eigenvectors().transpose();
    const double radius = std::sqrt(region.level);

    std::vector<Vector> points;
    points.reserve(static_cast<std::size_t>(count));
    if (n == 2) {
        for (int k = 0; k < count; ++k) {
            const double ang = 2.0 * M_PI * k / std::max(count, 1);
            Vector dir(2);
            dir << std::cos(ang), std::sin(ang);
            points.push_back(radius * (P_inv_sqrt * dir));
        }
    } else {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        while (static_cast<int>(points.size()) < count) {
            Vector dir(n);
            for (int i = 0; i < n; ++i)
                dir(i) = normal(rng);
            const double nrm = dir.norm();
            if (nrm < 1e-12)
                continue;
            points.push_back(radius * (P_inv_sqrt * (dir / nrm)));
        }
    }
    return points;
}

// ---------------------------------------------------------------------------
// Maximal feasible validity box.
// ---------------------------------------------------------------------------

/// Rescale the validity polytope by `factor` relative to its current size:
/// half-planes shrink by 1/factor and every scheduling range is scaled about
/// its offset so it covers the resized box exactly.
inline DarModel scale_validity_box(const DarModel &model, double factor) {
    if (factor <= 0.0)
        throw ValidationError("box scale factor must be positive");
    DarModel scaled = model;
    for (auto &b : scaled.domain_b)
        b /= factor;
    for (auto &s : scaled.scheduling) {
        s.lower = factor * (s.lower - s.d) + s.d;
        s.upper = factor * (s.upper - s.d) + s.d;
    }
    return scaled;
}

struct MaxBoxResult {
    double last_feasible = std::numeric_limits<double>::quiet_NaN();
    double first_infeasible = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<double, SolveStatus>> probes;
};

/// Bisect the box half-width xbar in [lo, hi]; the loaded model is taken to
/// correspond to xbar_ref. Requires feasibility at lo; a feasible hi caps
/// the search and is reported as the last feasible point.
inline MaxBoxResult max_feasible_box(const DarModel &model, double xbar_ref,
                                     double lo, double hi, double tol,
                                     const SynthesisOptions &opts) {
    if (!(xbar_ref > 0.0) || !(lo > 0.0) || !(hi < std::numeric_limits<double>::infinity()) || !(lo <= hi))
        throw ValidationError("invalid bisection interval");
    MaxBoxResult result;
    auto probe = [&](double xbar) {
        const SynthesisResult res =
            synthesize(scale_validity_box(model, xbar / xbar_ref), opts);
        result.probes.emplace_back(xbar, res.status);
        return is_usable(res.status);
    };

    const bool lo_feasible = probe(lo);
    if (lo == hi) {
        if (lo_feasible)
            result.last_feasible = lo;
        else
            result.first_infeasible = lo;
        return result;
    }
    const bool hi_feasible = probe(hi);
    if (!lo_feasible && !hi_feasible)
        throw Error("both bisection endpoints are infeasible");
    if (!lo_feasible && hi_feasible)
        throw Error("non-monotone feasibility: infeasible below a feasible "
                    "box");
    if (lo_feasible && hi_feasible) {
        result.last_feasible = hi; // capped: the whole interval is feasible
        return result;
    }

    double a = lo, b = hi;
    while (b - a > tol) {
        const double mid = 0.5 * (a + b);
        if (probe(mid))
            a = mid;
        else
            b = mid;
    }
    result.last_feasible = a;
    result.first_infeasible = b;
    return result;
}

} // namespace detc
