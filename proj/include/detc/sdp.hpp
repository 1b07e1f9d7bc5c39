#pragma once

#include "detc/clarabel_backend.hpp"
#include "detc/lmi.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <tuple>
#include <vector>

// Semidefinite-programming interface: solve a linear objective over affine
// matrix-inequality constraints. The backend result is never trusted as-is;
// every PSD constraint is re-checked by an eigenvalue computation before a
// solution is reported usable.

namespace detc {

enum class SolveStatus { optimal, feasible, infeasible, inaccurate,
                         solver_failure };

inline const char *to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::feasible: return "feasible";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::inaccurate: return "inaccurate";
    case SolveStatus::solver_failure: return "solver_failure";
    }
    return "unknown";
}

inline bool is_usable(SolveStatus s) {
    return s == SolveStatus::optimal || s == SolveStatus::feasible;
}

struct SolverSettings {
    double feas_tol = 1e-7;   ///< independent eigenvalue check tolerance
    double solver_tol = 1e-8; ///< backend convergence target
    int max_iters = 200;
    int verbosity = 0;
};

struct Solution {
    SolveStatus status = SolveStatus::solver_failure;
    std::map<std::string, Matrix> values;
    double objective_value = std::numeric_limits<double>::quiet_NaN();
    double max_constraint_violation =
        std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    std::string diagnostic;
};

/// Most-negative eigenvalue across all constraints, sign-flipped and floored
/// at zero. Recomputed from the values; independent of any backend report.
inline double verify(const LmiProblem &problem,
                     const std::map<std::string, Matrix> &values) {
    const Vector y = problem.vars.pack_all(values); // throws on missing block
    double violation = 0.0;
    for (const auto &c : problem.constraints) {
        const Matrix F = c.expr.eval(y);
        const Matrix sym = 0.5 * (F + F.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> eig(sym,
                                                  Eigen::EigenvaluesOnly);
        violation = std::max(violation, -eig.eigenvalues().minCoeff());
    }
    return std::max(violation, 0.0);
}

namespace detail {

/// Half-vectorization matching the PSD-triangle cone: upper triangle stacked
/// columnwise, off-diagonal entries scaled by sqrt(2).
inline void svec_into(const Matrix &M, std::vector<double> &out) {
    const int d = static_cast<int>(M.rows());
    for (int c = 0; c < d; ++c)
        for (int r = 0; r <= c; ++r)
            out.push_back(r == c ? M(r, c)
                                 : kSqrt2 * 0.5 * (M(r, c) + M(c, r)));
}

} // namespace detail

inline Solution solve(const LmiProblem &problem,
                      const SolverSettings &settings = {}) {
    Solution sol;
    const int n_vars = problem.vars.total();
    if (n_vars > 50000)
        throw ValidationError("problem exceeds the 50k scalar-unknown "
                              "guardrail");

    if (problem.constraints.empty()) {
        // Nothing to satisfy: any point works, zero is canonical. A nonzero
        // objective over a free variable would be unbounded.
        for (const auto &[k, c] : problem.objective)
            if (c != 0.0) {
                sol.status = SolveStatus::solver_failure;
                sol.diagnostic = "unbounded: objective without constraints";
                return sol;
            }
        sol.status = problem.objective.empty() ? SolveStatus::feasible
                                               : SolveStatus::optimal;
        sol.values = problem.vars.unpack_all(Vector::Zero(n_vars));
        sol.objective_value = 0.0;
        sol.max_constraint_violation = 0.0;
        return sol;
    }

    // Scalarize: s = b - A y must live in the PSD/nonneg product cone, with
    // b = svec(constant) and A columns -svec(coefficient).
    std::vector<double> b;
    std::vector<int> cone_tags;
    std::vector<std::size_t> cone_dims;
    std::vector<std::tuple<std::size_t, int, double>> triplets; // row,col,val
    std::size_t row0 = 0;
    for (const auto &c : problem.constraints) {
        const int d = c.expr.dim();
        if (d == 1) {
            cone_tags.push_back(backend::kConeNonneg);
            cone_dims.push_back(1);
            b.push_back(c.expr.constant()(0, 0));
            for (const auto &[k, G] : c.expr.coefficients())
                if (G(0, 0) != 0.0)
                    triplets.emplace_back(row0, k, -G(0, 0));
            row0 += 1;
            continue;
        }
        cone_tags.push_back(backend::kConePsdTriangle);
        cone_dims.push_back(static_cast<std::size_t>(d));
        detail::svec_into(c.expr.constant(), b);
        for (const auto &[k, G] : c.expr.coefficients()) {
            std::vector<double> col;
            col.reserve(static_cast<std::size_t>(d * (d + 1) / 2));
            detail::svec_into(G, col);
            for (std::size_t t = 0; t < col.size(); ++t)
                if (col[t] != 0.0)
                    triplets.emplace_back(row0 + t, k, -col[t]);
        }
        row0 += static_cast<std::size_t>(d * (d + 1) / 2);
    }
    const std::size_t m_rows = row0;

    std::sort(triplets.begin(), triplets.end(),
              [](const auto &a, const auto &bb) {
                  return std::get<1>(a) != std::get<1>(bb)
                             ? std::get<1>(a) < std::get<1>(bb)
                             : std::get<0>(a) < std::get<0>(bb);
              });
    std::vector<std::size_t> colptr(static_cast<std::size_t>(n_vars) + 1, 0);
    std::vector<std::size_t> rowval;
    std::vector<double> nzval;
    rowval.reserve(triplets.size());
    nzval.reserve(triplets.size());
    {
        std::size_t t = 0;
        for (int col = 0; col < n_vars; ++col) {
            colptr[static_cast<std::size_t>(col)] = rowval.size();
            while (t < triplets.size() && std::get<1>(triplets[t]) == col) {
                rowval.push_back(std::get<0>(triplets[t]));
                nzval.push_back(std::get<2>(triplets[t]));
                ++t;
            }
        }
        colptr[static_cast<std::size_t>(n_vars)] = rowval.size();
    }

    std::vector<double> q(static_cast<std::size_t>(n_vars), 0.0);
    for (const auto &[k, c] : problem.objective)
        q[static_cast<std::size_t>(k)] += c;

    std::vector<double> x(static_cast<std::size_t>(n_vars), 0.0);
    double obj = 0.0;
    unsigned iters = 0;
    const int code = detc_clarabel_solve(
        static_cast<std::size_t>(n_vars), q.data(), m_rows, colptr.data(),
        rowval.data(), nzval.data(), b.data(), cone_tags.size(),
        cone_tags.data(), cone_dims.data(),
        static_cast<unsigned>(settings.max_iters), settings.solver_tol,
        settings.verbosity, x.data(), &obj, &iters);

    sol.iterations = static_cast<int>(iters);
    const Vector y = Eigen::Map<const Vector>(x.data(), n_vars);

    auto fill_values = [&]() {
        sol.values = problem.vars.unpack_all(y);
        sol.objective_value = 0.0;
        for (const auto &[k, c] : problem.objective)
            sol.objective_value += c * y(k);
        sol.max_constraint_violation = verify(problem, sol.values);
    };

    switch (code) {
    case backend::kStatusSolved:
        fill_values();
        if (sol.max_constraint_violation <= settings.feas_tol)
            sol.status = problem.objective.empty() ? SolveStatus::feasible
                                                   : SolveStatus::optimal;
        else {
            sol.status = SolveStatus::inaccurate;
            sol.diagnostic = "backend reported solved but independent check "
                             "found violation " +
                             std::to_string(sol.max_constraint_violation);
        }
        break;
    case backend::kStatusAlmostSolved:
        // Reduced backend accuracy, but the point may still satisfy every
        // constraint under the independent check; then it is a verified
        // feasible point whose optimality is simply uncertified.
        fill_values();
        if (sol.max_constraint_violation <= settings.feas_tol) {
            sol.status = SolveStatus::feasible;
            sol.diagnostic = "verified feasible; backend optimality "
                             "certificate at reduced accuracy only";
        } else {
            sol.status = SolveStatus::inaccurate;
            sol.diagnostic = "backend converged to reduced accuracy";
        }
        break;
    case backend::kStatusPrimalInfeasible:
        sol.status = SolveStatus::infeasible;
        sol.diagnostic = "primal infeasibility certificate";
        break;
    case backend::kStatusAlmostPrimalInfeasible:
        sol.status = SolveStatus::inaccurate;
        sol.diagnostic = "uncertified (reduced-accuracy) infeasibility";
        break;
    case backend::kStatusDualInfeasible:
        sol.status = SolveStatus::solver_failure;
        sol.diagnostic = "objective unbounded (dual infeasibility "
                         "certificate)";
        break;
    case backend::kStatusAlmostDualInfeasible:
        sol.status = SolveStatus::inaccurate;
        sol.diagnostic = "uncertified dual infeasibility";
        break;
    case backend::kStatusMaxIterations:
        fill_values();
        sol.status = SolveStatus::inaccurate;
        sol.diagnostic = "iteration limit reached";
        break;
    case backend::kStatusNumericalError:
        sol.status = SolveStatus::solver_failure;
        sol.diagnostic = "backend numerical error";
        break;
    default:
        sol.status = SolveStatus::solver_failure;
        sol.diagnostic = "backend failure (code " + std::to_string(code) +
                         ")";
        break;
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Canonical problem dump/load (cross-backend regression format).
// ---------------------------------------------------------------------------

inline nlohmann::json dump_problem(const LmiProblem &problem) {
    nlohmann::json j;
    j["format"] = "detc-lmi/1";
    auto &vars = j["variables"] = nlohmann::json::array();
    for (const auto &b : problem.vars.blocks())
        vars.push_back({{"name", b.name},
                        {"rows", b.rows},
                        {"cols", b.cols},
                        {"symmetric", b.symmetric}});
    auto &obj = j["objective"] = nlohmann::json::array();
    for (const auto &[k, c] : problem.objective)
        obj.push_back({k, c});
    auto &cons = j["constraints"] = nlohmann::json::array();
    for (const auto &c : problem.constraints) {
        nlohmann::json jc;
        jc["name"] = c.name;
        jc["dim"] = c.expr.dim();
        auto triplets_of = [](const Matrix &M) {
            nlohmann::json t = nlohmann::json::array();
            for (int col = 0; col < M.cols(); ++col)
                for (int row = 0; row <= col; ++row)
                    if (M(row, col) != 0.0)
                        t.push_back({row, col, M(row, col)});
            return t;
        };
        jc["constant"] = triplets_of(c.expr.constant());
        auto &coef = jc["coefficients"] = nlohmann::json::array();
        for (const auto &[k, G] : c.expr.coefficients()) {
            nlohmann::json e;
            e["k"] = k;
            e["entries"] = triplets_of(G);
            if (!e["entries"].empty())
                coef.push_back(e);
        }
        cons.push_back(jc);
    }
    return j;
}

inline LmiProblem load_problem(const nlohmann::json &j) {
    if (j.value("format", "") != "detc-lmi/1")
        throw ValidationError("unrecognized LMI dump format");
    LmiProblem problem;
    for (const auto &v : j.at("variables"))
        problem.vars.add(v.at("name").get<std::string>(),
                         v.at("rows").get<int>(), v.at("cols").get<int>(),
                         v.at("symmetric").get<bool>());
    for (const auto &o : j.at("objective"))
        problem.objective.emplace_back(o.at(0).get<int>(),
                                       o.at(1).get<double>());
    for (const auto &jc : j.at("constraints")) {
        MatrixExpr expr(jc.at("dim").get<int>());
        for (const auto &t : jc.at("constant"))
            expr.add_symmetric_entry(-1, t.at(0).get<int>(),
                                     t.at(1).get<int>(),
                                     t.at(2).get<double>());
        for (const auto &co : jc.at("coefficients")) {
            const int k = co.at("k").get<int>();
            for (const auto &t : co.at("entries"))
                expr.add_symmetric_entry(k, t.at(0).get<int>(),
                                         t.at(1).get<int>(),
                                         t.at(2).get<double>());
        }
        problem.constraints.push_back(
            {jc.at("name").get<std::string>(), std::move(expr)});
    }
    return problem;
}

} // namespace detc
