#include "detc/io.hpp"
#include "detc/sdp.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace detc;

namespace {

/// min sigma s.t. [sigma, 1; 1, 2] >= 0; optimum sigma* = 1/2 from the
/// determinant condition 2 sigma - 1 >= 0.
LmiProblem schur_toy() {
    LmiProblem prob;
    const int sigma = prob.vars.add("sigma", 1, 1, true);
    MatrixExpr F(2);
    Matrix C(2, 2);
    C << 0.0, 1.0, 1.0, 2.0;
    F.add_constant(0, 0, C);
    F.add_scalar_var(prob.vars, sigma, Matrix::Identity(1, 1), 0, 0);
    prob.constraints.push_back({"schur", std::move(F)});
    prob.objective.emplace_back(prob.vars.block(sigma).offset, 1.0);
    return prob;
}

} // namespace

TEST_CASE("scalar Schur toy reaches its analytic optimum") {
    const LmiProblem prob = schur_toy();
    const Solution sol = solve(prob);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.objective_value == Catch::Approx(0.5).margin(1e-6));
    CHECK(sol.values.at("sigma")(0, 0) == Catch::Approx(0.5).margin(1e-6));
    CHECK(sol.max_constraint_violation <= 1e-7);
}

TEST_CASE("negative identity constraint is certified infeasible") {
    LmiProblem prob;
    prob.vars.add("y", 1, 1, true);
    MatrixExpr F(2);
    F.add_constant(0, 0, (-Matrix::Identity(2, 2)).eval());
    prob.constraints.push_back({"neg", std::move(F)});
    const Solution sol = solve(prob);
    CHECK(sol.status == SolveStatus::infeasible);
}

TEST_CASE("empty problem is trivially optimal at zero") {
    LmiProblem prob;
    prob.vars.add("y", 2, 2, true);
    prob.objective.emplace_back(0, 0.0);
    const Solution sol = solve(prob);
    CHECK(sol.status == SolveStatus::optimal);
    CHECK(sol.objective_value == 0.0);
    CHECK(sol.values.at("y").norm() == 0.0);
}

TEST_CASE("verify recomputes violations from scratch") {
    const LmiProblem prob = schur_toy();

    std::map<std::string, Matrix> good{{"sigma", Matrix::Constant(1, 1, 1.0)}};
    CHECK(verify(prob, good) == 0.0);

    // sigma = 0 gives [0, 1; 1, 2] with min eigenvalue 1 - sqrt(2).
    std::map<std::string, Matrix> bad{{"sigma", Matrix::Constant(1, 1, 0.0)}};
    CHECK(verify(prob, bad) ==
          Catch::Approx(std::sqrt(2.0) - 1.0).margin(1e-12));

    std::map<std::string, Matrix> missing;
    CHECK_THROWS_AS(verify(prob, missing), ValidationError);
}

TEST_CASE("solve is deterministic") {
    const LmiProblem prob = schur_toy();
    const Solution a = solve(prob);
    const Solution b = solve(prob);
    CHECK(a.status == b.status);
    CHECK(a.objective_value == Catch::Approx(b.objective_value).margin(1e-9));
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("oversized problems are rejected by the guardrail") {
    LmiProblem prob;
    prob.vars.add("huge", 400, 400, false); // 160k scalars
    CHECK_THROWS_AS(solve(prob), ValidationError);
}

TEST_CASE("unbounded objective is a solver failure, not a solution") {
    LmiProblem prob;
    const int y = prob.vars.add("y", 1, 1, true);
    // y >= 0 with objective -y: unbounded below.
    MatrixExpr F(1);
    F.add_scalar_var(prob.vars, y, Matrix::Identity(1, 1), 0, 0);
    prob.constraints.push_back({"nonneg", std::move(F)});
    prob.objective.emplace_back(prob.vars.block(y).offset, -1.0);
    const Solution sol = solve(prob);
    CHECK(sol.status == SolveStatus::solver_failure);
}

TEST_CASE("canonical dump/load round trip preserves the solution") {
    const LmiProblem prob = schur_toy();
    const nlohmann::json dumped = dump_problem(prob);
    const LmiProblem reloaded = load_problem(dumped);

    CHECK(dump_problem(reloaded) == dumped);

    const Solution a = solve(prob);
    const Solution b = solve(reloaded);
    REQUIRE(a.status == b.status);
    CHECK(a.objective_value == Catch::Approx(b.objective_value).margin(1e-12));
}

TEST_CASE("mixed cone problem: nonnegative scalar rows next to PSD blocks") {
    LmiProblem prob;
    const int s = prob.vars.add("S", 2, 2, true);
    // S - I >= 0 and 3 - tr(S) >= 0 force eigenvalues into [1, 2].
    MatrixExpr psd(2);
    psd.add_var_product(prob.vars, s, false, Matrix::Identity(2, 2),
                        Matrix::Identity(2, 2), 0, 0);
    psd.add_constant(0, 0, (-Matrix::Identity(2, 2)).eval());
    prob.constraints.push_back({"floor", std::move(psd)});

    MatrixExpr tr(1);
    tr.add_constant(0, 0, Matrix::Constant(1, 1, 3.0));
    for (int i = 0; i < 2; ++i) {
        Matrix l = Matrix::Zero(1, 2), r = Matrix::Zero(2, 1);
        l(0, i) = 1.0;
        r(i, 0) = 1.0;
        tr.add_var_product(prob.vars, s, false, l, r, 0, 0, -1.0);
    }
    prob.constraints.push_back({"budget", std::move(tr)});

    // minimize S_11
    prob.objective.emplace_back(prob.vars.block(s).offset, 1.0);
    const Solution sol = solve(prob);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.values.at("S")(0, 0) == Catch::Approx(1.0).margin(1e-6));
    CHECK(sol.max_constraint_violation <= 1e-7);
}
