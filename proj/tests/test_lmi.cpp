#include "detc/io.hpp"
#include "detc/lmi.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace detc;

namespace {

DarModel sec4_model() {
    return io::load_model(std::string(DETC_MODEL_DIR) + "/paper_sec4.json");
}

Matrix random_matrix(int rows, int cols, std::mt19937_64 &rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix M(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            M(r, c) = dist(rng);
    return M;
}

Matrix random_symmetric(int n, std::mt19937_64 &rng) {
    const Matrix M = random_matrix(n, n, rng);
    return 0.5 * (M + M.transpose());
}

/// Straight-line dense construction of the Theorem-1 block matrix; written
/// directly from the formulas as an independent oracle for the symbolic
/// assembly.
Matrix dense_phi_theorem1(const VertexSystem &v, const Matrix &X,
                          const Matrix &Qx_t, const Matrix &Qe_t,
                          const Matrix &Qpi_t, const Matrix &Qdelta_t,
                          const Matrix &Z_t, const Matrix &Kt,
                          const Matrix &Lt) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(Z_t.rows());
    const int N = 4 * n + 3 * p;
    const int o3 = 2 * n, o4 = 2 * n + p, o5 = 2 * n + 2 * p,
              o6 = 3 * n + 2 * p, o7 = 4 * n + 2 * p;
    Matrix F = Matrix::Zero(N, N);
    auto put = [&](int r, int c, const Matrix &B) {
        F.block(r, c, B.rows(), B.cols()) = B;
        F.block(c, r, B.cols(), B.rows()) = B.transpose();
    };
    put(0, 0, (-X).eval());
    put(n, n, (-Qe_t).eval());
    const Matrix he = v.O2 * Z_t + v.O3 * Lt;
    put(o3, o3, Matrix(he + he.transpose()));
    put(o4, o4, (-Qdelta_t).eval());
    put(o5, o5, (-X).eval());
    put(o6, o6, (-Qx_t).eval());
    put(o7, o7, (-Qpi_t).eval());
    put(0, o3, Matrix(X * v.O1.transpose() +
                      Kt.transpose() * v.O3.transpose()));
    put(0, o5, Matrix(X * v.A1.transpose() +
                      Kt.transpose() * v.A3.transpose()));
    put(0, o6, X);
    put(n, o3, Matrix(Kt.transpose() * v.O3.transpose()));
    put(n, o5, Matrix(Kt.transpose() * v.A3.transpose()));
    put(o3, o4, Matrix(v.O3 * Lt));
    put(o3, o5, Matrix(Z_t.transpose() * v.A2.transpose() +
                       Lt.transpose() * v.A3.transpose()));
    put(o3, o7, Matrix(Z_t.transpose()));
    put(o4, o5, Matrix(Lt.transpose() * v.A3.transpose()));
    return F;
}

Matrix dense_phi_corollary1(const VertexSystem &v, const Matrix &X,
                            const Matrix &Qx_t, const Matrix &Qe_t,
                            const Matrix &Z_t, const Matrix &Kt) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(Z_t.rows());
    const int N = 4 * n + p;
    const int o3 = 2 * n, o4 = 2 * n + p, o5 = 3 * n + p;
    Matrix F = Matrix::Zero(N, N);
    auto put = [&](int r, int c, const Matrix &B) {
        F.block(r, c, B.rows(), B.cols()) = B;
        F.block(c, r, B.cols(), B.rows()) = B.transpose();
    };
    put(0, 0, (-X).eval());
    put(n, n, (-Qe_t).eval());
    const Matrix he = v.O2 * Z_t;
    put(o3, o3, Matrix(he + he.transpose()));
    put(o4, o4, (-X).eval());
    put(o5, o5, (-Qx_t).eval());
    put(0, o3, Matrix(X * v.O1.transpose() +
                      Kt.transpose() * v.O3.transpose()));
    put(0, o4, Matrix(X * v.A1.transpose() +
                      Kt.transpose() * v.A3.transpose()));
    put(0, o5, X);
    put(n, o3, Matrix(Kt.transpose() * v.O3.transpose()));
    put(n, o4, Matrix(Kt.transpose() * v.A3.transpose()));
    put(o3, o4, Matrix(Z_t.transpose() * v.A2.transpose()));
    return F;
}

} // namespace

TEST_CASE("relaxation classes partition the ordered vertex pairs") {
    for (int r = 1; r <= 3; ++r) {
        const auto classes = relaxation_classes(r);
        CHECK(static_cast<int>(classes.size()) ==
              static_cast<int>(std::pow(3, r)));
        std::size_t total = 0;
        for (const auto &cls : classes) {
            total += cls.members.size();
            for (const auto &[i, j] : cls.members)
                for (int q = 0; q < r; ++q)
                    CHECK(vertex_bit(i, q, r) + vertex_bit(j, q, r) ==
                          cls.pair_types[static_cast<std::size_t>(q)]);
        }
        CHECK(total == static_cast<std::size_t>(std::pow(4, r)));
    }
}

TEST_CASE("relaxation classes for r = 1 are the three bound pairs") {
    const auto classes = relaxation_classes(1);
    REQUIRE(classes.size() == 3);
    auto members_of = [&](int type) {
        for (const auto &cls : classes)
            if (cls.pair_types[0] == type)
                return cls.members;
        FAIL("missing class");
        return std::vector<std::pair<int, int>>{};
    };
    CHECK(members_of(0) == std::vector<std::pair<int, int>>{{0, 0}});
    CHECK(members_of(1) ==
          std::vector<std::pair<int, int>>{{0, 1}, {1, 0}});
    CHECK(members_of(2) == std::vector<std::pair<int, int>>{{1, 1}});
}

TEST_CASE("mixed-mixed class for r = 2 has four members") {
    const auto classes = relaxation_classes(2);
    REQUIRE(classes.size() == 9);
    for (const auto &cls : classes)
        if (cls.pair_types == std::vector<int>{1, 1})
            CHECK(cls.members.size() == 4);
}

TEST_CASE("theorem-1 blocks match a direct dense construction") {
    const DarModel model = sec4_model();
    const PolytopicModel poly = vertexify(model);
    VariableTable table;
    const DecisionVars vars =
        DecisionVars::create(table, model.n, model.m, model.p, poly.r,
                             DesignMode::op1);

    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        std::map<std::string, Matrix> values;
        values["X"] = random_symmetric(2, rng);
        values["Qx_t"] = random_symmetric(2, rng);
        values["Qe_t"] = random_symmetric(2, rng);
        values["Qpi_t"] = random_symmetric(2, rng);
        values["Qdelta_t"] = random_symmetric(2, rng);
        values["Z_t"] = random_matrix(2, 2, rng);
        for (int j = 0; j < 4; ++j) {
            values["K_t[" + std::to_string(j) + "]"] =
                random_matrix(1, 2, rng);
            values["L_t[" + std::to_string(j) + "]"] =
                random_matrix(1, 2, rng);
        }
        values["sigma"] = Matrix::Constant(1, 1, 0.0);

        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                const MatrixExpr expr =
                    build_phi_theorem1(i, j, vars, table, poly);
                const Matrix got = expr.eval(table, values);
                const Matrix want = dense_phi_theorem1(
                    poly.vertices[static_cast<std::size_t>(i)], values["X"],
                    values["Qx_t"], values["Qe_t"], values["Qpi_t"],
                    values["Qdelta_t"], values["Z_t"],
                    values["K_t[" + std::to_string(j) + "]"],
                    values["L_t[" + std::to_string(j) + "]"]);
                REQUIRE((got - want).norm() <= 1e-12 * (1.0 + want.norm()));
                REQUIRE((got - got.transpose()).norm() == 0.0);
            }
    }
}

TEST_CASE("corollary-1 blocks match a direct dense construction") {
    const DarModel model = sec4_model();
    const PolytopicModel poly = vertexify(model);
    VariableTable table;
    const DecisionVars vars =
        DecisionVars::create(table, model.n, model.m, model.p, poly.r,
                             DesignMode::op2);

    std::mt19937_64 rng(123);
    std::map<std::string, Matrix> values;
    values["X"] = random_symmetric(2, rng);
    values["Qx_t"] = random_symmetric(2, rng);
    values["Qe_t"] = random_symmetric(2, rng);
    values["Z_t"] = random_matrix(2, 2, rng);
    for (int j = 0; j < 4; ++j)
        values["K_t[" + std::to_string(j) + "]"] = random_matrix(1, 2, rng);
    values["sigma"] = Matrix::Constant(1, 1, 0.0);

    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const MatrixExpr expr =
                build_phi_corollary1(i, j, vars, table, poly);
            const Matrix got = expr.eval(table, values);
            const Matrix want = dense_phi_corollary1(
                poly.vertices[static_cast<std::size_t>(i)], values["X"],
                values["Qx_t"], values["Qe_t"], values["Z_t"],
                values["K_t[" + std::to_string(j) + "]"]);
            REQUIRE((got - want).norm() <= 1e-12 * (1.0 + want.norm()));
            REQUIRE((got - got.transpose()).norm() == 0.0);
        }
}

TEST_CASE("zero plant with identity variables degenerates as expected") {
    DarModel model;
    model.n = 2;
    model.m = 1;
    model.p = 2;
    model.A1 = AffineMatrix(Matrix::Zero(2, 2));
    model.A2 = AffineMatrix(Matrix::Zero(2, 2));
    model.A3 = AffineMatrix(Matrix::Zero(2, 1));
    model.Omega1 = AffineMatrix(Matrix::Zero(2, 2));
    model.Omega2 = AffineMatrix(Matrix::Zero(2, 2));
    model.Omega3 = AffineMatrix(Matrix::Zero(2, 1));
    SchedulingVariable z;
    z.c = Vector::Zero(2);
    z.c(0) = 1.0;
    z.lower = -1.0;
    z.upper = 1.0;
    model.scheduling.push_back(z);

    const PolytopicModel poly = vertexify(model);
    VariableTable table;
    const DecisionVars vars = DecisionVars::create(table, 2, 1, 2, 1,
                                                   DesignMode::op1);
    std::map<std::string, Matrix> values;
    values["X"] = Matrix::Identity(2, 2);
    values["Qx_t"] = Matrix::Identity(2, 2);
    values["Qe_t"] = Matrix::Identity(2, 2);
    values["Qpi_t"] = Matrix::Identity(2, 2);
    values["Qdelta_t"] = Matrix::Identity(2, 2);
    values["Z_t"] = Matrix::Identity(2, 2);
    for (int j = 0; j < 2; ++j) {
        values["K_t[" + std::to_string(j) + "]"] = Matrix::Identity(1, 2);
        values["L_t[" + std::to_string(j) + "]"] = Matrix::Identity(1, 2);
    }
    values["sigma"] = Matrix::Constant(1, 1, 0.0);

    const MatrixExpr expr = build_phi_theorem1(0, 0, vars, table, poly);
    const Matrix got = expr.eval(table, values);

    Matrix want = -Matrix::Identity(14, 14);
    want.block(4, 4, 2, 2).setZero(); // He(0) in the pi diagonal
    want.block(0, 10, 2, 2) = Matrix::Identity(2, 2); // (1,6) = X
    want.block(10, 0, 2, 2) = Matrix::Identity(2, 2);
    want.block(4, 12, 2, 2) = Matrix::Identity(2, 2); // (3,7) = Z'
    want.block(12, 4, 2, 2) = Matrix::Identity(2, 2);
    CHECK((got - want).norm() == Catch::Approx(0.0));
}

TEST_CASE("region inclusion block reproduces the 1-D boundary case") {
    VariableTable table;
    const DecisionVars vars = DecisionVars::create(table, 1, 1, 1, 1,
                                                   DesignMode::op2);
    std::map<std::string, Matrix> values;
    values["X"] = Matrix::Constant(1, 1, 4.0);
    values["Qx_t"] = Matrix::Identity(1, 1);
    values["Qe_t"] = Matrix::Identity(1, 1);
    values["Z_t"] = Matrix::Identity(1, 1);
    values["K_t[0]"] = Matrix::Zero(1, 1);
    values["K_t[1]"] = Matrix::Zero(1, 1);
    values["sigma"] = Matrix::Constant(1, 1, 0.0);

    const MatrixExpr expr =
        build_roa_lmi(Vector::Constant(1, 0.5), vars, table);
    const Matrix got = expr.eval(table, values);
    Matrix want(2, 2);
    want << 1.0, 2.0, 2.0, 4.0;
    CHECK((got - want).norm() == Catch::Approx(0.0));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(got);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-12); // boundary PSD
}

TEST_CASE("sigma coupling block hits the Schur boundary") {
    VariableTable table;
    const DecisionVars vars = DecisionVars::create(table, 2, 1, 2, 1,
                                                   DesignMode::op2);
    std::map<std::string, Matrix> values;
    values["X"] = 2.0 * Matrix::Identity(2, 2);
    values["Qx_t"] = Matrix::Identity(2, 2);
    values["Qe_t"] = Matrix::Identity(2, 2);
    values["Z_t"] = Matrix::Identity(2, 2);
    values["K_t[0]"] = Matrix::Zero(1, 2);
    values["K_t[1]"] = Matrix::Zero(1, 2);
    values["sigma"] = Matrix::Constant(1, 1, 0.5);

    const MatrixExpr expr = build_sigma_lmi(vars, table);
    const Matrix got = expr.eval(table, values);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(got);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
    CHECK(eig.eigenvalues().minCoeff() <= 1e-12);

    // sigma below lambda_max(X^{-1}) violates the coupling.
    values["sigma"] = Matrix::Constant(1, 1, 0.4);
    Eigen::SelfAdjointEigenSolver<Matrix> eig2(expr.eval(table, values));
    CHECK(eig2.eigenvalues().minCoeff() < -1e-6);
}

TEST_CASE("trace budget counts the right blocks") {
    VariableTable table;
    const DecisionVars vars = DecisionVars::create(table, 2, 1, 2, 2,
                                                   DesignMode::op1);
    std::map<std::string, Matrix> values;
    values["X"] = Matrix::Identity(2, 2);
    values["Qx_t"] = Matrix::Identity(2, 2);
    values["Qe_t"] = Matrix::Identity(2, 2);
    values["Qpi_t"] = Matrix::Identity(2, 2);
    values["Qdelta_t"] = Matrix::Identity(2, 2);
    values["Z_t"] = Matrix::Identity(2, 2);
    for (int j = 0; j < 4; ++j) {
        values["K_t[" + std::to_string(j) + "]"] = Matrix::Zero(1, 2);
        values["L_t[" + std::to_string(j) + "]"] = Matrix::Zero(1, 2);
    }
    values["sigma"] = Matrix::Constant(1, 1, 0.0);

    const MatrixExpr op1 = build_trace_constraint(vars, table, 10.0);
    CHECK(op1.eval(table, values)(0, 0) ==
          Catch::Approx(10.0 - 8.0).epsilon(1e-7)); // all four traces = 8

    VariableTable table2;
    const DecisionVars vars2 = DecisionVars::create(table2, 2, 1, 2, 2,
                                                    DesignMode::op2);
    std::map<std::string, Matrix> values2;
    values2["X"] = Matrix::Identity(2, 2);
    values2["Qx_t"] = Matrix::Identity(2, 2);
    values2["Qe_t"] = Matrix::Identity(2, 2);
    values2["Z_t"] = Matrix::Identity(2, 2);
    for (int j = 0; j < 4; ++j)
        values2["K_t[" + std::to_string(j) + "]"] = Matrix::Zero(1, 2);
    values2["sigma"] = Matrix::Constant(1, 1, 0.0);
    const MatrixExpr op2 = build_trace_constraint(vars2, table2, 10.0);
    CHECK(op2.eval(table2, values2)(0, 0) ==
          Catch::Approx(10.0 - 4.0).epsilon(1e-7)); // Qpi/Qdelta ignored

    CHECK_THROWS_AS(build_trace_constraint(vars, table, -1.0),
                    ValidationError);
}

TEST_CASE("assembled problem has the expected structure") {
    const DarModel model = sec4_model();
    const PolytopicModel poly = vertexify(model);

    AssemblyOptions opts;
    opts.mode = DesignMode::op1;
    opts.epsilon = 1274.3;
    const AssembledProblem ap = assemble(model, poly, opts);

    // 9 relaxation sums + 4 region half-planes + sigma + trace + 5 floors.
    CHECK(ap.problem.constraints.size() == 9 + 4 + 1 + 1 + 5);
    CHECK(ap.problem.vars.total() == 36);
    REQUIRE(ap.problem.objective.size() == 1);
    CHECK(ap.problem.objective[0].first ==
          ap.problem.vars.block(ap.vars.sigma).offset);

    AssemblyOptions opts2 = opts;
    opts2.mode = DesignMode::op2;
    const AssembledProblem ap2 = assemble(model, poly, opts2);
    CHECK(ap2.problem.constraints.size() == 9 + 4 + 1 + 1 + 3);
    // no L, Qpi, Qdelta blocks at all
    CHECK_THROWS_AS(ap2.problem.vars.find("L_t[0]"), ValidationError);
    CHECK_THROWS_AS(ap2.problem.vars.find("Qpi_t"), ValidationError);

    // every constraint is structurally symmetric at random variable values
    std::mt19937_64 rng(5);
    Vector y(ap.problem.vars.total());
    std::normal_distribution<double> dist;
    for (int i = 0; i < y.size(); ++i)
        y(i) = dist(rng);
    for (const auto &c : ap.problem.constraints) {
        const Matrix F = c.expr.eval(y);
        CHECK((F - F.transpose()).norm() == 0.0);
    }
}

TEST_CASE("r = 1 model yields three relaxation constraints") {
    const DarModel model =
        io::load_model(std::string(DETC_MODEL_DIR) + "/linear_toy.json");
    const PolytopicModel poly = vertexify(model);
    AssemblyOptions opts;
    opts.mode = DesignMode::op2;
    const AssembledProblem ap = assemble(model, poly, opts);
    int relax = 0;
    for (const auto &c : ap.problem.constraints)
        if (c.name.rfind("relax", 0) == 0)
            ++relax;
    CHECK(relax == 3);
}

TEST_CASE("variable table pack/unpack round trip") {
    VariableTable table;
    const int sym = table.add("S", 3, 3, true);
    const int rect = table.add("R", 2, 3, false);
    std::mt19937_64 rng(17);
    const Matrix S = random_symmetric(3, rng);
    const Matrix R = random_matrix(2, 3, rng);
    CHECK((table.unpack(sym, table.pack(sym, S)) - S).norm() <= 1e-15);
    CHECK((table.unpack(rect, table.pack(rect, R)) - R).norm() == 0.0);
    CHECK(table.total() == 6 + 6);
    CHECK_THROWS_AS(table.add("S", 2, 2, true), ValidationError);
}
