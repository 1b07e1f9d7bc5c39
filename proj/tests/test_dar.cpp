#include "detc/dar.hpp"
#include "detc/io.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace detc;

namespace {

DarModel sec4_model() {
    return io::load_model(std::string(DETC_MODEL_DIR) + "/paper_sec4.json");
}

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

/// Direct evaluation of the benchmark difference equations (T = 0.1),
/// independent of the DAR machinery.
Vector sec4_direct_step(const Vector &x, double u) {
    const double T = 0.1;
    Vector out(2);
    out(0) = x(0) + T * x(1);
    out(1) = x(1) + T * x(0) + T * std::pow(x(0), 3) + 2 * T * x(1) +
             8 * T * std::pow(x(1), 3) + T * u;
    return out;
}

} // namespace

TEST_CASE("convex weights at box corners and midpoint") {
    const DarModel model = sec4_model();
    Vector alpha = weights(model, vec2(-2.0, -2.0));
    REQUIRE(alpha.size() == 4);
    CHECK(alpha(0) == Catch::Approx(1.0));
    CHECK(alpha.tail(3).cwiseAbs().maxCoeff() == Catch::Approx(0.0));

    alpha = weights(model, vec2(0.0, 0.0));
    for (int i = 0; i < 4; ++i)
        CHECK(alpha(i) == Catch::Approx(0.25));

    // Lexicographic multi-index: (i1, i2) = (1, 0) is position 2.
    alpha = weights(model, vec2(2.0, -2.0));
    CHECK(alpha(0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(alpha(1) == Catch::Approx(0.0).margin(1e-15));
    CHECK(alpha(2) == Catch::Approx(1.0));
    CHECK(alpha(3) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("weights refuse out-of-range states") {
    const DarModel model = sec4_model();
    CHECK_THROWS_AS(weights(model, vec2(2.5, 0.0)), DomainError);
    bool clamped = false;
    const Vector alpha = weights_clamped(model, vec2(2.5, 0.0), clamped);
    CHECK(clamped);
    CHECK(alpha.sum() == Catch::Approx(1.0));
}

TEST_CASE("convex-sum property over random domain samples") {
    const DarModel model = sec4_model();
    std::mt19937_64 rng(42);
    for (int i = 0; i < 1000; ++i) {
        const Vector x = detail::sample_domain(model, rng);
        REQUIRE(in_domain(model, x));
        const Vector alpha = weights(model, x);
        CHECK(std::abs(alpha.sum() - 1.0) <= 1e-12);
        CHECK(alpha.minCoeff() >= -1e-12);
    }
}

TEST_CASE("vertexify freezes the affine matrices at the box corners") {
    const DarModel model = sec4_model();
    const PolytopicModel poly = vertexify(model);
    REQUIRE(poly.vertices.size() == 4);

    // Vertex (1,1): both scheduling variables at their upper bound 2.
    Matrix expected(2, 2);
    expected << 0.0, 0.0, 0.2, 1.6;
    CHECK((poly.vertices[3].A2 - expected).norm() == Catch::Approx(0.0));

    // Constant matrices repeat at every vertex.
    for (const auto &v : poly.vertices) {
        CHECK((v.A1 - model.A1.base()).norm() == 0.0);
        CHECK((v.O2 - model.Omega2.base()).norm() == 0.0);
    }
}

TEST_CASE("single-variable embedding has exactly the two bound vertices") {
    DarModel model;
    model.n = 1;
    model.m = 1;
    model.p = 1;
    Matrix b1(1, 1);
    b1 << 2.0;
    model.A1 = AffineMatrix(b1);
    Matrix c1(1, 1);
    c1 << 3.0;
    model.A1.add_term(0, c1);
    model.A2 = AffineMatrix(Matrix::Zero(1, 1));
    model.A3 = AffineMatrix(Matrix::Zero(1, 1));
    model.Omega1 = AffineMatrix(Matrix::Zero(1, 1));
    model.Omega2 = AffineMatrix(-Matrix::Identity(1, 1));
    model.Omega3 = AffineMatrix(Matrix::Zero(1, 1));
    SchedulingVariable z;
    z.c = Vector::Ones(1);
    z.lower = -0.5;
    z.upper = 1.0;
    model.scheduling.push_back(z);
    model.domain_b = {Vector::Ones(1) * 2.0, Vector::Ones(1) * -2.0};

    const PolytopicModel poly = vertexify(model);
    REQUIRE(poly.vertices.size() == 2);
    CHECK(poly.vertices[0].A1(0, 0) == Catch::Approx(2.0 + (-0.5) * 3.0));
    CHECK(poly.vertices[1].A1(0, 0) == Catch::Approx(2.0 + 1.0 * 3.0));
}

TEST_CASE("pi solves the algebraic constraint") {
    const DarModel model = sec4_model();
    const Vector pi = eval_pi(model, vec2(1.0, 2.0), Vector::Zero(1));
    CHECK(pi(0) == Catch::Approx(1.0));
    CHECK(pi(1) == Catch::Approx(4.0));

    CHECK(eval_pi(model, vec2(0.0, 0.0), Vector::Zero(1)).norm() ==
          Catch::Approx(0.0));

    // Algebraic residual stays tiny over random states and inputs.
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u_dist(-10.0, 10.0);
    for (int i = 0; i < 200; ++i) {
        const Vector x = detail::sample_domain(model, rng);
        Vector u(1);
        u << u_dist(rng);
        const Vector pi_i = eval_pi(model, x, u);
        const auto z = model.z_of(x);
        const double residual = (model.Omega1.eval(z) * x +
                                 model.Omega2.eval(z) * pi_i +
                                 model.Omega3.eval(z) * u)
                                    .norm();
        CHECK(residual <= 1e-10 * (1.0 + x.norm() + u.norm()));
    }
}

TEST_CASE("linear plant has identically zero nonlinearity vector") {
    const DarModel model =
        io::load_model(std::string(DETC_MODEL_DIR) + "/linear_toy.json");
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        const Vector x = detail::sample_domain(model, rng);
        CHECK(eval_pi(model, x, Vector::Zero(1)).norm() == 0.0);
    }
}

TEST_CASE("DAR step matches hand-derived values") {
    const DarModel model = sec4_model();
    const Vector a = step_dar(model, vec2(1.0, 0.0), Vector::Zero(1));
    CHECK(a(0) == Catch::Approx(1.0));
    CHECK(a(1) == Catch::Approx(0.2));

    const Vector b = step_dar(model, vec2(0.0, 1.0), Vector::Zero(1));
    CHECK(b(0) == Catch::Approx(0.1));
    CHECK(b(1) == Catch::Approx(2.0));

    CHECK(step_dar(model, vec2(0.0, 0.0), Vector::Zero(1)).norm() == 0.0);
}

TEST_CASE("DAR equivalence with the original difference equations") {
    const DarModel model = sec4_model();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u_dist(-10.0, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const Vector x = detail::sample_domain(model, rng);
        const double u = u_dist(rng);
        Vector uv(1);
        uv << u;
        const Vector via_dar = step_dar(model, x, uv);
        const Vector direct = sec4_direct_step(x, u);
        CHECK((via_dar - direct).norm() <= 1e-10);
    }
}

TEST_CASE("domain membership is non-strict at the boundary") {
    const DarModel model = sec4_model();
    CHECK(in_domain(model, vec2(2.0, 2.0)));
    CHECK_FALSE(in_domain(model, vec2(2.01, 0.0)));
    CHECK(in_domain(model, vec2(0.0, 0.0)));
}

TEST_CASE("reconstruction reproduces the affine evaluation") {
    const DarModel model = sec4_model();
    const PolytopicModel poly = vertexify(model);

    Vector one_hot = Vector::Zero(4);
    one_hot(2) = 1.0;
    const VertexSystem vtx = reconstruct(poly, one_hot);
    CHECK((vtx.A2 - poly.vertices[2].A2).norm() == 0.0);

    const VertexSystem mid = reconstruct(poly, weights(model, vec2(0, 0)));
    CHECK(mid.A2.norm() == Catch::Approx(0.0).margin(1e-15));

    Vector bad = Vector::Constant(4, 0.3);
    CHECK_THROWS_AS(reconstruct(poly, bad), ValidationError);

    // Embedding exactness on random interior points.
    std::mt19937_64 rng(13);
    for (int i = 0; i < 300; ++i) {
        const Vector x = detail::sample_domain(model, rng);
        const VertexSystem rec = reconstruct(poly, weights(model, x));
        const auto z = model.z_of(x);
        CHECK((rec.A1 - model.A1.eval(z)).norm() <= 1e-12);
        CHECK((rec.A2 - model.A2.eval(z)).norm() <= 1e-12);
        CHECK((rec.O1 - model.Omega1.eval(z)).norm() <= 1e-12);
        CHECK((rec.O2 - model.Omega2.eval(z)).norm() <= 1e-12);
    }
}

TEST_CASE("affine matrices evaluate affinely in each scheduling variable") {
    const DarModel model = sec4_model();
    const auto z_lo = std::vector<double>{-2.0, 0.7};
    const auto z_hi = std::vector<double>{2.0, 0.7};
    const auto z_mid = std::vector<double>{0.0, 0.7};
    const Matrix avg =
        0.5 * (model.A2.eval(z_lo) + model.A2.eval(z_hi));
    CHECK((model.A2.eval(z_mid) - avg).norm() <= 1e-14);
}

TEST_CASE("model validation rejects broken inputs") {
    DarModel model = sec4_model();
    model.scheduling[0].upper = 1.0; // no longer covers the box
    CHECK_THROWS_AS(model.validate(), ValidationError);

    DarModel degenerate = sec4_model();
    degenerate.scheduling[1].lower = degenerate.scheduling[1].upper;
    CHECK_THROWS_AS(degenerate.validate(), ValidationError);

    DarModel singular = sec4_model();
    singular.Omega2 = AffineMatrix(Matrix::Zero(2, 2));
    CHECK_THROWS_AS(singular.validate(), AlgebraicLoopError);
}
