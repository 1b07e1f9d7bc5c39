#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Difference-algebraic representation (DAR) of a discrete-time rational
// system,
//
//   x+ = A1(x) x + A2(x) pi + A3(x) u
//    0 = O1(x) x + O2(x) pi + O3(x) u
//
// with affine-in-x matrix coefficients, a polyhedral validity domain
// D_x = { x : b_j' x <= 1 }, and an exact polytopic embedding built from
// bounded affine scheduling variables z_j(x).

namespace detc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Dimension or shape inconsistency in a model or expression.
class DimensionError : public Error {
  public:
    using Error::Error;
};

/// A state fell outside the scheduling bounds or the validity polytope.
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Singular or ill-conditioned algebraic constraint (O2 or the controller
/// fixed-point matrix).
class AlgebraicLoopError : public Error {
  public:
    using Error::Error;
};

class ValidationError : public Error {
  public:
    using Error::Error;
};

/// Affine scheduling variable z(x) = c'x + d with known range [lower, upper].
struct SchedulingVariable {
    Vector c;
    double d = 0.0;
    double lower = 0.0;
    double upper = 0.0;

    double eval(const Vector &x) const { return c.dot(x) + d; }
};

/// Matrix-valued function M(x) = base + sum_j z_j(x) * coeff_j, affine in the
/// scheduling variables.
class AffineMatrix {
  public:
    AffineMatrix() = default;
    explicit AffineMatrix(Matrix base) : base_(std::move(base)) {}

    void add_term(int scheduling_index, Matrix coeff) {
        if (coeff.rows() != base_.rows() || coeff.cols() != base_.cols())
            throw DimensionError("affine matrix term shape mismatch");
        terms_.emplace_back(scheduling_index, std::move(coeff));
    }

    Eigen::Index rows() const { return base_.rows(); }
    Eigen::Index cols() const { return base_.cols(); }
    const Matrix &base() const { return base_; }
    const std::vector<std::pair<int, Matrix>> &terms() const { return terms_; }

    /// Evaluate at a full vector of scheduling values z.
    Matrix eval(const std::vector<double> &z) const {
        Matrix out = base_;
        for (const auto &[j, coeff] : terms_) {
            if (j < 0 || j >= static_cast<int>(z.size()))
                throw DimensionError("scheduling index out of range");
            out += z[static_cast<std::size_t>(j)] * coeff;
        }
        return out;
    }

  private:
    Matrix base_;
    std::vector<std::pair<int, Matrix>> terms_;
};

/// One vertex of the polytopic embedding: all six coefficient matrices frozen
/// at a corner of the scheduling box.
struct VertexSystem {
    Matrix A1, A2, A3, O1, O2, O3;
};

/// Polytopic model: 2^r vertex systems ordered lexicographically on the
/// multi-index (i_1, ..., i_r), i_1 most significant, bit 0 -> lower bound.
struct PolytopicModel {
    int n = 0, m = 0, p = 0, r = 0;
    std::vector<VertexSystem> vertices;
};

/// Bit of vertex `v` belonging to scheduling variable `j` (0-based), under
/// the lexicographic ordering used throughout.
inline int vertex_bit(int v, int j, int r) { return (v >> (r - 1 - j)) & 1; }

struct DarModel {
    int n = 0; ///< state dimension
    int m = 0; ///< input dimension
    int p = 0; ///< nonlinearity dimension

    AffineMatrix A1, A2, A3;       // n*n, n*p, n*m
    AffineMatrix Omega1, Omega2, Omega3; // p*n, p*p, p*m

    std::vector<SchedulingVariable> scheduling;
    std::vector<Vector> domain_b; ///< half-planes b_j' x <= 1

    int r() const { return static_cast<int>(scheduling.size()); }
    int num_vertices() const { return 1 << r(); }
    int num_halfplanes() const { return static_cast<int>(domain_b.size()); }

    std::vector<double> z_of(const Vector &x) const {
        std::vector<double> z;
        z.reserve(scheduling.size());
        for (const auto &s : scheduling)
            z.push_back(s.eval(x));
        return z;
    }

    void validate() const;
};

/// Membership in the validity polytope (boundary counts as inside).
inline bool in_domain(const DarModel &model, const Vector &x) {
    for (const auto &b : model.domain_b)
        if (b.dot(x) > 1.0)
            return false;
    return true;
}

/// Convex weights alpha_i(x) of the polytopic embedding. Throws DomainError
/// when any scheduling value leaves its range; never clamps.
inline Vector weights(const DarModel &model, const Vector &x) {
    const int r = model.r();
    std::vector<double> w0(static_cast<std::size_t>(r));
    for (int j = 0; j < r; ++j) {
        const auto &s = model.scheduling[static_cast<std::size_t>(j)];
        const double z = s.eval(x);
        if (z < s.lower || z > s.upper)
            throw DomainError("scheduling variable " + std::to_string(j) +
                              " = " + std::to_string(z) + " outside [" +
                              std::to_string(s.lower) + ", " +
                              std::to_string(s.upper) + "]");
        w0[static_cast<std::size_t>(j)] = (s.upper - z) / (s.upper - s.lower);
    }
    Vector alpha(model.num_vertices());
    for (int v = 0; v < model.num_vertices(); ++v) {
        double a = 1.0;
        for (int j = 0; j < r; ++j) {
            const double w = w0[static_cast<std::size_t>(j)];
            a *= vertex_bit(v, j, r) ? (1.0 - w) : w;
        }
        alpha(v) = a;
    }
    return alpha;
}

/// Weights with out-of-range scheduling values clamped to their bounds.
/// Sets `clamped` when clamping occurred. Simulation-time fallback only.
inline Vector weights_clamped(const DarModel &model, const Vector &x,
                              bool &clamped) {
    clamped = false;
    const int r = model.r();
    std::vector<double> w0(static_cast<std::size_t>(r));
    for (int j = 0; j < r; ++j) {
        const auto &s = model.scheduling[static_cast<std::size_t>(j)];
        double z = s.eval(x);
        if (z < s.lower) {
            z = s.lower;
            clamped = true;
        } else if (z > s.upper) {
            z = s.upper;
            clamped = true;
        }
        w0[static_cast<std::size_t>(j)] = (s.upper - z) / (s.upper - s.lower);
    }
    Vector alpha(model.num_vertices());
    for (int v = 0; v < model.num_vertices(); ++v) {
        double a = 1.0;
        for (int j = 0; j < r; ++j) {
            const double w = w0[static_cast<std::size_t>(j)];
            a *= vertex_bit(v, j, r) ? (1.0 - w) : w;
        }
        alpha(v) = a;
    }
    return alpha;
}

/// Freeze every affine matrix at all 2^r corners of the scheduling box.
inline PolytopicModel vertexify(const DarModel &model) {
    PolytopicModel poly;
    poly.n = model.n;
    poly.m = model.m;
    poly.p = model.p;
    poly.r = model.r();
    const int r = poly.r;
    poly.vertices.reserve(static_cast<std::size_t>(model.num_vertices()));
    for (int v = 0; v < model.num_vertices(); ++v) {
        std::vector<double> z(static_cast<std::size_t>(r));
        for (int j = 0; j < r; ++j) {
            const auto &s = model.scheduling[static_cast<std::size_t>(j)];
            z[static_cast<std::size_t>(j)] =
                vertex_bit(v, j, r) ? s.upper : s.lower;
        }
        poly.vertices.push_back({model.A1.eval(z), model.A2.eval(z),
                                 model.A3.eval(z), model.Omega1.eval(z),
                                 model.Omega2.eval(z), model.Omega3.eval(z)});
    }
    return poly;
}

/// Convex recombination of the vertex systems with given weights.
/// Throws ValidationError when alpha is off the simplex.
inline VertexSystem reconstruct(const PolytopicModel &poly,
                                const Vector &alpha, double tol = 1e-9) {
    if (alpha.size() != static_cast<Eigen::Index>(poly.vertices.size()))
        throw DimensionError("weight vector length != vertex count");
    if (std::abs(alpha.sum() - 1.0) > tol || alpha.minCoeff() < -tol)
        throw ValidationError("weights are not on the simplex");
    VertexSystem out;
    out.A1 = Matrix::Zero(poly.n, poly.n);
    out.A2 = Matrix::Zero(poly.n, poly.p);
    out.A3 = Matrix::Zero(poly.n, poly.m);
    out.O1 = Matrix::Zero(poly.p, poly.n);
    out.O2 = Matrix::Zero(poly.p, poly.p);
    out.O3 = Matrix::Zero(poly.p, poly.m);
    for (std::size_t v = 0; v < poly.vertices.size(); ++v) {
        const double a = alpha(static_cast<Eigen::Index>(v));
        const auto &vx = poly.vertices[v];
        out.A1 += a * vx.A1;
        out.A2 += a * vx.A2;
        out.A3 += a * vx.A3;
        out.O1 += a * vx.O1;
        out.O2 += a * vx.O2;
        out.O3 += a * vx.O3;
    }
    return out;
}

/// Solve the algebraic constraint for the nonlinearity vector:
/// pi = -O2(x)^{-1} [O1(x) x + O3(x) u].
inline Vector eval_pi(const DarModel &model, const Vector &x,
                      const Vector &u) {
    const auto z = model.z_of(x);
    const Matrix O2 = model.Omega2.eval(z);
    Eigen::FullPivLU<Matrix> lu(O2);
    if (!lu.isInvertible()) {
        throw AlgebraicLoopError(
            "Omega2(x) is singular (rcond ~ " +
            std::to_string(lu.rcond()) + ")");
    }
    return lu.solve(-(model.Omega1.eval(z) * x + model.Omega3.eval(z) * u));
}

/// One step of the DAR dynamics with pi recovered from the algebraic
/// constraint.
inline Vector step_dar(const DarModel &model, const Vector &x,
                       const Vector &u) {
    const auto z = model.z_of(x);
    const Vector pi = eval_pi(model, x, u);
    return model.A1.eval(z) * x + model.A2.eval(z) * pi +
           model.A3.eval(z) * u;
}

namespace detail {

/// Enumerate the vertices of { x : b_j' x <= 1 } by intersecting all
/// n-subsets of active hyperplanes. Exponential in n; meant for the
/// desk-scale models this toolkit targets.
inline std::vector<Vector> polytope_vertices(const std::vector<Vector> &b,
                                             int n) {
    std::vector<Vector> verts;
    const int h = static_cast<int>(b.size());
    if (h < n)
        throw ValidationError("validity polytope cannot be compact: fewer "
                              "half-planes than dimensions");
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        idx[static_cast<std::size_t>(i)] = i;
    auto advance = [&]() {
        int i = n - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == h - n + i)
            --i;
        if (i < 0)
            return false;
        ++idx[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < n; ++k)
            idx[static_cast<std::size_t>(k)] =
                idx[static_cast<std::size_t>(k - 1)] + 1;
        return true;
    };
    do {
        Matrix A(n, n);
        for (int i = 0; i < n; ++i)
            A.row(i) = b[static_cast<std::size_t>(
                             idx[static_cast<std::size_t>(i)])]
                           .transpose();
        Eigen::FullPivLU<Matrix> lu(A);
        if (!lu.isInvertible())
            continue;
        const Vector v = lu.solve(Vector::Ones(n));
        bool inside = true;
        for (const auto &bj : b)
            if (bj.dot(v) > 1.0 + 1e-9) {
                inside = false;
                break;
            }
        if (inside)
            verts.push_back(v);
    } while (advance());
    return verts;
}

/// Draw a point of D_x by shooting a ray from the origin to the boundary and
/// scaling back; requires the origin interior and the domain compact.
template <class Rng>
Vector sample_domain(const DarModel &model, Rng &rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int attempt = 0; attempt < 256; ++attempt) {
        Vector dir(model.n);
        for (int i = 0; i < model.n; ++i)
            dir(i) = normal(rng);
        const double norm = dir.norm();
        if (norm < 1e-12)
            continue;
        dir /= norm;
        double max_bd = 0.0;
        for (const auto &b : model.domain_b)
            max_bd = std::max(max_bd, b.dot(dir));
        if (max_bd <= 1e-12)
            throw ValidationError(
                "validity polytope is unbounded along a sampled direction");
        const double t_boundary = 1.0 / max_bd;
        const double scale =
            std::pow(unif(rng), 1.0 / static_cast<double>(model.n));
        return scale * t_boundary * dir;
    }
    throw ValidationError("domain sampling failed to produce a direction");
}

} // namespace detail

inline void DarModel::validate() const {
    auto check_shape = [](const AffineMatrix &M, Eigen::Index rows,
                          Eigen::Index cols, const char *name) {
        if (M.rows() != rows || M.cols() != cols)
            throw DimensionError(std::string(name) + " has shape " +
                                 std::to_string(M.rows()) + "x" +
                                 std::to_string(M.cols()) + ", expected " +
                                 std::to_string(rows) + "x" +
                                 std::to_string(cols));
    };
    if (n <= 0 || m <= 0 || p <= 0)
        throw DimensionError("model dimensions must be positive");
    check_shape(A1, n, n, "A1");
    check_shape(A2, n, p, "A2");
    check_shape(A3, n, m, "A3");
    check_shape(Omega1, p, n, "Omega1");
    check_shape(Omega2, p, p, "Omega2");
    check_shape(Omega3, p, m, "Omega3");
    for (const auto &s : scheduling) {
        if (s.c.size() != n)
            throw DimensionError("scheduling coefficient length != n");
        if (!(s.lower < s.upper))
            throw ValidationError("scheduling range is degenerate");
    }
    for (const auto &b : domain_b)
        if (b.size() != n)
            throw DimensionError("domain half-plane length != n");
    if (domain_b.empty())
        throw ValidationError("validity polytope needs at least one "
                              "half-plane");

    // Origin must sit inside the scheduling box; b_j' 0 = 0 < 1 always holds.
    for (std::size_t j = 0; j < scheduling.size(); ++j) {
        const auto &s = scheduling[j];
        if (s.d < s.lower || s.d > s.upper)
            throw ValidationError("scheduling variable " + std::to_string(j) +
                                  " excludes the origin");
    }

    // Scheduling bounds must cover the whole validity polytope; affine z
    // attains its extrema at polytope vertices.
    const auto verts = detail::polytope_vertices(domain_b, n);
    if (verts.empty())
        throw ValidationError("validity polytope has no vertices; not "
                              "compact");
    for (std::size_t j = 0; j < scheduling.size(); ++j) {
        const auto &s = scheduling[j];
        const double span = s.upper - s.lower;
        for (const auto &v : verts) {
            const double z = s.eval(v);
            if (z < s.lower - 1e-9 * span || z > s.upper + 1e-9 * span)
                throw ValidationError(
                    "scheduling bounds of variable " + std::to_string(j) +
                    " do not cover the validity polytope (z = " +
                    std::to_string(z) + " at a vertex)");
        }
    }

    // O2 invertibility: exact at the 2^r scheduling corners, then a seeded
    // random sweep over D_x. The sweep is a guard, not a certificate.
    const auto poly = vertexify(*this);
    for (std::size_t v = 0; v < poly.vertices.size(); ++v) {
        Eigen::JacobiSVD<Matrix> svd(poly.vertices[v].O2);
        const double smin = svd.singularValues().minCoeff();
        const double smax = svd.singularValues().maxCoeff();
        if (smin <= 0.0 || smax / smin > 1e8)
            throw AlgebraicLoopError(
                "Omega2 ill-conditioned at scheduling vertex " +
                std::to_string(v));
    }
    std::mt19937_64 rng(0x5eed);
    for (int i = 0; i < 1000; ++i) {
        const Vector x = detail::sample_domain(*this, rng);
        const Matrix O2 = Omega2.eval(z_of(x));
        Eigen::JacobiSVD<Matrix> svd(O2);
        const double smin = svd.singularValues().minCoeff();
        const double smax = svd.singularValues().maxCoeff();
        if (smin <= 0.0 || smax / smin > 1e8)
            throw AlgebraicLoopError(
                "Omega2 ill-conditioned inside the validity domain");
    }
}

} // namespace detc
