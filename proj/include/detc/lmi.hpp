#pragma once

#include "detc/dar.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

// Symbolic assembly of the co-design matrix inequalities. Decision blocks
// live in a VariableTable that fixes the scalarization used everywhere:
// symmetric blocks are half-vectorized (upper triangle stacked columnwise,
// off-diagonal entries scaled by sqrt(2)), rectangular blocks are stacked
// columnwise.

namespace detc {

inline constexpr double kSqrt2 = 1.4142135623730951;

struct VarBlock {
    std::string name;
    int rows = 0, cols = 0;
    bool symmetric = false;
    int offset = 0; ///< first scalar index
    int size = 0;   ///< scalar count
};

class VariableTable {
  public:
    int add(const std::string &name, int rows, int cols, bool symmetric) {
        if (symmetric && rows != cols)
            throw DimensionError("symmetric block must be square: " + name);
        for (const auto &b : blocks_)
            if (b.name == name)
                throw ValidationError("duplicate variable block: " + name);
        VarBlock b;
        b.name = name;
        b.rows = rows;
        b.cols = cols;
        b.symmetric = symmetric;
        b.offset = total_;
        b.size = symmetric ? rows * (rows + 1) / 2 : rows * cols;
        total_ += b.size;
        blocks_.push_back(b);
        return static_cast<int>(blocks_.size()) - 1;
    }

    const VarBlock &block(int id) const {
        return blocks_.at(static_cast<std::size_t>(id));
    }
    const std::vector<VarBlock> &blocks() const { return blocks_; }
    int total() const { return total_; }

    int find(const std::string &name) const {
        for (std::size_t i = 0; i < blocks_.size(); ++i)
            if (blocks_[i].name == name)
                return static_cast<int>(i);
        throw ValidationError("unknown variable block: " + name);
    }

    /// Scalarize one block value.
    Vector pack(int id, const Matrix &value) const {
        const auto &b = block(id);
        if (value.rows() != b.rows || value.cols() != b.cols)
            throw DimensionError("value shape mismatch for block " + b.name);
        Vector y(b.size);
        if (b.symmetric) {
            int t = 0;
            for (int c = 0; c < b.cols; ++c)
                for (int r = 0; r <= c; ++r)
                    y(t++) = (r == c) ? value(r, c)
                                      : kSqrt2 * 0.5 *
                                            (value(r, c) + value(c, r));
        } else {
            int t = 0;
            for (int c = 0; c < b.cols; ++c)
                for (int r = 0; r < b.rows; ++r)
                    y(t++) = value(r, c);
        }
        return y;
    }

    Matrix unpack(int id, const Eigen::Ref<const Vector> &y) const {
        const auto &b = block(id);
        Matrix value(b.rows, b.cols);
        if (b.symmetric) {
            int t = 0;
            for (int c = 0; c < b.cols; ++c)
                for (int r = 0; r <= c; ++r) {
                    const double v = y(t++);
                    if (r == c)
                        value(r, c) = v;
                    else {
                        value(r, c) = v / kSqrt2;
                        value(c, r) = v / kSqrt2;
                    }
                }
        } else {
            int t = 0;
            for (int c = 0; c < b.cols; ++c)
                for (int r = 0; r < b.rows; ++r)
                    value(r, c) = y(t++);
        }
        return value;
    }

    Vector pack_all(const std::map<std::string, Matrix> &values) const {
        Vector y = Vector::Zero(total_);
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            const auto it = values.find(blocks_[i].name);
            if (it == values.end())
                throw ValidationError("missing value for block " +
                                      blocks_[i].name);
            y.segment(blocks_[i].offset, blocks_[i].size) =
                pack(static_cast<int>(i), it->second);
        }
        return y;
    }

    std::map<std::string, Matrix> unpack_all(const Vector &y) const {
        std::map<std::string, Matrix> values;
        for (std::size_t i = 0; i < blocks_.size(); ++i)
            values[blocks_[i].name] = unpack(
                static_cast<int>(i),
                y.segment(blocks_[i].offset, blocks_[i].size));
        return values;
    }

    /// Scalar basis matrix of unknown `t` within block `id`.
    Matrix basis(int id, int t) const {
        const auto &b = block(id);
        Matrix E = Matrix::Zero(b.rows, b.cols);
        if (b.symmetric) {
            int k = 0;
            for (int c = 0; c < b.cols; ++c)
                for (int r = 0; r <= c; ++r, ++k)
                    if (k == t) {
                        if (r == c)
                            E(r, c) = 1.0;
                        else {
                            E(r, c) = 1.0 / kSqrt2;
                            E(c, r) = 1.0 / kSqrt2;
                        }
                        return E;
                    }
        } else {
            int k = 0;
            for (int c = 0; c < b.cols; ++c)
                for (int r = 0; r < b.rows; ++r, ++k)
                    if (k == t) {
                        E(r, c) = 1.0;
                        return E;
                    }
        }
        throw DimensionError("scalar index out of range in block " + b.name);
    }

  private:
    std::vector<VarBlock> blocks_;
    int total_ = 0;
};

/// Affine symmetric matrix expression F(y) = C + sum_k y_k G_k.
class MatrixExpr {
  public:
    explicit MatrixExpr(int dim)
        : dim_(dim), constant_(Matrix::Zero(dim, dim)) {}

    int dim() const { return dim_; }
    const Matrix &constant() const { return constant_; }
    const std::map<int, Matrix> &coefficients() const { return coeffs_; }

    void add_constant(int r0, int c0, const Matrix &M) {
        constant_.block(r0, c0, M.rows(), M.cols()) += M;
    }

    /// += M at (r0,c0) and M' at (c0,r0).
    void add_constant_mirrored(int r0, int c0, const Matrix &M) {
        constant_.block(r0, c0, M.rows(), M.cols()) += M;
        constant_.block(c0, r0, M.cols(), M.rows()) += M.transpose();
    }

    /// += scale * L * V * R at (r0,c0), V the (optionally transposed) block.
    void add_var_product(const VariableTable &table, int block_id,
                         bool transpose_var, const Matrix &L, const Matrix &R,
                         int r0, int c0, double scale = 1.0) {
        const auto &b = table.block(block_id);
        for (int t = 0; t < b.size; ++t) {
            const Matrix B = table.basis(block_id, t);
            const Matrix contrib =
                scale * L * (transpose_var ? B.transpose() : B) * R;
            coeff(b.offset + t)
                .block(r0, c0, contrib.rows(), contrib.cols()) += contrib;
        }
    }

    /// Same contribution placed at (r0,c0) plus its exact transpose at
    /// (c0,r0). With r0 == c0 this yields He(L V R).
    void add_var_product_mirrored(const VariableTable &table, int block_id,
                                  bool transpose_var, const Matrix &L,
                                  const Matrix &R, int r0, int c0,
                                  double scale = 1.0) {
        const auto &b = table.block(block_id);
        for (int t = 0; t < b.size; ++t) {
            const Matrix B = table.basis(block_id, t);
            const Matrix contrib =
                scale * L * (transpose_var ? B.transpose() : B) * R;
            Matrix &G = coeff(b.offset + t);
            G.block(r0, c0, contrib.rows(), contrib.cols()) += contrib;
            G.block(c0, r0, contrib.cols(), contrib.rows()) +=
                contrib.transpose();
        }
    }

    /// += scale * y_block * C at (r0,c0) for a 1x1 block.
    void add_scalar_var(const VariableTable &table, int block_id,
                        const Matrix &C, int r0, int c0, double scale = 1.0) {
        const auto &b = table.block(block_id);
        if (b.size != 1)
            throw DimensionError("add_scalar_var expects a 1x1 block");
        coeff(b.offset).block(r0, c0, C.rows(), C.cols()) += scale * C;
    }

    /// Set entry (r,c) and its mirror (c,r) of the constant (k < 0) or of
    /// coefficient k. Deserialization hook for the canonical dump format.
    void add_symmetric_entry(int k, int r, int c, double v) {
        Matrix &M = k < 0 ? constant_ : coeff(k);
        M(r, c) += v;
        if (r != c)
            M(c, r) += v;
    }

    /// += scale * other (same dimension).
    void add_scaled(const MatrixExpr &other, double scale) {
        if (other.dim_ != dim_)
            throw DimensionError("expression dimension mismatch");
        constant_ += scale * other.constant_;
        for (const auto &[k, G] : other.coeffs_)
            coeff(k) += scale * G;
    }

    Matrix eval(const Vector &y) const {
        Matrix out = constant_;
        for (const auto &[k, G] : coeffs_)
            out += y(k) * G;
        return out;
    }

    Matrix eval(const VariableTable &table,
                const std::map<std::string, Matrix> &values) const {
        return eval(table.pack_all(values));
    }

  private:
    Matrix &coeff(int k) {
        auto it = coeffs_.find(k);
        if (it == coeffs_.end())
            it = coeffs_.emplace(k, Matrix::Zero(dim_, dim_)).first;
        return it->second;
    }

    int dim_;
    Matrix constant_;
    std::map<int, Matrix> coeffs_;
};

/// One constraint F(y) >= 0 with a diagnostic name.
struct LmiConstraint {
    std::string name;
    MatrixExpr expr;
};

/// Assembled problem: minimize objective . y subject to every constraint
/// expression being positive semidefinite.
struct LmiProblem {
    VariableTable vars;
    std::vector<LmiConstraint> constraints;
    std::vector<std::pair<int, double>> objective; ///< (scalar index, coeff)
};

// ---------------------------------------------------------------------------
// Double convex-sum relaxation classes.
//
// alpha_i(x) alpha_j(x) = prod_q w^q_{i_q} w^q_{j_q}: the monomial is fixed
// by the unordered bit pair {i_q, j_q} at every position, so grouping the
// ordered pairs by those per-position pairs and requiring each group sum to
// be negative definite covers the full double sum.
// ---------------------------------------------------------------------------

struct RelaxationClass {
    std::vector<int> pair_types; ///< per position: 0 -> {0,0}, 1 -> {0,1}, 2 -> {1,1}
    std::vector<std::pair<int, int>> members; ///< ordered vertex pairs (i, j)
};

inline std::vector<RelaxationClass> relaxation_classes(int r) {
    if (r < 1)
        throw ValidationError("relaxation classes need r >= 1");
    const int nv = 1 << r;
    std::map<std::vector<int>, std::size_t> index;
    std::vector<RelaxationClass> classes;
    for (int i = 0; i < nv; ++i)
        for (int j = 0; j < nv; ++j) {
            std::vector<int> key(static_cast<std::size_t>(r));
            for (int q = 0; q < r; ++q)
                key[static_cast<std::size_t>(q)] =
                    vertex_bit(i, q, r) + vertex_bit(j, q, r);
            auto it = index.find(key);
            if (it == index.end()) {
                it = index.emplace(key, classes.size()).first;
                classes.push_back({key, {}});
            }
            classes[it->second].members.emplace_back(i, j);
        }
    return classes;
}

// ---------------------------------------------------------------------------
// Decision blocks of the co-design problem.
// ---------------------------------------------------------------------------

enum class DesignMode { op1, op2 };

struct DecisionVars {
    DesignMode mode = DesignMode::op1;
    int n = 0, m = 0, p = 0, r = 0;
    int X = -1;
    int Qx_t = -1, Qe_t = -1;
    int Qpi_t = -1, Qdelta_t = -1; // op1 only
    int Z_t = -1;
    std::vector<int> K_t; ///< one m x n block per vertex
    std::vector<int> L_t; ///< one m x p block per vertex, op1 only
    int sigma = -1;

    static DecisionVars create(VariableTable &table, int n, int m, int p,
                               int r, DesignMode mode) {
        DecisionVars v;
        v.mode = mode;
        v.n = n;
        v.m = m;
        v.p = p;
        v.r = r;
        v.X = table.add("X", n, n, true);
        v.Qx_t = table.add("Qx_t", n, n, true);
        v.Qe_t = table.add("Qe_t", n, n, true);
        if (mode == DesignMode::op1) {
            v.Qpi_t = table.add("Qpi_t", p, p, true);
            v.Qdelta_t = table.add("Qdelta_t", p, p, true);
        }
        v.Z_t = table.add("Z_t", p, p, false);
        const int nv = 1 << r;
        for (int j = 0; j < nv; ++j)
            v.K_t.push_back(table.add("K_t[" + std::to_string(j) + "]", m, n,
                                      false));
        if (mode == DesignMode::op1)
            for (int j = 0; j < nv; ++j)
                v.L_t.push_back(table.add("L_t[" + std::to_string(j) + "]", m,
                                          p, false));
        v.sigma = table.add("sigma", 1, 1, true);
        return v;
    }
};

// ---------------------------------------------------------------------------
// Block matrices.
// ---------------------------------------------------------------------------

/// Theorem-1 block matrix Phi_ij, block layout (n, n, p, p, n, n, p):
/// rows for (x, e, pi, delta, aux-P, aux-Qx, aux-Qpi). Plant matrices come
/// from vertex i, gain blocks from vertex j.
inline MatrixExpr build_phi_theorem1(int i, int j, const DecisionVars &vars,
                                     const VariableTable &table,
                                     const PolytopicModel &poly) {
    if (vars.mode != DesignMode::op1)
        throw ValidationError("Theorem-1 blocks need op1 decision variables");
    const int n = poly.n, p = poly.p;
    const auto &vx = poly.vertices.at(static_cast<std::size_t>(i));
    const int Kj = vars.K_t.at(static_cast<std::size_t>(j));
    const int Lj = vars.L_t.at(static_cast<std::size_t>(j));

    const int o1 = 0, o2 = n, o3 = 2 * n, o4 = 2 * n + p, o5 = 2 * n + 2 * p,
              o6 = 3 * n + 2 * p, o7 = 4 * n + 2 * p;
    MatrixExpr F(4 * n + 3 * p);

    const Matrix In = Matrix::Identity(n, n);
    const Matrix Ip = Matrix::Identity(p, p);

    // Diagonal blocks.
    F.add_var_product(table, vars.X, false, In, In, o1, o1, -1.0);
    F.add_var_product(table, vars.Qe_t, false, In, In, o2, o2, -1.0);
    F.add_var_product_mirrored(table, vars.Z_t, false, vx.O2, Ip, o3, o3);
    F.add_var_product_mirrored(table, Lj, false, vx.O3, Ip, o3, o3);
    F.add_var_product(table, vars.Qdelta_t, false, Ip, Ip, o4, o4, -1.0);
    F.add_var_product(table, vars.X, false, In, In, o5, o5, -1.0);
    F.add_var_product(table, vars.Qx_t, false, In, In, o6, o6, -1.0);
    F.add_var_product(table, vars.Qpi_t, false, Ip, Ip, o7, o7, -1.0);

    // (1,3) = X O1' + K' O3'
    F.add_var_product_mirrored(table, vars.X, false, In, vx.O1.transpose(),
                               o1, o3);
    F.add_var_product_mirrored(table, Kj, true, In, vx.O3.transpose(), o1,
                               o3);
    // (1,5) = X A1' + K' A3'
    F.add_var_product_mirrored(table, vars.X, false, In, vx.A1.transpose(),
                               o1, o5);
    F.add_var_product_mirrored(table, Kj, true, In, vx.A3.transpose(), o1,
                               o5);
    // (1,6) = X
    F.add_var_product_mirrored(table, vars.X, false, In, In, o1, o6);
    // (2,3) = K' O3'
    F.add_var_product_mirrored(table, Kj, true, In, vx.O3.transpose(), o2,
                               o3);
    // (2,5) = K' A3'
    F.add_var_product_mirrored(table, Kj, true, In, vx.A3.transpose(), o2,
                               o5);
    // (3,4) = O3 L
    F.add_var_product_mirrored(table, Lj, false, vx.O3, Ip, o3, o4);
    // (3,5) = Z' A2' + L' A3'
    F.add_var_product_mirrored(table, vars.Z_t, true, Ip, vx.A2.transpose(),
                               o3, o5);
    F.add_var_product_mirrored(table, Lj, true, Ip, vx.A3.transpose(), o3,
                               o5);
    // (3,7) = Z'
    F.add_var_product_mirrored(table, vars.Z_t, true, Ip, Ip, o3, o7);
    // (4,5) = L' A3'
    F.add_var_product_mirrored(table, Lj, true, Ip, vx.A3.transpose(), o4,
                               o5);
    return F;
}

/// Corollary-1 block matrix, layout (n, n, p, n, n); no L, Qpi, Qdelta.
inline MatrixExpr build_phi_corollary1(int i, int j, const DecisionVars &vars,
                                       const VariableTable &table,
                                       const PolytopicModel &poly) {
    const int n = poly.n, p = poly.p;
    const auto &vx = poly.vertices.at(static_cast<std::size_t>(i));
    const int Kj = vars.K_t.at(static_cast<std::size_t>(j));

    const int o1 = 0, o2 = n, o3 = 2 * n, o4 = 2 * n + p, o5 = 3 * n + p;
    MatrixExpr F(4 * n + p);

    const Matrix In = Matrix::Identity(n, n);
    const Matrix Ip = Matrix::Identity(p, p);

    F.add_var_product(table, vars.X, false, In, In, o1, o1, -1.0);
    F.add_var_product(table, vars.Qe_t, false, In, In, o2, o2, -1.0);
    F.add_var_product_mirrored(table, vars.Z_t, false, vx.O2, Ip, o3, o3);
    F.add_var_product(table, vars.X, false, In, In, o4, o4, -1.0);
    F.add_var_product(table, vars.Qx_t, false, In, In, o5, o5, -1.0);

    // (1,3) = X O1' + K' O3'
    F.add_var_product_mirrored(table, vars.X, false, In, vx.O1.transpose(),
                               o1, o3);
    F.add_var_product_mirrored(table, Kj, true, In, vx.O3.transpose(), o1,
                               o3);
    // (1,4) = X A1' + K' A3'
    F.add_var_product_mirrored(table, vars.X, false, In, vx.A1.transpose(),
                               o1, o4);
    F.add_var_product_mirrored(table, Kj, true, In, vx.A3.transpose(), o1,
                               o4);
    // (1,5) = X
    F.add_var_product_mirrored(table, vars.X, false, In, In, o1, o5);
    // (2,3) = K' O3'
    F.add_var_product_mirrored(table, Kj, true, In, vx.O3.transpose(), o2,
                               o3);
    // (2,4) = K' A3'
    F.add_var_product_mirrored(table, Kj, true, In, vx.A3.transpose(), o2,
                               o4);
    // (3,4) = Z' A2'
    F.add_var_product_mirrored(table, vars.Z_t, true, Ip, vx.A2.transpose(),
                               o3, o4);
    return F;
}

/// Region-of-attraction inclusion block [1, b'X; X b, X] >= 0.
inline MatrixExpr build_roa_lmi(const Vector &b, const DecisionVars &vars,
                                const VariableTable &table) {
    const int n = static_cast<int>(b.size());
    MatrixExpr F(1 + n);
    F.add_constant(0, 0, Matrix::Constant(1, 1, 1.0));
    F.add_var_product_mirrored(table, vars.X, false, b.transpose(),
                               Matrix::Identity(n, n), 0, 1);
    F.add_var_product(table, vars.X, false, Matrix::Identity(n, n),
                      Matrix::Identity(n, n), 1, 1);
    return F;
}

/// Coupling block [sigma I, I; I, X] >= 0, i.e. X^{-1} <= sigma I.
inline MatrixExpr build_sigma_lmi(const DecisionVars &vars,
                                  const VariableTable &table) {
    const int n = vars.n;
    MatrixExpr F(2 * n);
    const Matrix In = Matrix::Identity(n, n);
    F.add_scalar_var(table, vars.sigma, In, 0, 0);
    F.add_constant_mirrored(0, n, In);
    F.add_var_product(table, vars.X, false, In, In, n, n);
    return F;
}

/// Scalar budget eps' - tr(Qx_t + Qe_t) [- tr(Qpi_t + Qdelta_t)] >= 0 with
/// eps' = eps (1 - 1e-9) standing in for the strict inequality.
inline MatrixExpr build_trace_constraint(const DecisionVars &vars,
                                         const VariableTable &table,
                                         double epsilon) {
    if (epsilon <= 0.0)
        throw ValidationError("trace budget must be positive");
    MatrixExpr F(1);
    F.add_constant(0, 0, Matrix::Constant(1, 1, epsilon * (1.0 - 1e-9)));
    auto subtract_trace = [&](int block_id, int dim) {
        for (int i = 0; i < dim; ++i) {
            Matrix sel_l = Matrix::Zero(1, dim);
            Matrix sel_r = Matrix::Zero(dim, 1);
            sel_l(0, i) = 1.0;
            sel_r(i, 0) = 1.0;
            F.add_var_product(table, block_id, false, sel_l, sel_r, 0, 0,
                              -1.0);
        }
    };
    subtract_trace(vars.Qx_t, vars.n);
    subtract_trace(vars.Qe_t, vars.n);
    if (vars.mode == DesignMode::op1) {
        subtract_trace(vars.Qpi_t, vars.p);
        subtract_trace(vars.Qdelta_t, vars.p);
    }
    return F;
}

// ---------------------------------------------------------------------------
// Full problem assembly.
// ---------------------------------------------------------------------------

struct AssemblyOptions {
    DesignMode mode = DesignMode::op1;
    double epsilon = 1e3;
    double delta_pd = 1e-6; ///< positive-definiteness floor
};

/// Margin converting strict "< 0" into "<= -delta I", scaled by the plant.
inline double strictness_margin(const PolytopicModel &poly) {
    double max_norm = 0.0;
    for (const auto &v : poly.vertices)
        for (const Matrix *M :
             {&v.A1, &v.A2, &v.A3, &v.O1, &v.O2, &v.O3})
            max_norm = std::max(max_norm, M->norm());
    return 1e-7 * (1.0 + max_norm);
}

struct AssembledProblem {
    LmiProblem problem;
    DecisionVars vars;
    double delta_strict = 0.0;
};

/// Build the complete OP1/OP2 feasibility-optimization problem: relaxation
/// class sums, region inclusion, sigma coupling, trace budget, positivity
/// floors, objective min sigma.
inline AssembledProblem assemble(const DarModel &model,
                                 const PolytopicModel &poly,
                                 const AssemblyOptions &opts) {
    AssembledProblem out;
    LmiProblem &prob = out.problem;
    out.vars = DecisionVars::create(prob.vars, model.n, model.m, model.p,
                                    poly.r, opts.mode);
    const DecisionVars &vars = out.vars;
    const double delta_strict = strictness_margin(poly);
    out.delta_strict = delta_strict;

    // Relaxation: for every class, -(sum of Phi over members) - delta I >= 0.
    const int phi_dim = opts.mode == DesignMode::op1
                            ? 4 * model.n + 3 * model.p
                            : 4 * model.n + model.p;
    const auto classes = relaxation_classes(poly.r);
    for (std::size_t c = 0; c < classes.size(); ++c) {
        MatrixExpr sum(phi_dim);
        for (const auto &[i, j] : classes[c].members) {
            const MatrixExpr phi =
                opts.mode == DesignMode::op1
                    ? build_phi_theorem1(i, j, vars, prob.vars, poly)
                    : build_phi_corollary1(i, j, vars, prob.vars, poly);
            sum.add_scaled(phi, -1.0);
        }
        sum.add_constant(0, 0, -delta_strict *
                                   Matrix::Identity(phi_dim, phi_dim));
        prob.constraints.push_back(
            {"relax[" + std::to_string(c) + "]", std::move(sum)});
    }

    // Region inclusion, one block per half-plane.
    for (std::size_t jh = 0; jh < model.domain_b.size(); ++jh)
        prob.constraints.push_back(
            {"roa[" + std::to_string(jh) + "]",
             build_roa_lmi(model.domain_b[jh], vars, prob.vars)});

    // sigma coupling and trace budget.
    prob.constraints.push_back(
        {"sigma_block", build_sigma_lmi(vars, prob.vars)});
    prob.constraints.push_back(
        {"trace", build_trace_constraint(vars, prob.vars, opts.epsilon)});

    // Positivity floors: block - delta_pd I >= 0.
    auto add_floor = [&](int block_id) {
        const auto &blk = prob.vars.block(block_id);
        MatrixExpr F(blk.rows);
        F.add_var_product(prob.vars, block_id, false,
                          Matrix::Identity(blk.rows, blk.rows),
                          Matrix::Identity(blk.rows, blk.rows), 0, 0);
        F.add_constant(0, 0,
                       -opts.delta_pd * Matrix::Identity(blk.rows, blk.rows));
        prob.constraints.push_back({"pd[" + blk.name + "]", std::move(F)});
    };
    add_floor(vars.X);
    add_floor(vars.Qx_t);
    add_floor(vars.Qe_t);
    if (opts.mode == DesignMode::op1) {
        add_floor(vars.Qpi_t);
        add_floor(vars.Qdelta_t);
    }

    // Objective: minimize sigma.
    prob.objective.emplace_back(prob.vars.block(vars.sigma).offset, 1.0);

    return out;
}

} // namespace detc
