#pragma once

#include <cstddef>

// C ABI of the Rust Clarabel shim (solver/clarabel_ffi). Problems are passed
// in scalarized conic form: minimize q'x s.t. Ax + s = b, s in a product of
// zero / nonnegative / PSD-triangle cones (CSC matrix, zero-based indices).

extern "C" int detc_clarabel_solve(
    std::size_t n_vars, const double *q, std::size_t m_rows,
    const std::size_t *colptr, const std::size_t *rowval, const double *nzval,
    const double *b, std::size_t n_cones, const int *cone_tags,
    const std::size_t *cone_dims, unsigned max_iter, double tol, int verbose,
    double *x_out, double *obj_out, unsigned *iters_out);

namespace detc::backend {

inline constexpr int kConeZero = 0;
inline constexpr int kConeNonneg = 1;
inline constexpr int kConePsdTriangle = 2;

inline constexpr int kStatusSolved = 0;
inline constexpr int kStatusAlmostSolved = 1;
inline constexpr int kStatusPrimalInfeasible = 2;
inline constexpr int kStatusDualInfeasible = 3;
inline constexpr int kStatusAlmostPrimalInfeasible = 4;
inline constexpr int kStatusAlmostDualInfeasible = 5;
inline constexpr int kStatusMaxIterations = 6;
inline constexpr int kStatusNumericalError = 7;

} // namespace detc::backend
