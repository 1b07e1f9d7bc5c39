//! Minimal C ABI over the Clarabel conic solver.
//!
//! Problems arrive already scalarized: minimize q'x subject to Ax + s = b,
//! s in a product of zero / nonnegative / PSD-triangle cones. The PSD
//! triangle convention is Clarabel's: upper triangle stacked columnwise,
//! off-diagonal entries scaled by sqrt(2).

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

pub const CONE_ZERO: i32 = 0;
pub const CONE_NONNEG: i32 = 1;
pub const CONE_PSD_TRIANGLE: i32 = 2;

pub const STATUS_SOLVED: i32 = 0;
pub const STATUS_ALMOST_SOLVED: i32 = 1;
pub const STATUS_PRIMAL_INFEASIBLE: i32 = 2;
pub const STATUS_DUAL_INFEASIBLE: i32 = 3;
pub const STATUS_ALMOST_PRIMAL_INFEASIBLE: i32 = 4;
pub const STATUS_ALMOST_DUAL_INFEASIBLE: i32 = 5;
pub const STATUS_MAX_ITERATIONS: i32 = 6;
pub const STATUS_NUMERICAL_ERROR: i32 = 7;
pub const STATUS_OTHER: i32 = 8;
pub const STATUS_BAD_INPUT: i32 = -1;

/// Solve one conic problem. Returns a STATUS_* code; on any status that
/// carries a primal point (solved / almost solved / max iterations) the
/// variable values land in `x_out` and the objective in `obj_out`.
///
/// `colptr` has `n_vars + 1` entries, `rowval`/`nzval` have `nnz` entries
/// (CSC, zero-based). `cone_tags`/`cone_dims` describe the cone product in
/// row order; PSD dims are matrix side lengths.
///
/// # Safety
/// All pointers must be valid for the lengths implied by the dimension
/// arguments; `x_out` must have room for `n_vars` doubles.
#[no_mangle]
pub unsafe extern "C" fn detc_clarabel_solve(
    n_vars: usize,
    q: *const f64,
    m_rows: usize,
    colptr: *const usize,
    rowval: *const usize,
    nzval: *const f64,
    b: *const f64,
    n_cones: usize,
    cone_tags: *const i32,
    cone_dims: *const usize,
    max_iter: u32,
    tol: f64,
    verbose: i32,
    x_out: *mut f64,
    obj_out: *mut f64,
    iters_out: *mut u32,
) -> i32 {
    let q = std::slice::from_raw_parts(q, n_vars).to_vec();
    let colptr = std::slice::from_raw_parts(colptr, n_vars + 1).to_vec();
    let nnz = colptr[n_vars];
    let rowval = std::slice::from_raw_parts(rowval, nnz).to_vec();
    let nzval = std::slice::from_raw_parts(nzval, nnz).to_vec();
    let b = std::slice::from_raw_parts(b, m_rows).to_vec();
    let tags = std::slice::from_raw_parts(cone_tags, n_cones);
    let dims = std::slice::from_raw_parts(cone_dims, n_cones);

    let p = CscMatrix::<f64>::new(n_vars, n_vars, vec![0; n_vars + 1], vec![], vec![]);
    let a = CscMatrix::<f64>::new(m_rows, n_vars, colptr, rowval, nzval);

    let mut cones: Vec<SupportedConeT<f64>> = Vec::with_capacity(n_cones);
    for (tag, dim) in tags.iter().zip(dims.iter()) {
        match *tag {
            CONE_ZERO => cones.push(SupportedConeT::ZeroConeT(*dim)),
            CONE_NONNEG => cones.push(SupportedConeT::NonnegativeConeT(*dim)),
            CONE_PSD_TRIANGLE => cones.push(SupportedConeT::PSDTriangleConeT(*dim)),
            _ => return STATUS_BAD_INPUT,
        }
    }

    let settings = match DefaultSettingsBuilder::default()
        .verbose(verbose != 0)
        .max_iter(max_iter)
        .tol_gap_abs(tol)
        .tol_gap_rel(tol)
        .tol_feas(tol)
        .build()
    {
        Ok(s) => s,
        Err(_) => return STATUS_BAD_INPUT,
    };

    let mut solver = match DefaultSolver::new(&p, &q, &a, &b, &cones, settings) {
        Ok(s) => s,
        Err(_) => return STATUS_BAD_INPUT,
    };
    solver.solve();

    let sol = &solver.solution;
    for (i, v) in sol.x.iter().enumerate().take(n_vars) {
        *x_out.add(i) = *v;
    }
    *obj_out = sol.obj_val;
    *iters_out = sol.iterations;

    match sol.status {
        SolverStatus::Solved => STATUS_SOLVED,
        SolverStatus::AlmostSolved => STATUS_ALMOST_SOLVED,
        SolverStatus::PrimalInfeasible => STATUS_PRIMAL_INFEASIBLE,
        SolverStatus::DualInfeasible => STATUS_DUAL_INFEASIBLE,
        SolverStatus::AlmostPrimalInfeasible => STATUS_ALMOST_PRIMAL_INFEASIBLE,
        SolverStatus::AlmostDualInfeasible => STATUS_ALMOST_DUAL_INFEASIBLE,
        SolverStatus::MaxIterations | SolverStatus::MaxTime => STATUS_MAX_ITERATIONS,
        SolverStatus::NumericalError | SolverStatus::InsufficientProgress => {
            STATUS_NUMERICAL_ERROR
        }
        _ => STATUS_OTHER,
    }
}
