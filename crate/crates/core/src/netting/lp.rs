//! Sparse linear program in equality form with variable bounds, and the
//! interior-point backend used to solve it.
//!
//! ```text
//! minimise    cᵀx
//! subject to  A x = b
//!             lower ≤ x ≤ upper      (bounds may be infinite)
//! ```

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SolverStatus, SupportedConeT, ZeroConeT,
};

use crate::error::ConstraintClass;

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
    pub class: ConstraintClass,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpProblem {
    costs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<LpRow>,
}

impl LpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        debug_assert!(lower <= upper);
        self.costs.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.costs.len() - 1
    }

    pub fn add_eq(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64, class: ConstraintClass) {
        debug_assert!(coeffs.iter().all(|&(v, _)| v < self.costs.len()));
        self.rows.push(LpRow { coeffs, rhs, class });
    }

    pub fn num_vars(&self) -> usize {
        self.costs.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn rows(&self) -> &[LpRow] {
        &self.rows
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.costs.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest absolute equality residual for each constraint class.
    pub fn max_row_residual(&self, x: &[f64], class: ConstraintClass) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.class == class)
            .map(|r| (r.coeffs.iter().map(|&(j, a)| a * x[j]).sum::<f64>() - r.rhs).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: u32,
    pub status: String,
}

#[derive(Debug, Clone)]
pub enum LpFailure {
    Infeasible(String),
    Numerical(String),
}

/// Solves `lp` with the Clarabel interior-point method.
pub fn solve_lp(lp: &LpProblem, tolerance: f64) -> Result<LpSolution, LpFailure> {
    let n = lp.num_vars();
    if n == 0 {
        return Ok(LpSolution {
            x: Vec::new(),
            objective: 0.0,
            iterations: 0,
            status: "Solved".into(),
        });
    }

    // Rows: equalities and fixed variables, then one `x ≤ u` / `-x ≤ -l`
    // row per remaining finite bound.
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut b = Vec::new();
    for (i, row) in lp.rows.iter().enumerate() {
        triplets.extend(row.coeffs.iter().map(|&(j, a)| (i, j, a)));
        b.push(row.rhs);
    }
    let mut m = lp.rows.len();
    for j in 0..n {
        if lp.lower[j] == lp.upper[j] {
            triplets.push((m, j, 1.0));
            b.push(lp.upper[j]);
            m += 1;
        }
    }
    let n_eq = m;
    for j in 0..n {
        if lp.lower[j] == lp.upper[j] {
            continue;
        }
        if lp.upper[j].is_finite() {
            triplets.push((m, j, 1.0));
            b.push(lp.upper[j]);
            m += 1;
        }
        if lp.lower[j].is_finite() {
            triplets.push((m, j, -1.0));
            b.push(-lp.lower[j]);
            m += 1;
        }
    }
    let a = csc_from_triplets(m, n, triplets);
    let p = CscMatrix::<f64>::zeros((n, n));
    let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
    if n_eq > 0 {
        cones.push(ZeroConeT(n_eq));
    }
    if m > n_eq {
        cones.push(NonnegativeConeT(m - n_eq));
    }
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(200)
        .tol_feas(tolerance.clamp(1e-12, 1e-8))
        .tol_gap_abs(tolerance.clamp(1e-12, 1e-8))
        .tol_gap_rel(tolerance.clamp(1e-12, 1e-8))
        .build()
        .map_err(|e| LpFailure::Numerical(format!("solver settings: {e:?}")))?;
    let mut solver = DefaultSolver::new(&p, &lp.costs, &a, &b, &cones, settings)
        .map_err(|e| LpFailure::Numerical(format!("solver setup: {e:?}")))?;
    solver.solve();
    let sol = &solver.solution;
    let status = format!("{:?}", sol.status);
    match sol.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => Ok(LpSolution {
            objective: lp.objective(&sol.x),
            x: sol.x.clone(),
            iterations: sol.iterations,
            status,
        }),
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => Err(LpFailure::Infeasible(status)),
        _ => Err(LpFailure::Numerical(status)),
    }
}

fn csc_from_triplets(m: usize, n: usize, mut t: Vec<(usize, usize, f64)>) -> CscMatrix<f64> {
    t.sort_unstable_by_key(|&(r, c, _)| (c, r));
    let mut colptr = vec![0usize; n + 1];
    let mut rowval = Vec::with_capacity(t.len());
    let mut nzval = Vec::with_capacity(t.len());
    for (r, c, v) in t {
        colptr[c + 1] += 1;
        rowval.push(r);
        nzval.push(v);
    }
    for c in 0..n {
        colptr[c + 1] += colptr[c];
    }
    CscMatrix::new(m, n, colptr, rowval, nzval)
}
