//! LP solving, verification and file exchange.
//!
//! Dual convention: `dual[i]` is the change of the optimal objective per unit
//! increase of `rhs[i]`. Consequently `<=` rows carry non-positive duals,
//! `>=` rows non-negative ones, and the dual of a nodal balance row is the
//! marginal cost of one more unit of demand there.
use crate::lp::{family, LinearProgram, Sense};
use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use std::time::Instant;
use thiserror::Error;

mod mps;
mod solution_io;
mod verify;

pub use mps::{export_mps, parse_mps, write_mps};
pub use solution_io::{import_solution, read_solution, write_solution};
pub use verify::{verify, VerifyReport};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("problem is infeasible; first violated row family: {hint}")]
    Infeasible { hint: String },
    #[error("problem is unbounded; unbounded direction in column family: {hint}")]
    Unbounded { hint: String },
    #[error("numerical failure ({status}): {detail}")]
    Numerical { status: String, detail: String },
    #[error("solver setup failed: {0}")]
    Setup(String),
    #[error("MPS error at line {line}: {reason}")]
    Mps { line: usize, reason: String },
    #[error("solution file error at line {line}: {reason}")]
    SolutionFile { line: usize, reason: String },
    #[error("solution file references unknown name {0}")]
    UnknownName(String),
    #[error("solution file lacks a value for column {0}")]
    MissingColumn(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Target primal/dual feasibility passed to the interior-point method.
    pub feasibility: f64,
    /// Target relative duality gap passed to the interior-point method.
    pub gap: f64,
    /// Threshold on the verification report above which a result is rejected.
    pub reporting: f64,
    pub max_iterations: u32,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feasibility: 1e-8,
            gap: 1e-8,
            reporting: 1e-6,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveStats {
    pub iterations: u32,
    pub wall_time_s: f64,
}

/// Primal values per column, duals per row, objective `c'x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: SolveStatus,
    pub objective: f64,
    pub primal: Vec<f64>,
    /// `None` for imported solutions that carry no duals.
    pub dual: Option<Vec<f64>>,
    pub stats: SolveStats,
}

impl Solution {
    pub fn value(&self, lp: &LinearProgram, column: &str) -> Option<f64> {
        lp.column_index(column).map(|c| self.primal[c])
    }

    pub fn row_dual(&self, lp: &LinearProgram, row: &str) -> Option<f64> {
        let duals = self.dual.as_ref()?;
        lp.row_index(row).map(|r| duals[r])
    }
}

/// Which original constraint a cone row came from.
#[derive(Clone, Copy)]
enum Origin {
    /// Row `i`; `sign` is how the row was oriented into `a x + s = b`.
    Row(usize, f64),
    Upper(usize),
    Lower(usize),
}

/// Column and row scale factors: the solver sees `x = col * x'` and rows
/// multiplied by `row`.
struct Scaling {
    col: Vec<f64>,
    row: Vec<f64>,
}

fn positive(v: f64) -> Option<f64> {
    (v.is_finite() && v.abs() > 0.0).then_some(v.abs())
}

impl Scaling {
    /// Estimates column magnitudes from bounds and right-hand sides and
    /// propagates them through the rows; rows are then scaled to unit size.
    fn estimate(lp: &LinearProgram) -> Self {
        let mut col: Vec<Option<f64>> = lp
            .columns()
            .iter()
            .map(|c| match (positive(c.lower), positive(c.upper)) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            })
            .collect();
        let mut row: Vec<Option<f64>> = lp.rows().iter().map(|r| positive(r.rhs)).collect();
        for _ in 0..4 {
            for (i, m) in row.iter_mut().enumerate() {
                if m.is_none() {
                    *m = lp
                        .row_entries(i)
                        .iter()
                        .filter_map(|&(j, a)| col[j].map(|s| a.abs() * s))
                        .reduce(f64::max);
                }
            }
            let mut candidate: Vec<Option<f64>> = vec![None; col.len()];
            for (i, m) in row.iter().enumerate() {
                let Some(m) = *m else { continue };
                for &(j, a) in lp.row_entries(i) {
                    if col[j].is_none() {
                        let est = m / a.abs();
                        candidate[j] = Some(candidate[j].map_or(est, |c: f64| c.min(est)));
                    }
                }
            }
            for (c, e) in col.iter_mut().zip(candidate) {
                if c.is_none() {
                    *c = e;
                }
            }
        }
        Self::finish(lp, col.into_iter().map(|c| c.unwrap_or(1.0)).collect())
    }

    fn finish(lp: &LinearProgram, col: Vec<f64>) -> Self {
        let col: Vec<f64> = col.into_iter().map(|c| c.clamp(1e-6, 1e12)).collect();
        let row = lp
            .rows()
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let m = lp
                    .row_entries(i)
                    .iter()
                    .map(|&(j, a)| a.abs() * col[j])
                    .fold(r.rhs.abs(), f64::max);
                if m > 0.0 {
                    1.0 / m
                } else {
                    1.0
                }
            })
            .collect();
        Scaling { col, row }
    }
}

/// Solves `lp` with the interior-point backend and recovers duals in the
/// crate's sign convention.
///
/// The problem is passed to the backend in scaled form. If the unscaled
/// result misses the reporting tolerance, it is solved once more with
/// tolerances a hundred times tighter and the better of the two is kept.
pub fn solve(lp: &LinearProgram, tol: &Tolerances) -> Result<Solution, SolverError> {
    let start = Instant::now();
    let scaling = Scaling::estimate(lp);
    let first = solve_scaled(lp, tol, &scaling)?;
    let (status, mut solution, report) = if first.2.passes(tol.reporting) {
        first
    } else {
        log::debug!("first pass missed tolerance ({}); tightening", first.2.summary());
        let tight = Tolerances {
            feasibility: tol.feasibility * 1e-2,
            gap: tol.gap * 1e-2,
            ..*tol
        };
        match solve_scaled(lp, &tight, &scaling) {
            Ok(mut second) if badness(&second.2) < badness(&first.2) => {
                second.1.stats.iterations += first.1.stats.iterations;
                second
            }
            _ => first,
        }
    };
    solution.stats.wall_time_s = start.elapsed().as_secs_f64();
    let accepted = report.passes(tol.reporting);
    match status {
        SolverStatus::Solved if accepted => Ok(solution),
        SolverStatus::AlmostSolved
        | SolverStatus::MaxIterations
        | SolverStatus::InsufficientProgress
        | SolverStatus::NumericalError
            if accepted =>
        {
            log::warn!(
                "solver ended with {status:?} but the verification report is within tolerance"
            );
            Ok(solution)
        }
        status => Err(SolverError::Numerical {
            status: format!("{status:?}"),
            detail: report.summary(),
        }),
    }
}

/// Largest of the quantities checked by [`VerifyReport::passes`].
fn badness(r: &VerifyReport) -> f64 {
    r.max_primal_residual_scaled
        .max(r.max_dual_residual_scaled.unwrap_or(0.0))
        .max(r.relative_gap.unwrap_or(0.0))
}

fn solve_scaled(
    lp: &LinearProgram,
    tol: &Tolerances,
    scaling: &Scaling,
) -> Result<(SolverStatus, Solution, VerifyReport), SolverError> {
    let n = lp.num_columns();
    let (cs, rs) = (&scaling.col, &scaling.row);

    // Zero cone (equalities) first, then the non-negative cone.
    let mut origins = Vec::new();
    for (i, r) in lp.rows().iter().enumerate() {
        if r.sense == Sense::Eq {
            origins.push(Origin::Row(i, 1.0));
        }
    }
    let n_eq = origins.len();
    for (i, r) in lp.rows().iter().enumerate() {
        match r.sense {
            Sense::Le => origins.push(Origin::Row(i, 1.0)),
            Sense::Ge => origins.push(Origin::Row(i, -1.0)),
            Sense::Eq => {}
        }
    }
    for (j, c) in lp.columns().iter().enumerate() {
        if c.upper.is_finite() {
            origins.push(Origin::Upper(j));
        }
        if c.lower.is_finite() {
            origins.push(Origin::Lower(j));
        }
    }
    let m = origins.len();

    let mut rows_i = Vec::with_capacity(lp.num_nonzeros() + 2 * n);
    let mut cols_j = Vec::with_capacity(rows_i.capacity());
    let mut vals = Vec::with_capacity(rows_i.capacity());
    let mut b = Vec::with_capacity(m);
    for (k, origin) in origins.iter().enumerate() {
        match *origin {
            Origin::Row(i, sign) => {
                let f = sign * rs[i];
                for &(j, v) in lp.row_entries(i) {
                    rows_i.push(k);
                    cols_j.push(j);
                    vals.push(f * v * cs[j]);
                }
                b.push(f * lp.rows()[i].rhs);
            }
            Origin::Upper(j) => {
                rows_i.push(k);
                cols_j.push(j);
                vals.push(1.0);
                b.push(lp.columns()[j].upper / cs[j]);
            }
            Origin::Lower(j) => {
                rows_i.push(k);
                cols_j.push(j);
                vals.push(-1.0);
                b.push(-lp.columns()[j].lower / cs[j]);
            }
        }
    }
    let a = CscMatrix::new_from_triplets(m, n, rows_i, cols_j, vals);
    let p = CscMatrix::<f64>::zeros((n, n));
    let cost_scale = lp
        .columns()
        .iter()
        .zip(cs)
        .map(|(c, s)| (c.cost * s).abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let q: Vec<f64> = lp
        .columns()
        .iter()
        .zip(cs)
        .map(|(c, s)| c.cost * s / cost_scale)
        .collect();
    let mut cones = Vec::new();
    if n_eq > 0 {
        cones.push(SupportedConeT::ZeroConeT(n_eq));
    }
    if m > n_eq {
        cones.push(SupportedConeT::NonnegativeConeT(m - n_eq));
    }

    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(tol.max_iterations)
        .tol_feas(tol.feasibility)
        .tol_gap_abs(tol.gap)
        .tol_gap_rel(tol.gap)
        .equilibrate_enable(true)
        .presolve_enable(false)
        .max_threads(1)
        .build()
        .map_err(|e| SolverError::Setup(format!("{e:?}")))?;
    let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings)
        .map_err(|e| SolverError::Setup(format!("{e}")))?;
    solver.solve();
    let sol = &solver.solution;

    let hint_rows = |weights: &[f64]| -> String {
        let mut best: Option<(f64, usize)> = None;
        for (k, w) in weights.iter().enumerate() {
            let w = w.abs();
            if best.is_none_or(|(bw, _)| w > bw) {
                best = Some((w, k));
            }
        }
        match best.map(|(_, k)| origins[k]) {
            Some(Origin::Row(i, _)) => family(&lp.rows()[i].name).to_owned(),
            Some(Origin::Upper(j)) | Some(Origin::Lower(j)) => {
                format!("bounds of {}", family(&lp.columns()[j].name))
            }
            None => "<empty>".to_owned(),
        }
    };

    match sol.status {
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            return Err(SolverError::Infeasible {
                hint: hint_rows(&sol.z),
            });
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
            let mut best = 0;
            for (j, v) in sol.x.iter().enumerate() {
                if v.abs() > sol.x[best].abs() {
                    best = j;
                }
            }
            let hint = lp
                .columns()
                .get(best)
                .map_or("<empty>".to_owned(), |c| family(&c.name).to_owned());
            return Err(SolverError::Unbounded { hint });
        }
        _ => {}
    }

    let primal: Vec<f64> = sol.x.iter().zip(cs).map(|(v, s)| v * s).collect();
    let mut dual = vec![0.0; lp.num_rows()];
    for (k, origin) in origins.iter().enumerate() {
        if let Origin::Row(i, sign) = *origin {
            dual[i] = -sign * sol.z[k] * rs[i] * cost_scale;
        }
    }
    let solution = Solution {
        status: SolveStatus::Optimal,
        objective: lp.objective_value(&primal),
        primal,
        dual: Some(dual),
        stats: SolveStats {
            iterations: sol.iterations,
            wall_time_s: 0.0,
        },
    };
    let report = verify(lp, &solution);
    Ok((sol.status, solution, report))
}
