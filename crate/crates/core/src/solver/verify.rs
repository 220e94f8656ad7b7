use super::Solution;
use crate::lp::{LinearProgram, Sense};

/// Residuals of a claimed solution.
///
/// Absolute residuals are in the units of each row or column. Scaled
/// residuals divide by `1 + magnitude`, where the magnitude is the largest of
/// the right-hand side and the individual terms of the row (or bound/value
/// for columns), so large-valued rows are judged relative to their size.
/// Dual-side residuals are divided by `1 + max |c_j|`, the scale on which
/// reduced costs and prices live.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    /// Constraint violation per row.
    pub row_residual: Vec<f64>,
    pub row_residual_scaled: Vec<f64>,
    /// Bound violation per column.
    pub bound_residual: Vec<f64>,
    pub max_primal_residual: f64,
    pub max_primal_residual_scaled: f64,
    /// Sign violation of each row dual for its sense.
    pub row_dual_residual: Option<Vec<f64>>,
    /// Reduced-cost sign violation per column given its bounds.
    pub column_dual_residual: Option<Vec<f64>>,
    pub max_dual_residual_scaled: Option<f64>,
    /// Largest |dual| x slack product, relative to `max(1, |c'x|)`.
    pub complementarity: Option<f64>,
    pub primal_objective: f64,
    pub dual_objective: Option<f64>,
    /// `|c'x - dual objective| / max(1, |c'x|)`
    pub relative_gap: Option<f64>,
}

impl VerifyReport {
    /// Rows whose absolute violation exceeds `tol`.
    pub fn violated_rows(&self, tol: f64) -> Vec<usize> {
        self.row_residual
            .iter()
            .enumerate()
            .filter(|(_, r)| **r > tol)
            .map(|(i, _)| i)
            .collect()
    }

    /// Scaled primal and dual residuals and the relative gap are all within `tol`.
    pub fn passes(&self, tol: f64) -> bool {
        self.max_primal_residual_scaled <= tol
            && self.max_dual_residual_scaled.is_none_or(|d| d <= tol)
            && self.relative_gap.is_none_or(|g| g <= tol)
    }

    pub fn summary(&self) -> String {
        format!(
            "max primal residual {:.3e} (scaled {:.3e}), max dual residual {}, complementarity {}, relative gap {}",
            self.max_primal_residual,
            self.max_primal_residual_scaled,
            fmt_opt(self.max_dual_residual_scaled),
            fmt_opt(self.complementarity),
            fmt_opt(self.relative_gap),
        )
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("n/a".to_owned(), |v| format!("{v:.3e}"))
}

/// Computes the residual report for `solution` against `lp`.
pub fn verify(lp: &LinearProgram, solution: &Solution) -> VerifyReport {
    let x = &solution.primal;
    let nr = lp.num_rows();
    let mut row_residual = Vec::with_capacity(nr);
    let mut row_residual_scaled = Vec::with_capacity(nr);
    let mut slack = Vec::with_capacity(nr);
    for (i, row) in lp.rows().iter().enumerate() {
        let mut activity = 0.0;
        let mut magnitude = row.rhs.abs();
        for &(c, v) in lp.row_entries(i) {
            let term = v * x[c];
            activity += term;
            magnitude = magnitude.max(term.abs());
        }
        let (violation, s) = match row.sense {
            Sense::Le => ((activity - row.rhs).max(0.0), (row.rhs - activity).max(0.0)),
            Sense::Ge => ((row.rhs - activity).max(0.0), (activity - row.rhs).max(0.0)),
            Sense::Eq => ((activity - row.rhs).abs(), 0.0),
        };
        row_residual.push(violation);
        row_residual_scaled.push(violation / (1.0 + magnitude));
        slack.push(s);
    }
    let mut bound_residual = Vec::with_capacity(lp.num_columns());
    let mut max_bound_scaled: f64 = 0.0;
    for (col, &v) in lp.columns().iter().zip(x) {
        let violation = (col.lower - v).max(v - col.upper).max(0.0);
        let mut magnitude = v.abs();
        for b in [col.lower, col.upper] {
            if b.is_finite() {
                magnitude = magnitude.max(b.abs());
            }
        }
        bound_residual.push(violation);
        max_bound_scaled = max_bound_scaled.max(violation / (1.0 + magnitude));
    }
    let max_primal_residual = row_residual
        .iter()
        .chain(&bound_residual)
        .fold(0.0f64, |a, b| a.max(*b));
    let max_primal_residual_scaled = row_residual_scaled
        .iter()
        .fold(max_bound_scaled, |a, b| a.max(*b));

    let primal_objective = lp.objective_value(x);
    let obj_scale = primal_objective.abs().max(1.0);

    let mut report = VerifyReport {
        row_residual,
        row_residual_scaled,
        bound_residual,
        max_primal_residual,
        max_primal_residual_scaled,
        row_dual_residual: None,
        column_dual_residual: None,
        max_dual_residual_scaled: None,
        complementarity: None,
        primal_objective,
        dual_objective: None,
        relative_gap: None,
    };
    let Some(y) = solution.dual.as_ref() else {
        return report;
    };

    let dual_scale = 1.0 + lp.columns().iter().map(|c| c.cost.abs()).fold(0.0, f64::max);
    let mut max_dual_scaled: f64 = 0.0;
    let mut complementarity: f64 = 0.0;
    let mut dual_objective = 0.0;
    let row_dual_residual: Vec<f64> = lp
        .rows()
        .iter()
        .zip(y)
        .enumerate()
        .map(|(i, (row, &yi))| {
            let r = match row.sense {
                Sense::Le => yi.max(0.0),
                Sense::Ge => (-yi).max(0.0),
                Sense::Eq => 0.0,
            };
            max_dual_scaled = max_dual_scaled.max(r / dual_scale);
            complementarity = complementarity.max(yi.abs() * slack[i]);
            dual_objective += row.rhs * yi;
            r
        })
        .collect();

    let z = lp.reduced_costs(y);
    let column_dual_residual: Vec<f64> = lp
        .columns()
        .iter()
        .enumerate()
        .map(|(j, col)| {
            let zj = z[j];
            let mut r = 0.0;
            if zj > 0.0 {
                if col.lower.is_finite() {
                    dual_objective += zj * col.lower;
                    complementarity = complementarity.max(zj * (x[j] - col.lower).abs());
                } else {
                    r = zj;
                }
            } else if zj < 0.0 {
                if col.upper.is_finite() {
                    dual_objective += zj * col.upper;
                    complementarity = complementarity.max(-zj * (col.upper - x[j]).abs());
                } else {
                    r = -zj;
                }
            }
            max_dual_scaled = max_dual_scaled.max(r / dual_scale);
            r
        })
        .collect();

    report.row_dual_residual = Some(row_dual_residual);
    report.column_dual_residual = Some(column_dual_residual);
    report.max_dual_residual_scaled = Some(max_dual_scaled);
    report.complementarity = Some(complementarity / obj_scale);
    report.dual_objective = Some(dual_objective);
    report.relative_gap = Some((primal_objective - dual_objective).abs() / obj_scale);
    report
}
