//! Sparse linear programs with named rows and columns.
//!
//! The problem is `min c'x` subject to `row_i(x) {<=,=,>=} b_i` and
//! `lower <= x <= upper`. Bounds may be infinite.
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("duplicate {kind} name {name}")]
    DuplicateName { kind: &'static str, name: String },
    #[error("non-finite coefficient in {0}")]
    NonFinite(String),
    #[error("column {name} has lower bound {lower} above upper bound {upper}")]
    InvertedBounds { name: String, lower: f64, upper: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    columns: Vec<Column>,
    rows: Vec<Row>,
    /// Coefficients of each row as `(column, value)`, in insertion order.
    row_entries: Vec<Vec<(usize, f64)>>,
    column_index: HashMap<String, usize>,
    row_index: HashMap<String, usize>,
}

/// Family of a structured name: everything before the first `[`.
pub fn family(name: &str) -> &str {
    name.split('[').next().unwrap_or(name)
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_column(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        cost: f64,
    ) -> Result<usize, LpError> {
        let name = name.into();
        if !cost.is_finite() || lower.is_nan() || upper.is_nan() || lower == f64::INFINITY
            || upper == f64::NEG_INFINITY
        {
            return Err(LpError::NonFinite(name));
        }
        if lower > upper {
            return Err(LpError::InvertedBounds { name, lower, upper });
        }
        let idx = self.columns.len();
        if self.column_index.insert(name.clone(), idx).is_some() {
            return Err(LpError::DuplicateName {
                kind: "column",
                name,
            });
        }
        self.columns.push(Column {
            name,
            lower,
            upper,
            cost,
        });
        Ok(idx)
    }

    /// Adds a row; repeated columns in `entries` are summed and zeros dropped.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        sense: Sense,
        rhs: f64,
        entries: &[(usize, f64)],
    ) -> Result<usize, LpError> {
        let name = name.into();
        if !rhs.is_finite() || entries.iter().any(|(_, v)| !v.is_finite()) {
            return Err(LpError::NonFinite(name));
        }
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for &(c, v) in entries {
            assert!(c < self.columns.len(), "row {name} references unknown column {c}");
            match merged.iter_mut().find(|(mc, _)| *mc == c) {
                Some(slot) => slot.1 += v,
                None => merged.push((c, v)),
            }
        }
        merged.retain(|(_, v)| *v != 0.0);
        let idx = self.rows.len();
        if self.row_index.insert(name.clone(), idx).is_some() {
            return Err(LpError::DuplicateName { kind: "row", name });
        }
        self.rows.push(Row { name, sense, rhs });
        self.row_entries.push(merged);
        Ok(idx)
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn row_entries(&self, row: usize) -> &[(usize, f64)] {
        &self.row_entries[row]
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.row_entries.iter().map(Vec::len).sum()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_index.get(name).copied()
    }

    pub fn row_index(&self, name: &str) -> Option<usize> {
        self.row_index.get(name).copied()
    }

    /// Coefficient of `column` in `row` (zero if absent).
    pub fn coefficient(&self, row: usize, column: usize) -> f64 {
        self.row_entries[row]
            .iter()
            .find(|(c, _)| *c == column)
            .map_or(0.0, |(_, v)| *v)
    }

    pub fn set_rhs(&mut self, row: usize, rhs: f64) {
        self.rows[row].rhs = rhs;
    }

    /// Row activities `A x`.
    pub fn activities(&self, x: &[f64]) -> Vec<f64> {
        self.row_entries
            .iter()
            .map(|entries| entries.iter().map(|(c, v)| v * x[*c]).sum())
            .collect()
    }

    /// `c'x`
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.columns.iter().zip(x).map(|(c, v)| c.cost * v).sum()
    }

    /// Reduced costs `c - A'y`.
    pub fn reduced_costs(&self, y: &[f64]) -> Vec<f64> {
        let mut z: Vec<f64> = self.columns.iter().map(|c| c.cost).collect();
        for (entries, yi) in self.row_entries.iter().zip(y) {
            for (c, v) in entries {
                z[*c] -= v * yi;
            }
        }
        z
    }

    /// Compressed-column triplets `(colptr, rowval, nzval)` of the row entries.
    pub fn to_csc(&self) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
        let n = self.columns.len();
        let mut counts = vec![0usize; n + 1];
        for entries in &self.row_entries {
            for (c, _) in entries {
                counts[c + 1] += 1;
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let nnz = counts[n];
        let mut next = counts.clone();
        let mut rowval = vec![0; nnz];
        let mut nzval = vec![0.0; nnz];
        for (i, entries) in self.row_entries.iter().enumerate() {
            for (c, v) in entries {
                let k = next[*c];
                rowval[k] = i;
                nzval[k] = *v;
                next[*c] += 1;
            }
        }
        (counts, rowval, nzval)
    }

    /// Number of rows per name family, e.g. `bal -> 11 * T`.
    pub fn row_census(&self) -> HashMap<String, usize> {
        let mut out = HashMap::new();
        for r in &self.rows {
            *out.entry(family(&r.name).to_owned()).or_insert(0) += 1;
        }
        out
    }

    pub fn column_census(&self) -> HashMap<String, usize> {
        let mut out = HashMap::new();
        for c in &self.columns {
            *out.entry(family(&c.name).to_owned()).or_insert(0) += 1;
        }
        out
    }
}
