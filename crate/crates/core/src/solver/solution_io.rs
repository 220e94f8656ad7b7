//! Solution files: `#objective,<value>` followed by CSV `name,value,dual`.
//!
//! Columns come first (value = primal, dual empty), then rows (value = row
//! activity, dual = row dual, empty if unknown). A name that is both a column
//! and a row refers to the column on its first occurrence and to the row on
//! its second.
use super::{Solution, SolveStats, SolveStatus, SolverError};
use crate::lp::LinearProgram;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

fn fmt(v: f64) -> String {
    // `{:?}` round-trips f64 exactly
    format!("{v:?}")
}

/// Writes `solution` for `lp`.
pub fn write_solution<W: Write>(
    lp: &LinearProgram,
    solution: &Solution,
    out: W,
) -> Result<(), SolverError> {
    let mut out = std::io::BufWriter::new(out);
    writeln!(out, "#objective,{}", fmt(solution.objective))?;
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| SolverError::Io(std::io::Error::other(e));
    w.write_record(["name", "value", "dual"]).map_err(csv_err)?;
    for (col, v) in lp.columns().iter().zip(&solution.primal) {
        w.write_record([col.name.as_str(), &fmt(*v), ""])
            .map_err(csv_err)?;
    }
    let activity = lp.activities(&solution.primal);
    for (i, row) in lp.rows().iter().enumerate() {
        let dual = solution
            .dual
            .as_ref()
            .map_or(String::new(), |d| fmt(d[i]));
        w.write_record([row.name.as_str(), &fmt(activity[i]), &dual])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a solution file against `lp`.
///
/// Every column needs a value. Row duals are optional: if none is given the
/// solution has no duals, otherwise rows without a dual get zero. The
/// objective is recomputed from the primal values; the header value is
/// checked against it.
pub fn read_solution<R: Read>(lp: &LinearProgram, input: R) -> Result<Solution, SolverError> {
    let mut reader = BufReader::new(input);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let header_obj = first
        .trim()
        .strip_prefix("#objective,")
        .and_then(|s| s.trim().parse::<f64>().ok())
        .ok_or_else(|| SolverError::SolutionFile {
            line: 1,
            reason: "expected `#objective,<value>`".into(),
        })?;

    let mut primal: Vec<Option<f64>> = vec![None; lp.num_columns()];
    let mut duals: Vec<Option<f64>> = vec![None; lp.num_rows()];
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = csv.headers().map_err(|e| SolverError::SolutionFile {
        line: 2,
        reason: e.to_string(),
    })?;
    if headers.iter().collect::<Vec<_>>() != ["name", "value", "dual"] {
        return Err(SolverError::SolutionFile {
            line: 2,
            reason: "expected header `name,value,dual`".into(),
        });
    }
    for (k, record) in csv.records().enumerate() {
        let line = k + 3;
        let record = record.map_err(|e| SolverError::SolutionFile {
            line,
            reason: e.to_string(),
        })?;
        let bad = |reason: String| SolverError::SolutionFile { line, reason };
        let name = record.get(0).unwrap_or("");
        let parse = |s: &str| -> Result<Option<f64>, SolverError> {
            let s = s.trim();
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<f64>()
                .map(Some)
                .map_err(|_| bad(format!("bad number {s:?} for {name}")))
        };
        let value = parse(record.get(1).unwrap_or(""))?;
        let dual = parse(record.get(2).unwrap_or(""))?;
        match lp.column_index(name) {
            Some(j) if primal[j].is_none() => {
                primal[j] = Some(value.ok_or_else(|| bad(format!("column {name} has no value")))?);
                if dual.is_some() {
                    return Err(bad(format!("column {name} carries a dual")));
                }
            }
            _ => {
                let i = lp
                    .row_index(name)
                    .ok_or_else(|| SolverError::UnknownName(name.to_owned()))?;
                if duals[i].is_some() {
                    return Err(bad(format!("row {name} given twice")));
                }
                duals[i] = dual;
            }
        }
    }

    let primal: Vec<f64> = primal
        .into_iter()
        .enumerate()
        .map(|(j, v)| v.ok_or_else(|| SolverError::MissingColumn(lp.columns()[j].name.clone())))
        .collect::<Result<_, _>>()?;
    let dual = duals
        .iter()
        .any(Option::is_some)
        .then(|| duals.iter().map(|d| d.unwrap_or(0.0)).collect());
    let objective = lp.objective_value(&primal);
    if (objective - header_obj).abs() > 1e-6 * objective.abs().max(1.0) {
        return Err(SolverError::SolutionFile {
            line: 1,
            reason: format!("objective {header_obj} disagrees with c'x = {objective}"),
        });
    }
    Ok(Solution {
        status: SolveStatus::Optimal,
        objective,
        primal,
        dual,
        stats: SolveStats::default(),
    })
}

/// Reads a solution file from `path`.
pub fn import_solution(lp: &LinearProgram, path: &Path) -> Result<Solution, SolverError> {
    read_solution(lp, std::fs::File::open(path)?)
}
