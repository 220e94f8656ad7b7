//! Free-format MPS export and import.
//!
//! Names are written verbatim (no 8-character mangling), so they must be
//! non-empty and free of whitespace. Rows are written in LP order and
//! columns in LP order with their entries sorted by row.
use super::SolverError;
use crate::lp::{LinearProgram, Sense};
use std::collections::HashMap;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

const OBJECTIVE_ROW: &str = "OBJ";

fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn check_name(name: &str) -> Result<(), SolverError> {
    if name.is_empty() || name.chars().any(char::is_whitespace) || name == OBJECTIVE_ROW {
        return Err(SolverError::Mps {
            line: 0,
            reason: format!("name {name:?} cannot be written to free-format MPS"),
        });
    }
    Ok(())
}

/// Writes `lp` as free-format MPS.
pub fn write_mps<W: Write>(lp: &LinearProgram, out: W) -> Result<(), SolverError> {
    for c in lp.columns() {
        check_name(&c.name)?;
    }
    for r in lp.rows() {
        check_name(&r.name)?;
    }
    let mut by_column: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.num_columns()];
    for i in 0..lp.num_rows() {
        for &(c, v) in lp.row_entries(i) {
            by_column[c].push((i, v));
        }
    }

    let mut w = BufWriter::new(out);
    writeln!(w, "NAME LEAKAGE")?;
    writeln!(w, "ROWS")?;
    writeln!(w, " N {OBJECTIVE_ROW}")?;
    for r in lp.rows() {
        let t = match r.sense {
            Sense::Le => "L",
            Sense::Eq => "E",
            Sense::Ge => "G",
        };
        writeln!(w, " {t} {}", r.name)?;
    }
    writeln!(w, "COLUMNS")?;
    for (j, col) in lp.columns().iter().enumerate() {
        if col.cost != 0.0 || by_column[j].is_empty() {
            writeln!(w, "    {} {OBJECTIVE_ROW} {}", col.name, num(col.cost))?;
        }
        for &(i, v) in &by_column[j] {
            writeln!(w, "    {} {} {}", col.name, lp.rows()[i].name, num(v))?;
        }
    }
    writeln!(w, "RHS")?;
    for r in lp.rows() {
        if r.rhs != 0.0 {
            writeln!(w, "    RHS {} {}", r.name, num(r.rhs))?;
        }
    }
    writeln!(w, "BOUNDS")?;
    for col in lp.columns() {
        let (lo, up) = (col.lower, col.upper);
        if lo == up {
            writeln!(w, " FX BND {} {}", col.name, num(lo))?;
            continue;
        }
        if lo == f64::NEG_INFINITY {
            writeln!(w, " FR BND {}", col.name)?;
        } else if lo != 0.0 {
            writeln!(w, " LO BND {} {}", col.name, num(lo))?;
        }
        if up.is_finite() {
            writeln!(w, " UP BND {} {}", col.name, num(up))?;
        }
    }
    writeln!(w, "ENDATA")?;
    w.flush()?;
    Ok(())
}

/// Writes `lp` to `path` as free-format MPS.
pub fn export_mps(lp: &LinearProgram, path: &Path) -> Result<(), SolverError> {
    let file = std::fs::File::create(path)?;
    write_mps(lp, file)
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Bounds,
    End,
}

/// Parses free-format MPS into a [`LinearProgram`] (minimisation).
pub fn parse_mps<R: BufRead>(input: R) -> Result<LinearProgram, SolverError> {
    let err = |line: usize, reason: String| SolverError::Mps { line, reason };
    let mut section = Section::None;
    let mut objective: Option<String> = None;
    let mut rows: Vec<(String, Sense)> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut row_entries: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut cols: Vec<(String, f64, f64, f64)> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();

    for (k, line) in input.lines().enumerate() {
        let line_no = k + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('*') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let header = !line.starts_with(char::is_whitespace);
        if header {
            section = match tokens[0] {
                "NAME" => Section::None,
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                "OBJSENSE" => {
                    if tokens.get(1).is_some_and(|s| *s != "MIN" && *s != "MINIMIZE") {
                        return Err(err(line_no, "only minimisation is supported".into()));
                    }
                    Section::None
                }
                other => return Err(err(line_no, format!("unsupported section {other}"))),
            };
            continue;
        }
        let parse = |s: &str| -> Result<f64, SolverError> {
            s.parse::<f64>()
                .map_err(|_| err(line_no, format!("bad number {s:?}")))
        };
        match section {
            Section::Rows => {
                let [kind, name] = tokens[..] else {
                    return Err(err(line_no, "expected `<type> <name>`".into()));
                };
                let sense = match kind {
                    "N" => {
                        if objective.is_none() {
                            objective = Some(name.to_owned());
                        }
                        continue;
                    }
                    "L" => Sense::Le,
                    "E" => Sense::Eq,
                    "G" => Sense::Ge,
                    _ => return Err(err(line_no, format!("unknown row type {kind}"))),
                };
                if row_index.insert(name.to_owned(), rows.len()).is_some() {
                    return Err(err(line_no, format!("duplicate row {name}")));
                }
                rows.push((name.to_owned(), sense));
                rhs.push(0.0);
                row_entries.push(Vec::new());
            }
            Section::Columns => {
                if tokens.contains(&"'MARKER'") {
                    return Err(err(line_no, "integer markers are not supported".into()));
                }
                if tokens.len() < 3 || tokens.len() % 2 == 0 {
                    return Err(err(line_no, "expected `<column> <row> <value> ...`".into()));
                }
                let name = tokens[0];
                let j = match col_index.get(name) {
                    Some(&j) => {
                        if j + 1 != cols.len() {
                            return Err(err(line_no, format!("column {name} is not contiguous")));
                        }
                        j
                    }
                    None => {
                        col_index.insert(name.to_owned(), cols.len());
                        cols.push((name.to_owned(), 0.0, f64::INFINITY, 0.0));
                        cols.len() - 1
                    }
                };
                for pair in tokens[1..].chunks(2) {
                    let v = parse(pair[1])?;
                    if Some(pair[0]) == objective.as_deref() {
                        cols[j].3 += v;
                    } else if let Some(&i) = row_index.get(pair[0]) {
                        row_entries[i].push((j, v));
                    } else {
                        return Err(err(line_no, format!("unknown row {}", pair[0])));
                    }
                }
            }
            Section::Rhs => {
                // `[set] row value [row value]`: drop the optional set name.
                let body = if tokens.len() % 2 == 1 { &tokens[1..] } else { &tokens[..] };
                for pair in body.chunks(2) {
                    if pair.len() != 2 {
                        return Err(err(line_no, "dangling RHS entry".into()));
                    }
                    let v = parse(pair[1])?;
                    if Some(pair[0]) == objective.as_deref() {
                        return Err(err(line_no, "objective constants are not supported".into()));
                    }
                    let i = *row_index
                        .get(pair[0])
                        .ok_or_else(|| err(line_no, format!("unknown row {}", pair[0])))?;
                    rhs[i] = v;
                }
            }
            Section::Bounds => {
                if tokens.len() < 3 {
                    return Err(err(line_no, "expected `<type> <set> <column> [value]`".into()));
                }
                let kind = tokens[0];
                let name = tokens[2];
                let j = *col_index
                    .get(name)
                    .ok_or_else(|| err(line_no, format!("unknown column {name}")))?;
                let value = || -> Result<f64, SolverError> {
                    let t = tokens
                        .get(3)
                        .ok_or_else(|| err(line_no, format!("bound {kind} needs a value")))?;
                    parse(t)
                };
                let col = &mut cols[j];
                match kind {
                    "UP" => col.2 = value()?,
                    "LO" => col.1 = value()?,
                    "FX" => {
                        let v = value()?;
                        col.1 = v;
                        col.2 = v;
                    }
                    "FR" => {
                        col.1 = f64::NEG_INFINITY;
                        col.2 = f64::INFINITY;
                    }
                    "MI" => col.1 = f64::NEG_INFINITY,
                    "PL" => col.2 = f64::INFINITY,
                    _ => return Err(err(line_no, format!("unsupported bound type {kind}"))),
                }
            }
            Section::None | Section::End => {
                return Err(err(line_no, "data line outside a section".into()));
            }
        }
    }
    if section != Section::End {
        return Err(err(0, "missing ENDATA".into()));
    }

    let mut lp = LinearProgram::new();
    for (name, lo, up, cost) in cols {
        lp.add_column(name, lo, up, cost)
            .map_err(|e| err(0, e.to_string()))?;
    }
    for (((name, sense), b), entries) in rows.into_iter().zip(rhs).zip(row_entries) {
        lp.add_row(name, sense, b, &entries)
            .map_err(|e| err(0, e.to_string()))?;
    }
    Ok(lp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textbook() -> LinearProgram {
        let mut lp = LinearProgram::new();
        let x = lp.add_column("x", f64::NEG_INFINITY, 7.5, 1.0).unwrap();
        let y = lp.add_column("y[a,1]", -2.0, 3.0, 0.0).unwrap();
        let z = lp.add_column("z", 1.0, 1.0, -0.635).unwrap();
        lp.add_row("r[0]", Sense::Ge, 3.0, &[(x, 1.0), (y, 1e-7)]).unwrap();
        lp.add_row("r[1]", Sense::Le, 0.0, &[(y, 145000.0), (z, -1.0)]).unwrap();
        lp.add_row("r[2]", Sense::Eq, -4.25, &[(x, 0.9), (z, 1.0)]).unwrap();
        lp
    }

    #[test]
    fn roundtrip_is_coefficient_identical() {
        let lp = textbook();
        let mut buf = Vec::new();
        write_mps(&lp, &mut buf).unwrap();
        let back = parse_mps(buf.as_slice()).unwrap();
        assert_eq!(back.columns(), lp.columns());
        assert_eq!(back.rows(), lp.rows());
        for i in 0..lp.num_rows() {
            let mut a = lp.row_entries(i).to_vec();
            a.sort_by_key(|e| e.0);
            assert_eq!(back.row_entries(i), a.as_slice());
        }
        let mut again = Vec::new();
        write_mps(&back, &mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn whitespace_names_rejected() {
        let mut lp = LinearProgram::new();
        lp.add_column("bad name", 0.0, 1.0, 1.0).unwrap();
        assert!(write_mps(&lp, Vec::new()).is_err());
    }

    #[test]
    fn unknown_row_in_columns_is_an_error() {
        let text = "NAME t\nROWS\n N OBJ\n L r\nCOLUMNS\n    x q 1\nRHS\nBOUNDS\nENDATA\n";
        assert!(matches!(
            parse_mps(text.as_bytes()),
            Err(SolverError::Mps { line: 6, .. })
        ));
    }
}
