//! Parameter sweeps over the base price and the distribution parameter.
//!
//! A store is a directory holding `manifest.toml`, one CSV row per finished
//! grid point under `points/`, the merged `summary.csv` (sorted by mu then
//! alpha), `timings.csv`, and optionally one scenario directory per point
//! under `scenarios/`.
mod charts;
mod scenario;

pub use charts::{classify_fields, render_charts, Field};
pub use scenario::{
    analyse, export_scenario_mps, load_formulation, load_scenario_dir, read_spec, run_scenario,
    write_report_files, write_scenario_core, write_scenario_dir, write_trace_files,
    ScenarioOutcome, ScenarioSpec, SeriesSpec, DEFAULT_SEED, SOLUTION_FILE, SPEC_FILE,
};

use crate::formulation::FormulationError;
use crate::metrics::MetricsError;
use crate::model::{default_network, ModelError};
use crate::pricing::PricingError;
use crate::solver::{SolverError, Tolerances};
use crate::tracing::TracingError;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot write {0}: {1}")]
    Output(PathBuf, std::io::Error),
    #[error("cannot read {0}: {1}")]
    Input(PathBuf, std::io::Error),
    #[error("store {0} is empty")]
    EmptyStore(PathBuf),
    #[error("store {path} was created with a different configuration (fingerprint {found}); rerun with --force to recompute")]
    StaleStore { path: PathBuf, found: String },
    #[error("malformed store file {0}: {1}")]
    Store(PathBuf, String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Pricing(#[from] PricingError),
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Tracing(#[from] TracingError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl SweepError {
    /// Whether the error stems from the solver rather than data or I/O.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            SweepError::Solver(
                SolverError::Infeasible { .. }
                    | SolverError::Unbounded { .. }
                    | SolverError::Numerical { .. }
                    | SolverError::Setup(_)
            )
        )
    }
}

/// Sweep configuration, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub mu_min: f64,
    pub mu_max: f64,
    pub mu_step: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_step: f64,
    /// Explicit base prices; overrides the range when set.
    pub mu_values: Option<Vec<f64>>,
    /// Explicit distribution parameters; overrides the range when set.
    pub alpha_values: Option<Vec<f64>>,
    pub series: SeriesSpec,
    pub output: PathBuf,
    /// Worker threads; 0 uses all cores.
    pub threads: usize,
    /// Write a full scenario directory per grid point.
    pub write_scenarios: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            mu_min: 0.0,
            mu_max: 400.0,
            mu_step: 4.0,
            alpha_min: 0.0,
            alpha_max: 3.0,
            alpha_step: 0.2,
            mu_values: None,
            alpha_values: None,
            series: SeriesSpec::default(),
            output: PathBuf::from("sweep-out"),
            threads: 0,
            write_scenarios: false,
        }
    }
}

/// Decimal places grid values are rounded to, so `0.2 * 3` prints as `0.6`.
const GRID_DECIMALS: i32 = 9;

fn round_grid(v: f64) -> f64 {
    let f = 10f64.powi(GRID_DECIMALS);
    let r = (v * f).round() / f;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Inclusive range `min, min + step, ..., max`.
pub fn inclusive_range(min: f64, max: f64, step: f64, what: &str) -> Result<Vec<f64>, SweepError> {
    if !(min.is_finite() && max.is_finite() && step.is_finite()) {
        return Err(SweepError::Config(format!("{what} range must be finite")));
    }
    if max < min {
        return Err(SweepError::Config(format!("{what}_max {max} is below {what}_min {min}")));
    }
    if max == min {
        return Ok(vec![round_grid(min)]);
    }
    if step <= 0.0 {
        return Err(SweepError::Config(format!("{what}_step must be > 0")));
    }
    let span = (max - min) / step;
    let count = span.round();
    if (span - count).abs() > 1e-9 * span.max(1.0) {
        return Err(SweepError::Config(format!(
            "{what} range [{min}, {max}] is not a whole number of steps of {step}"
        )));
    }
    Ok((0..=count as usize)
        .map(|k| round_grid(min + k as f64 * step))
        .collect())
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self, SweepError> {
        toml::from_str(text).map_err(|e| SweepError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, SweepError> {
        let text = fs::read_to_string(path).map_err(|e| SweepError::Input(path.to_owned(), e))?;
        Self::from_toml(&text)
    }

    fn axis(&self, values: &Option<Vec<f64>>, min: f64, max: f64, step: f64, what: &str) -> Result<Vec<f64>, SweepError> {
        let mut v = match values {
            Some(v) if v.is_empty() => return Err(SweepError::Config(format!("{what}_values is empty"))),
            Some(v) => v.iter().map(|x| round_grid(*x)).collect(),
            None => inclusive_range(min, max, step, what)?,
        };
        if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(SweepError::Config(format!("{what} values must be finite and >= 0")));
        }
        v.sort_by(f64::total_cmp);
        v.dedup();
        Ok(v)
    }

    pub fn mu_grid(&self) -> Result<Vec<f64>, SweepError> {
        self.axis(&self.mu_values, self.mu_min, self.mu_max, self.mu_step, "mu")
    }

    pub fn alpha_grid(&self) -> Result<Vec<f64>, SweepError> {
        self.axis(&self.alpha_values, self.alpha_min, self.alpha_max, self.alpha_step, "alpha")
    }

    /// All `(mu, alpha)` pairs, sorted by mu then alpha.
    pub fn grid(&self) -> Result<Vec<(f64, f64)>, SweepError> {
        let alphas = self.alpha_grid()?;
        Ok(self
            .mu_grid()?
            .into_iter()
            .flat_map(|m| alphas.iter().map(move |&a| (m, a)))
            .collect())
    }

    /// Hash of everything that affects the numbers in the store.
    pub fn fingerprint(&self) -> Result<String, SweepError> {
        #[derive(Serialize)]
        struct Key<'a> {
            mu: Vec<f64>,
            alpha: Vec<f64>,
            series: &'a SeriesSpec,
        }
        let key = Key {
            mu: self.mu_grid()?,
            alpha: self.alpha_grid()?,
            series: &self.series,
        };
        let text = toml::to_string(&key).map_err(|e| SweepError::Config(e.to_string()))?;
        Ok(format!("{:x}", Sha256::digest(text.as_bytes())))
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        self.grid()?;
        self.series.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Manifest {
    fingerprint: String,
    code_version: String,
    points: usize,
    config: SweepConfig,
}

/// File stem of a grid point.
pub fn point_id(mu: f64, alpha: f64) -> String {
    format!("mu{mu:09.4}_alpha{alpha:07.4}")
}

/// Columns of `summary.csv` after `mu,alpha,status`.
fn value_columns(carriers: &[String]) -> Vec<String> {
    let mut cols: Vec<String> = [
        "objective",
        "total_lcoe",
        "conventional_share",
        "co2_total_t",
        "co2_traced_t",
        "co2_residual",
        "closure_residual",
        "relative_gap",
        "max_primal_residual_scaled",
        "max_dual_residual_scaled",
        "storage_exchange_mwh",
        "iterations",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for c in carriers {
        cols.push(format!("cap_{c}_mw"));
        cols.push(format!("gen_{c}_mwh"));
    }
    cols.push("message".into());
    cols
}

/// One row of the result store.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub mu: f64,
    pub alpha: f64,
    /// `optimal` or `failed`.
    pub status: String,
    /// Values keyed by column name; empty for failed points.
    pub values: BTreeMap<String, f64>,
    pub message: String,
}

impl SummaryRow {
    pub fn get(&self, column: &str) -> Option<f64> {
        self.values.get(column).copied()
    }

    pub fn is_optimal(&self) -> bool {
        self.status == "optimal"
    }

    fn from_outcome(mu: f64, alpha: f64, o: &ScenarioOutcome) -> Self {
        let mut v = BTreeMap::new();
        v.insert("objective".into(), o.solution.objective);
        v.insert("total_lcoe".into(), o.report.total_lcoe);
        v.insert("conventional_share".into(), o.summary.conventional_share);
        v.insert("co2_total_t".into(), o.summary.co2_total);
        v.insert("co2_traced_t".into(), o.allocation.co2_total);
        v.insert("co2_residual".into(), o.co2_residual);
        v.insert("closure_residual".into(), o.report.closure_residual());
        v.insert("relative_gap".into(), o.verify.relative_gap.unwrap_or(f64::NAN));
        v.insert("max_primal_residual_scaled".into(), o.verify.max_primal_residual_scaled);
        v.insert(
            "max_dual_residual_scaled".into(),
            o.verify.max_dual_residual_scaled.unwrap_or(f64::NAN),
        );
        v.insert("storage_exchange_mwh".into(), o.summary.storage_exchange_mwh);
        v.insert("iterations".into(), o.solution.stats.iterations as f64);
        for c in &o.summary.carriers {
            v.insert(format!("cap_{}_mw", c.name), c.capacity_mw);
            v.insert(format!("gen_{}_mwh", c.name), c.generation_mwh);
        }
        SummaryRow {
            mu,
            alpha,
            status: "optimal".into(),
            values: v,
            message: String::new(),
        }
    }

    fn failed(mu: f64, alpha: f64, message: String) -> Self {
        SummaryRow {
            mu,
            alpha,
            status: "failed".into(),
            values: BTreeMap::new(),
            message,
        }
    }

    fn record(&self, columns: &[String]) -> Vec<String> {
        let mut rec = vec![format!("{}", self.mu), format!("{}", self.alpha), self.status.clone()];
        for c in columns {
            if c == "message" {
                rec.push(self.message.clone());
            } else {
                rec.push(self.values.get(c).map_or(String::new(), |v| format!("{v}")));
            }
        }
        rec
    }
}

fn header(columns: &[String]) -> Vec<String> {
    let mut h = vec!["mu".to_owned(), "alpha".into(), "status".into()];
    h.extend(columns.iter().cloned());
    h
}

fn write_rows(path: &Path, columns: &[String], rows: &[SummaryRow]) -> Result<(), SweepError> {
    let tmp = path.with_extension("csv.tmp");
    {
        let file = fs::File::create(&tmp).map_err(|e| SweepError::Output(tmp.clone(), e))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(header(columns))?;
        for r in rows {
            w.write_record(r.record(columns))?;
        }
        w.flush().map_err(|e| SweepError::Output(tmp.clone(), e))?;
    }
    fs::rename(&tmp, path).map_err(|e| SweepError::Output(path.to_owned(), e))
}

/// Reads a `summary.csv`-style file.
pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>, SweepError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| SweepError::Store(path.to_owned(), e.to_string()))?;
    let headers = r.headers()?.clone();
    let bad = |m: String| SweepError::Store(path.to_owned(), m);
    if headers.len() < 3 || &headers[0] != "mu" || &headers[1] != "alpha" || &headers[2] != "status" {
        return Err(bad("expected leading columns mu,alpha,status".into()));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64, SweepError> {
            rec[i].parse().map_err(|_| bad(format!("bad number {:?}", &rec[i])))
        };
        let mut row = SummaryRow {
            mu: num(0)?,
            alpha: num(1)?,
            status: rec[2].to_owned(),
            values: BTreeMap::new(),
            message: String::new(),
        };
        for (i, name) in headers.iter().enumerate().skip(3) {
            if name == "message" {
                row.message = rec[i].to_owned();
            } else if !rec[i].is_empty() {
                row.values.insert(name.to_owned(), num(i)?);
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Counts of a sweep run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepOutcome {
    pub solved: usize,
    pub skipped: usize,
    pub failed: usize,
    pub summary: PathBuf,
}

/// Runs every grid point not yet in the store (all of them with `force`).
pub fn run_sweep(config: &SweepConfig, force: bool) -> Result<SweepOutcome, SweepError> {
    run_sweep_with(config, force, &Tolerances::default())
}

pub fn run_sweep_with(
    config: &SweepConfig,
    force: bool,
    tol: &Tolerances,
) -> Result<SweepOutcome, SweepError> {
    config.validate()?;
    let out = &config.output;
    let points_dir = out.join("points");
    fs::create_dir_all(&points_dir).map_err(|e| SweepError::Output(points_dir.clone(), e))?;

    let grid = config.grid()?;
    let fingerprint = config.fingerprint()?;
    let manifest_path = out.join("manifest.toml");
    if manifest_path.exists() && !force {
        let text = fs::read_to_string(&manifest_path).map_err(|e| SweepError::Input(manifest_path.clone(), e))?;
        let old: Manifest = toml::from_str(&text).map_err(|e| SweepError::Store(manifest_path.clone(), e.to_string()))?;
        if old.fingerprint != fingerprint {
            return Err(SweepError::StaleStore {
                path: out.clone(),
                found: old.fingerprint,
            });
        }
    }
    let manifest = Manifest {
        fingerprint,
        code_version: env!("CARGO_PKG_VERSION").to_owned(),
        points: grid.len(),
        config: config.clone(),
    };
    let text = toml::to_string(&manifest).map_err(|e| SweepError::Config(e.to_string()))?;
    fs::write(&manifest_path, text).map_err(|e| SweepError::Output(manifest_path.clone(), e))?;

    let network = Arc::new(default_network());
    let series = Arc::new(config.series.prepare(&network)?);
    let carriers: Vec<String> = network.carriers.iter().map(|c| c.name.clone()).collect();
    let columns = value_columns(&carriers);

    let todo: Vec<(f64, f64)> = grid
        .iter()
        .copied()
        .filter(|&(m, a)| force || !points_dir.join(format!("{}.csv", point_id(m, a))).exists())
        .collect();
    let skipped = grid.len() - todo.len();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| SweepError::Config(e.to_string()))?;
    let results: Vec<Result<(bool, f64), SweepError>> = pool.install(|| {
        todo.par_iter()
            .map(|&(mu, alpha)| {
                let start = std::time::Instant::now();
                let spec = ScenarioSpec::new(mu, alpha, config.series.clone());
                let outcome = spec
                    .inputs_with(network.clone(), series.clone())
                    .and_then(|inputs| run_scenario(inputs, tol));
                let (row, ok) = match &outcome {
                    Ok(o) => (SummaryRow::from_outcome(mu, alpha, o), true),
                    Err(e) => {
                        log::warn!("mu = {mu}, alpha = {alpha} failed: {e}");
                        (SummaryRow::failed(mu, alpha, e.to_string()), false)
                    }
                };
                if let (Ok(o), true) = (&outcome, config.write_scenarios) {
                    write_scenario_dir(&out.join("scenarios").join(point_id(mu, alpha)), &spec, o)?;
                }
                let path = points_dir.join(format!("{}.csv", point_id(mu, alpha)));
                write_rows(&path, &columns, &[row])?;
                let elapsed = start.elapsed().as_secs_f64();
                log::info!("mu = {mu}, alpha = {alpha}: {} in {elapsed:.1} s", if ok { "optimal" } else { "failed" });
                Ok((ok, elapsed))
            })
            .collect()
    });
    let mut solved = 0;
    let mut failed = 0;
    let mut timings = Vec::new();
    for (r, &(mu, alpha)) in results.into_iter().zip(&todo) {
        let (ok, elapsed) = r?;
        if ok {
            solved += 1;
        } else {
            failed += 1;
        }
        timings.push((mu, alpha, elapsed));
    }
    append_timings(&out.join("timings.csv"), &timings)?;
    let summary = merge_store(out, &grid, &columns)?;
    Ok(SweepOutcome {
        solved,
        skipped,
        failed,
        summary,
    })
}

fn append_timings(path: &Path, timings: &[(f64, f64, f64)]) -> Result<(), SweepError> {
    if timings.is_empty() {
        return Ok(());
    }
    let exists = path.exists();
    let file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| SweepError::Output(path.to_owned(), e))?;
    let mut w = csv::Writer::from_writer(file);
    if !exists {
        w.write_record(["mu", "alpha", "wall_time_s"])?;
    }
    for (m, a, t) in timings {
        w.write_record([format!("{m}"), format!("{a}"), format!("{t:.3}")])?;
    }
    w.flush().map_err(|e| SweepError::Output(path.to_owned(), e))?;
    Ok(())
}

/// Collects the point files of `grid` into `summary.csv`.
fn merge_store(out: &Path, grid: &[(f64, f64)], columns: &[String]) -> Result<PathBuf, SweepError> {
    let mut rows = Vec::with_capacity(grid.len());
    for &(mu, alpha) in grid {
        let path = out.join("points").join(format!("{}.csv", point_id(mu, alpha)));
        let mut r = read_summary(&path)?;
        if r.len() != 1 {
            return Err(SweepError::Store(path, "expected exactly one row".into()));
        }
        rows.push(r.remove(0));
    }
    rows.sort_by(|a, b| a.mu.total_cmp(&b.mu).then(a.alpha.total_cmp(&b.alpha)));
    let path = out.join("summary.csv");
    write_rows(&path, columns, &rows)?;
    Ok(path)
}
