//! One scenario: description, solve, post-processing and its directory.
use super::SweepError;
use crate::formulation::{build_lp, FormulatedLp, FormulationOptions, ScenarioInputs};
use crate::metrics::{
    cost_report, system_summary, write_links_csv, write_report_csv, write_summary_csv, CostReport,
    SystemSummary,
};
use crate::model::{default_network, load_timeseries, synthetic_year, DataPaths, Network, TimeSeriesSet};
use crate::pricing::PricingScheme;
use crate::solver::{
    export_mps, import_solution, solve, verify, write_solution, Solution, Tolerances, VerifyReport,
};
use crate::tracing::{
    allocate_co2, generation_co2, write_allocation_csv, write_co2_by_link_csv,
    write_co2_by_sink_csv, AllocationResult,
};
use serde::{Deserialize, Serialize};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const DEFAULT_SEED: u64 = 42;

/// Where the time series come from and how they are reduced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeriesSpec {
    /// Directory with `demand.csv`, `capacity_factor_<carrier>.csv`, ...
    pub data_dir: Option<PathBuf>,
    /// Seed of the synthetic year, used when `data_dir` is unset.
    pub synthetic_seed: u64,
    /// Sampled hours; 0 keeps the full series.
    pub hours: usize,
    /// Number of evenly spaced blocks the sampled hours are drawn in.
    pub blocks: usize,
    /// Hours averaged into one step.
    pub aggregation: usize,
}

impl Default for SeriesSpec {
    fn default() -> Self {
        SeriesSpec {
            data_dir: None,
            synthetic_seed: DEFAULT_SEED,
            hours: 336,
            blocks: 4,
            aggregation: 1,
        }
    }
}

impl SeriesSpec {
    /// The full synthetic year at the given seed.
    pub fn full_year(seed: u64) -> Self {
        SeriesSpec {
            synthetic_seed: seed,
            hours: 0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.aggregation == 0 {
            return Err(SweepError::Config("aggregation must be >= 1".into()));
        }
        if self.hours > 0 {
            if self.blocks == 0 || self.hours % self.blocks != 0 {
                return Err(SweepError::Config(format!(
                    "hours {} must be a positive multiple of blocks {}",
                    self.hours, self.blocks
                )));
            }
            if (self.hours / self.blocks) % self.aggregation != 0 {
                return Err(SweepError::Config(format!(
                    "block length {} must be a multiple of aggregation {}",
                    self.hours / self.blocks,
                    self.aggregation
                )));
            }
        }
        Ok(())
    }

    /// Loads or generates the series and applies sampling and aggregation.
    pub fn prepare(&self, network: &Network) -> Result<TimeSeriesSet, SweepError> {
        self.validate()?;
        let full = match &self.data_dir {
            Some(dir) => load_timeseries(&DataPaths::in_dir(dir, network), network)?,
            None => synthetic_year(network, self.synthetic_seed),
        };
        let sampled = if self.hours > 0 && self.hours < full.len() {
            full.sample_blocks(self.blocks, self.hours / self.blocks)?
        } else {
            full
        };
        Ok(if self.aggregation > 1 {
            sampled.aggregate(self.aggregation)?
        } else {
            sampled
        })
    }
}

/// Everything needed to rebuild one scenario's LP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub mu: f64,
    pub alpha: f64,
    #[serde(default)]
    pub series: SeriesSpec,
    #[serde(default)]
    pub options: FormulationOptions,
}

impl ScenarioSpec {
    pub fn new(mu: f64, alpha: f64, series: SeriesSpec) -> Self {
        let options = FormulationOptions {
            timestep_weight: series.aggregation as f64,
            ..FormulationOptions::default()
        };
        ScenarioSpec {
            mu,
            alpha,
            series,
            options,
        }
    }

    /// Builds inputs on the default network from freshly prepared series.
    pub fn inputs(&self) -> Result<ScenarioInputs, SweepError> {
        let network = Arc::new(default_network());
        let series = Arc::new(self.series.prepare(&network)?);
        self.inputs_with(network, series)
    }

    /// Builds inputs sharing already prepared network and series.
    pub fn inputs_with(
        &self,
        network: Arc<Network>,
        series: Arc<TimeSeriesSet>,
    ) -> Result<ScenarioInputs, SweepError> {
        let pricing = PricingScheme::for_regions(&network.regions, self.mu, self.alpha)?;
        Ok(ScenarioInputs::new(
            network,
            series,
            pricing,
            self.options.clone(),
        )?)
    }
}

/// A solved and post-processed scenario.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub inputs: ScenarioInputs,
    pub formulated: FormulatedLp,
    pub solution: Solution,
    pub verify: VerifyReport,
    pub report: CostReport,
    pub summary: SystemSummary,
    pub allocation: AllocationResult,
    /// `|traced - generation-side| / max(1, generation-side)` CO2.
    pub co2_residual: f64,
}

/// Formulates, solves, traces and accounts one scenario.
pub fn run_scenario(inputs: ScenarioInputs, tol: &Tolerances) -> Result<ScenarioOutcome, SweepError> {
    let formulated = build_lp(&inputs)?;
    let solution = solve(&formulated.lp, tol)?;
    analyse(inputs, formulated, solution)
}

/// Post-processing of an available solution.
pub fn analyse(
    inputs: ScenarioInputs,
    formulated: FormulatedLp,
    solution: Solution,
) -> Result<ScenarioOutcome, SweepError> {
    let verify = verify(&formulated.lp, &solution);
    let mut report = cost_report(&inputs, &formulated, &solution)?;
    let summary = system_summary(&inputs, &formulated, &solution);
    let allocation = allocate_co2(&inputs, &formulated, &solution)?;
    report.attach_co2(&allocation);
    let generated = generation_co2(&inputs, &formulated, &solution);
    let co2_residual = (allocation.co2_total - generated).abs() / generated.abs().max(1.0);
    Ok(ScenarioOutcome {
        inputs,
        formulated,
        solution,
        verify,
        report,
        summary,
        allocation,
        co2_residual,
    })
}

pub const SPEC_FILE: &str = "scenario.toml";
pub const SOLUTION_FILE: &str = "solution.csv";

fn create(path: &Path) -> Result<BufWriter<File>, SweepError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| SweepError::Output(path.to_owned(), e))
}

/// Writes `scenario.toml` and the solution, enough to reload the scenario.
pub fn write_scenario_core(
    dir: &Path,
    spec: &ScenarioSpec,
    formulated: &FormulatedLp,
    solution: &Solution,
) -> Result<(), SweepError> {
    fs::create_dir_all(dir).map_err(|e| SweepError::Output(dir.to_owned(), e))?;
    let text = toml::to_string(spec).map_err(|e| SweepError::Config(e.to_string()))?;
    fs::write(dir.join(SPEC_FILE), text).map_err(|e| SweepError::Output(dir.join(SPEC_FILE), e))?;
    write_solution(&formulated.lp, solution, create(&dir.join(SOLUTION_FILE))?)?;
    Ok(())
}

/// Writes `report.csv`, `links.csv`, `summary.csv` and `verify.txt`.
pub fn write_report_files(dir: &Path, outcome: &ScenarioOutcome) -> Result<Vec<PathBuf>, SweepError> {
    let net = &*outcome.inputs.network;
    let files = [dir.join("report.csv"), dir.join("links.csv"), dir.join("summary.csv"), dir.join("verify.txt")];
    write_report_csv(&outcome.report, net, create(&files[0])?)?;
    write_links_csv(&outcome.report, net, create(&files[1])?)?;
    write_summary_csv(&outcome.summary, &outcome.report, create(&files[2])?)?;
    let text = format!(
        "{}\nclosure residual {:.3e}\nco2 residual {:.3e}\n",
        outcome.verify.summary(),
        outcome.report.closure_residual(),
        outcome.co2_residual
    );
    fs::write(&files[3], text).map_err(|e| SweepError::Output(files[3].clone(), e))?;
    Ok(files.to_vec())
}

/// Writes `allocation.csv`, `co2_by_sink.csv` and `co2_by_link.csv`.
pub fn write_trace_files(dir: &Path, outcome: &ScenarioOutcome) -> Result<Vec<PathBuf>, SweepError> {
    let net = &*outcome.inputs.network;
    let files = [dir.join("allocation.csv"), dir.join("co2_by_sink.csv"), dir.join("co2_by_link.csv")];
    write_allocation_csv(&outcome.allocation, net, create(&files[0])?)?;
    write_co2_by_sink_csv(&outcome.allocation, net, create(&files[1])?)?;
    write_co2_by_link_csv(&outcome.allocation, net, create(&files[2])?)?;
    Ok(files.to_vec())
}

/// Writes the full scenario directory.
pub fn write_scenario_dir(dir: &Path, spec: &ScenarioSpec, outcome: &ScenarioOutcome) -> Result<(), SweepError> {
    write_scenario_core(dir, spec, &outcome.formulated, &outcome.solution)?;
    write_report_files(dir, outcome)?;
    write_trace_files(dir, outcome)?;
    Ok(())
}

/// Reads `scenario.toml` of a scenario directory.
pub fn read_spec(dir: &Path) -> Result<ScenarioSpec, SweepError> {
    let path = dir.join(SPEC_FILE);
    let text = fs::read_to_string(&path).map_err(|e| SweepError::Input(path.clone(), e))?;
    toml::from_str(&text).map_err(|e| SweepError::Config(format!("{}: {e}", path.display())))
}

/// Rebuilds the LP of a scenario directory.
pub fn load_formulation(dir: &Path) -> Result<(ScenarioSpec, ScenarioInputs, FormulatedLp), SweepError> {
    let spec = read_spec(dir)?;
    let inputs = spec.inputs()?;
    let formulated = build_lp(&inputs)?;
    Ok((spec, inputs, formulated))
}

/// Rebuilds a scenario from its directory and imports its solution.
pub fn load_scenario_dir(dir: &Path) -> Result<(ScenarioSpec, ScenarioOutcome), SweepError> {
    let (spec, inputs, formulated) = load_formulation(dir)?;
    let solution = import_solution(&formulated.lp, &dir.join(SOLUTION_FILE))?;
    Ok((spec, analyse(inputs, formulated, solution)?))
}

/// Writes the scenario's LP as free-format MPS.
pub fn export_scenario_mps(dir: &Path, path: &Path) -> Result<(), SweepError> {
    let (_, _, formulated) = load_formulation(dir)?;
    export_mps(&formulated.lp, path)?;
    Ok(())
}
