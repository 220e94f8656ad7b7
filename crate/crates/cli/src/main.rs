//! `leakage-lp`: sweeps, single scenarios and their post-processing.
use clap::{Args, Parser, Subcommand};
use leakage::solver::Tolerances;
use leakage::sweep::{
    export_scenario_mps, load_scenario_dir, render_charts, run_scenario, run_sweep, write_report_files,
    write_scenario_dir, write_trace_files, ScenarioSpec, SeriesSpec, SweepConfig, SweepError, DEFAULT_SEED,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "leakage-lp", version, about = "Carbon leakage under GDP-indexed carbon prices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a (mu, alpha) sweep described by a TOML file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Recompute points already in the store.
        #[arg(long)]
        force: bool,
    },
    /// Solve one scenario and write its directory.
    Solve(SolveArgs),
    /// Recompute the flow tracing of a solved scenario.
    Trace {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Recompute the cost report of a solved scenario.
    Report {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Render SVG charts of a sweep store.
    Charts {
        #[arg(long)]
        store: PathBuf,
    },
    /// Write the LP of a scenario as MPS.
    ExportMps {
        #[arg(long)]
        scenario: PathBuf,
        /// Defaults to `<scenario>/model.mps`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Base carbon price [mu/t].
    #[arg(long)]
    mu: f64,
    #[arg(long)]
    alpha: f64,
    /// Directory with measured time series.
    #[arg(long, conflicts_with = "synthetic_seed")]
    data: Option<PathBuf>,
    #[arg(long)]
    synthetic_seed: Option<u64>,
    /// Sampled hours, 0 for the full year.
    #[arg(long, default_value_t = 336)]
    hours: usize,
    #[arg(long, default_value_t = 4)]
    blocks: usize,
    /// Hours averaged into one step.
    #[arg(long, default_value_t = 1)]
    aggregation: usize,
    #[arg(long)]
    out: PathBuf,
}

fn run(command: Command) -> Result<(), SweepError> {
    match command {
        Command::Sweep { config, force } => {
            let config = SweepConfig::load(&config)?;
            let outcome = run_sweep(&config, force)?;
            println!(
                "{} solved, {} skipped, {} failed; summary in {}",
                outcome.solved,
                outcome.skipped,
                outcome.failed,
                outcome.summary.display()
            );
            if outcome.failed > 0 {
                return Err(SweepError::Solver(leakage::solver::SolverError::Numerical {
                    status: "sweep".into(),
                    detail: format!("{} grid points failed, see summary.csv", outcome.failed),
                }));
            }
        }
        Command::Solve(a) => {
            let series = SeriesSpec {
                data_dir: a.data,
                synthetic_seed: a.synthetic_seed.unwrap_or(DEFAULT_SEED),
                hours: a.hours,
                blocks: a.blocks,
                aggregation: a.aggregation,
            };
            let spec = ScenarioSpec::new(a.mu, a.alpha, series);
            let outcome = run_scenario(spec.inputs()?, &Tolerances::default())?;
            write_scenario_dir(&a.out, &spec, &outcome)?;
            println!("objective {:.6e}", outcome.solution.objective);
            println!("{}", outcome.verify.summary());
            println!("conventional share {:.4}", outcome.summary.conventional_share);
            println!("co2 {:.6e} t", outcome.allocation.co2_total);
        }
        Command::Trace { scenario } => {
            let (_, outcome) = load_scenario_dir(&scenario)?;
            for f in write_trace_files(&scenario, &outcome)? {
                println!("{}", f.display());
            }
        }
        Command::Report { scenario } => {
            let (_, outcome) = load_scenario_dir(&scenario)?;
            for f in write_report_files(&scenario, &outcome)? {
                println!("{}", f.display());
            }
        }
        Command::Charts { store } => {
            for f in render_charts(&store)? {
                println!("{}", f.display());
            }
        }
        Command::ExportMps { scenario, out } => {
            let out = out.unwrap_or_else(|| scenario.join("model.mps"));
            export_scenario_mps(&scenario, &out)?;
            println!("{}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_solver_failure() { 3 } else { 2 })
        }
    }
}
