//! Command-line front end: `estimate`, `sweep`, `compare` and `legacy`.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::cost::{CostError, EnergyParams, InstructionCostTable};
use crate::emit::{self, Format};
use crate::ingest::{self, FilterConfig, IngestError, MeasuredReport};
use crate::legacy::{self, LegacyError};
use crate::opcount::PipelineError;
use crate::report::{estimate_with, EnergyReport};
use crate::scenario::{Modulation, Scenario, ScenarioError};
use crate::Error;

#[derive(Debug, Parser)]
#[command(
    name = "nr-energy",
    version,
    about = "Operation-count energy estimates for NR downlink PHY processing"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-block micro-ops, cycles and energy for one scenario.
    Estimate(RunOpts),
    /// Re-run a scenario over several values of one parameter.
    Sweep {
        #[command(flatten)]
        run: RunOpts,
        /// modulation, n_prb, n_layers or n_slots
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Compare modeled cycles against a measured operator report.
    Compare {
        #[command(flatten)]
        run: RunOpts,
        #[arg(long)]
        measured: PathBuf,
        /// Path allow/deny lists and path-to-block map.
        #[arg(long)]
        filter: Option<PathBuf>,
    },
    /// Evaluate one of the end-to-end RAN power models.
    Legacy {
        /// auer, desset, yan, yu, tombaz, fu-bb or fu-rf
        #[arg(long)]
        model: String,
        #[arg(long)]
        params: PathBuf,
        #[command(flatten)]
        output: OutputOpts,
    },
}

#[derive(Debug, Args)]
pub struct OutputOpts {
    #[arg(long, default_value = "structured-text")]
    pub format: String,
    /// Write here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunOpts {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Defaults to $NR_ENERGY_COST_TABLE, then the bundled table.
    #[arg(long)]
    pub cost_table: Option<PathBuf>,
    /// Overrides the scenario's kappa (J*s^2).
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    /// Overrides the scenario's clock frequency.
    #[arg(long, allow_negative_numbers = true)]
    pub clock_hz: Option<f64>,
    #[command(flatten)]
    pub output: OutputOpts,
}

/// A failure with a stable code, printed as `NRE-<CODE>: <message>`.
#[derive(Debug, Error)]
#[error("NRE-{code}: {message}")]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into().replace('\n', " "),
        }
    }
}

fn cost_code(e: &CostError) -> &'static str {
    match e {
        CostError::Uncovered { .. } => "COVERAGE",
        CostError::Energy { .. } => "ENERGY",
        _ => "COST-TABLE",
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Scenario(_) | Error::Pipeline(PipelineError::Scenario(_)) => "SCENARIO",
            Error::Pipeline(PipelineError::Count(_)) | Error::Count(_) => "COUNT",
            Error::Cost(c) => cost_code(c),
            Error::Legacy(LegacyError::UnknownModel(_)) => "MODEL",
            Error::Legacy(_) => "LEGACY",
            Error::Ingest(IngestError::Cost(c)) => cost_code(c),
            Error::Ingest(IngestError::Config(_)) => "FILTER",
            Error::Ingest(_) => "MEASURED",
            Error::BaseGraph(_) => "BASE-GRAPH",
        };
        CliError::new(code, e.to_string())
    }
}

macro_rules! impl_from_via_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                Error::from(e).into()
            }
        }
    )*};
}

impl_from_via_error!(
    ScenarioError,
    PipelineError,
    CostError,
    LegacyError,
    IngestError
);

fn parse_format(s: &str) -> Result<Format, CliError> {
    s.parse().map_err(|m: String| CliError::new("USAGE", m))
}

/// Cost table resolution: flag, then environment variable, then bundled.
fn load_table(path: Option<&PathBuf>) -> Result<InstructionCostTable, CliError> {
    match path {
        Some(p) => Ok(InstructionCostTable::load(p)?),
        None => Ok(InstructionCostTable::default_table()?),
    }
}

struct Prepared {
    scenario: Scenario,
    table: InstructionCostTable,
    energy: EnergyParams,
    format: Format,
}

fn prepare(run: &RunOpts) -> Result<Prepared, CliError> {
    let format = parse_format(&run.output.format)?;
    let scenario = Scenario::load(&run.scenario)?;
    let energy = EnergyParams::new(
        run.kappa.unwrap_or(scenario.kappa),
        run.clock_hz.unwrap_or(scenario.clock_hz),
    )?;
    let table = load_table(run.cost_table.as_ref())?;
    Ok(Prepared {
        scenario,
        table,
        energy,
        format,
    })
}

fn run_estimate(p: &Prepared) -> Result<EnergyReport, CliError> {
    Ok(estimate_with(&p.scenario, &p.table, p.energy)?)
}

pub const SWEEP_PARAMS: [&str; 4] = ["modulation", "n_prb", "n_layers", "n_slots"];

/// Returns a copy of `base` with `param` set to `value`.
pub fn apply_sweep_value(base: &Scenario, param: &str, value: &str) -> Result<Scenario, CliError> {
    let mut s = base.clone();
    let bad =
        |why: String| CliError::new("SWEEP", format!("invalid {param} value '{value}': {why}"));
    let int = || value.trim().parse::<u64>().map_err(|e| bad(e.to_string()));
    match param {
        "modulation" => s.modulation = value.parse::<Modulation>().map_err(bad)?,
        "n_prb" => s.n_prb = int()?,
        "n_layers" => s.n_layers = int()?,
        "n_slots" => s.n_slots = int()?,
        other => {
            return Err(CliError::new(
                "SWEEP",
                format!(
                    "unknown sweep parameter '{other}' (valid: {})",
                    SWEEP_PARAMS.join(", ")
                ),
            ))
        }
    }
    let violations = s.validate();
    if !violations.is_empty() {
        let msgs: Vec<_> = violations.iter().map(|v| v.to_string()).collect();
        return Err(bad(msgs.join("; ")));
    }
    Ok(s)
}

fn run_sweep(p: &Prepared, param: &str, values: &[String]) -> Result<String, CliError> {
    let scenarios = values
        .iter()
        .map(|v| apply_sweep_value(&p.scenario, param, v).map(|s| (v.trim().to_string(), s)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut runs = Vec::with_capacity(scenarios.len());
    for (v, s) in scenarios {
        let report = estimate_with(&s, &p.table, p.energy)
            .map_err(|e| CliError::new("SWEEP", format!("invalid {param} value '{v}': {e}")))?;
        runs.push((v, report));
    }
    Ok(emit::sweep(param, &runs, p.format))
}

fn run_compare(
    p: &Prepared,
    measured: &PathBuf,
    filter: Option<&PathBuf>,
) -> Result<String, CliError> {
    let cfg = match filter {
        Some(f) => FilterConfig::load(f)?,
        None => FilterConfig::default(),
    };
    let report = MeasuredReport::load(measured, &cfg.filter, &cfg.blocks)?;
    if let Some(w) = report.warning() {
        return Err(CliError::new("EMPTY", w));
    }
    let modeled = run_estimate(p)?;
    let cycles = ingest::measured_cycles(&report, &p.table)?;
    Ok(emit::comparison(
        &ingest::compare(&modeled, &cycles),
        p.format,
    ))
}

fn deliver(text: String, out: Option<&PathBuf>) -> Result<String, CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| {
                CliError::new("OUTPUT", format!("cannot write '{}': {e}", path.display()))
            })?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

/// Executes a parsed command and returns what belongs on standard output.
pub fn execute(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Estimate(run) => {
            let p = prepare(&run)?;
            let text = emit::estimate(&run_estimate(&p)?, p.format);
            deliver(text, run.output.out.as_ref())
        }
        Command::Sweep { run, param, values } => {
            let p = prepare(&run)?;
            deliver(run_sweep(&p, &param, &values)?, run.output.out.as_ref())
        }
        Command::Compare {
            run,
            measured,
            filter,
        } => {
            let p = prepare(&run)?;
            deliver(
                run_compare(&p, &measured, filter.as_ref())?,
                run.output.out.as_ref(),
            )
        }
        Command::Legacy {
            model,
            params,
            output,
        } => {
            let format = parse_format(&output.format)?;
            let o = legacy::evaluate_file(&model, &params)?;
            deliver(emit::legacy(&o, format), output.out.as_ref())
        }
    }
}

/// Parses `args` (including the program name) and executes.
pub fn run<I, T>(args: I) -> Result<String, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| {
        let text = e.to_string();
        let first = text.lines().next().unwrap_or("invalid arguments");
        CliError::new("USAGE", first.trim_start_matches("error: "))
    })?;
    execute(cli)
}

/// Binary entry point. Returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!(
                "{}",
                CliError::new("USAGE", first.trim_start_matches("error: "))
            );
            return 2;
        }
    };
    match execute(cli) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("{e}");
            1
        }
    }
}
