//! Batch front-end: JSON experiment configs in, CSV tables and validation
//! reports out.

pub mod config;
pub mod scenario;
pub mod table;
pub mod validate;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::config::{ExperimentConfig, ExperimentFile, GridChoice};
use crate::scenario::{run_scenario, Scenario};
use crate::table::emit;
use crate::validate::validate;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Engine(#[from] cris_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("validation failed")]
    ValidationFailed,
}

impl CliError {
    /// 1 for failed validation or runtime errors, 2 for bad configuration.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Engine(cris_core::Error::Config(_)) => 2,
            CliError::Engine(_) | CliError::Io(_) | CliError::ValidationFailed => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cris", version, about = "Continuous-RIS SNR statistics: closed forms and Monte Carlo")]
pub struct Cli {
    /// JSON experiment file; omitted fields take the reference defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Scenario to run.
    #[arg(long, value_enum)]
    pub scenario: Option<Scenario>,
    /// Master seed of the Monte Carlo replicates.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo replicates per sweep point.
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Fixed Monte Carlo grid, e.g. 64x64.
    #[arg(long)]
    pub grid: Option<String>,
    /// CSV destination; defaults to `output_path` of the config, then stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run the cross-oracle checks and print a JSON report.
    #[arg(long)]
    pub validate: bool,
}

impl Cli {
    /// Config file merged with command-line overrides.
    pub fn experiment(&self) -> Result<ExperimentConfig, CliError> {
        let file = match &self.config {
            Some(path) => ExperimentFile::load(path)?,
            None => ExperimentFile::default(),
        };
        let mut cfg = file.resolve()?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(n) = self.replicates {
            cfg.replicates = n;
        }
        if let Some(grid) = &self.grid {
            cfg.grid = GridChoice::parse(grid)?;
            cfg.grid.resolve(&cfg.system.geometry).map_err(|e| CliError::Config(e.to_string()))?;
        }
        if let Some(out) = &self.out {
            cfg.output_path = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    if cli.scenario.is_none() && !cli.validate {
        return Err(CliError::Config("nothing to do: pass --scenario and/or --validate".into()));
    }
    let cfg = cli.experiment()?;
    if cli.validate {
        let report = validate(&cfg);
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        writeln!(std::io::stdout().lock(), "{json}")?;
        if !report.passed {
            return Err(CliError::ValidationFailed);
        }
    }
    if let Some(scenario) = cli.scenario {
        let table = run_scenario(scenario, &cfg)?;
        emit(&table, cfg.output_path.as_deref())?;
    }
    Ok(())
}

pub fn main_with(cli: &Cli) -> ExitCode {
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cris: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
