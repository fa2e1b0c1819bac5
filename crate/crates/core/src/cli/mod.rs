//! The `edtc` command-line tool.
//!
//! Exit codes: 0 on success, 1 when the input is rejected, 2 when a run fails
//! after its input was accepted. A sweep where fewer than 90% of cells
//! succeed counts as a failed run.

mod commands;
mod config;
mod figures;
mod output;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{parse_config, AxisSpec, ParamsConfig, SweepConfig, SweepKind, SweepPlan};
pub use figures::Figure;
pub use output::{RunManifest, CSV_SCHEMA};

use crate::error::Error;

#[derive(Debug, Parser)]
#[command(name = "edtc", version, about = "Simulate period doubling in a driven dissipative two-level system")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve a sequence file and write the stroboscopic series.
    Simulate(SimulateArgs),
    /// Spectrum, crystalline fraction and line width of a series.
    Spectrum(SpectrumArgs),
    /// Run a parameter sweep described by a TOML file.
    Sweep(SweepArgs),
    /// Fit y = a*d^l + b to (d, y) points.
    Fit(FitArgs),
    /// Regenerate the dataset behind one of the canned figures.
    Figures(FiguresArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Sequence file.
    pub input: PathBuf,
    /// Override the number of cycles (0 writes only the initial state).
    #[arg(long)]
    pub cycles: Option<u64>,
    /// Also write an intra-cycle trace with this many points per segment.
    #[arg(long, value_name = "POINTS")]
    pub trace: Option<usize>,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Let relaxation act during pulses as well as delays.
    #[arg(long)]
    pub dissipative_pulse: bool,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Series CSV (needs an `mz` column) or a sequence file.
    pub input: PathBuf,
    /// Zero-padding length (power of two, at least the sample count).
    #[arg(long)]
    pub pad: Option<usize>,
    /// Half-width of the crystalline-fraction window in unpadded bins.
    #[arg(long, default_value_t = crate::analysis::DEFAULT_WINDOW_BINS)]
    pub window_bins: usize,
    /// Cycle override when the input is a sequence file.
    #[arg(long)]
    pub cycles: Option<u64>,
    #[arg(long)]
    pub dissipative_pulse: bool,
    /// Output prefix; writes PREFIX.csv and PREFIX.json.
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep configuration (TOML).
    pub config: PathBuf,
    /// Output prefix; writes PREFIX.csv and PREFIX.json.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Override the number of cycles per cell.
    #[arg(long)]
    pub cycles: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(short, long, env = "EDTC_JOBS", default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV of points; the first two columns are used unless --x/--y name others.
    pub points: PathBuf,
    /// Model to fit; only the power law with offset is supported.
    #[arg(long, default_value = "a*d^l+b")]
    pub model: String,
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long)]
    pub y: Option<String>,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FiguresArgs {
    #[arg(value_enum)]
    pub name: Figure,
    /// Output directory.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Override the cycle count of every run in the bundle.
    #[arg(long)]
    pub cycles: Option<u64>,
    #[arg(short, long, env = "EDTC_JOBS", default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad input; exit code 1.
    Input(String),
    /// The run itself failed; exit code 2.
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Run(_) => 2,
        }
    }

    pub(crate) fn output(e: impl fmt::Display) -> Self {
        CliError::Run(format!("cannot write output: {e}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Run(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::TooFewSamples { .. }
            | Error::FitNotConverged { .. }
            | Error::NonPhysicalState(_)
            | Error::ExponentialNotConverged => CliError::Run(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Spectrum(a) => commands::spectrum(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Figures(a) => figures::run(&a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("edtc: {e}");
            e.exit_code()
        }
    }
}
