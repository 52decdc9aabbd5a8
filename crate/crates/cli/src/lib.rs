//! Experiment harness: configuration loading, single solves, policy
//! comparisons, parameter sweeps, feasible-region scans and property
//! verification, all emitting deterministic JSON or CSV.

pub mod commands;
pub mod config;
pub mod output;
pub mod sweep;
pub mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::ExitCode;
pub use config::{load_config, parse_config, ConfigError, LoadedConfig};
pub use sweep::{SweepParameter, SweepRow, SweepSpec};

#[derive(Debug, Parser)]
#[command(
    name = "wpbs",
    version,
    about = "Throughput-optimal scheduling for wireless-powered backscatter networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Network configuration (TOML). Without it, a single reference sensor.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when omitted or `-`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for every randomized suite.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Enables or disables the shared harvest slot, overriding the file.
    #[arg(long, global = true)]
    pub extension: Option<Switch>,
    /// Frame length in seconds; rates are then reported in bit/s instead
    /// of bits per normalized frame.
    #[arg(long, global = true)]
    pub frame_seconds: Option<f64>,
    /// Solves every sweep point from scratch (and concurrently) instead of
    /// seeding it with the previous optimum.
    #[arg(long, global = true)]
    pub cold_start: bool,
    /// Points per axis for `region`.
    #[arg(long, global = true, default_value_t = 101)]
    pub grid: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximizes network throughput and writes the solution as JSON.
    Solve,
    /// Sweeps one parameter across policies and writes CSV.
    Sweep(SweepArgs),
    /// Scans the feasible region of a single-sensor network and writes CSV.
    Region,
    /// Runs the joint, HTT-only and backscatter-only policies and writes JSON.
    Compare,
    /// Exhaustive lattice search (at most three sensors), written as JSON.
    Oracle {
        /// Lattice step is 1/resolution.
        #[arg(long, default_value_t = verify::ORACLE_RESOLUTION)]
        resolution: usize,
    },
    /// Runs the concavity, derivative, KKT and oracle property suites.
    Verify,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// backscatter_rate (bit/s), sensor_count, source_power_dbm or harvest_efficiency.
    #[arg(long)]
    pub param: SweepParameter,
    /// First value of the parameter.
    #[arg(long)]
    pub from: f64,
    /// Last value of the parameter, included in the sweep.
    #[arg(long)]
    pub to: f64,
    /// Number of evenly spaced values, at least 2.
    #[arg(long)]
    pub steps: usize,
    /// Comma-separated subset of proposed, HM, BM.
    #[arg(long, value_delimiter = ',', default_value = "proposed,HM,BM")]
    pub policies: Vec<String>,
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::Failure as i32
            } else {
                ExitCode::Success as i32
            };
        }
    };
    commands::execute(&cli) as i32
}
