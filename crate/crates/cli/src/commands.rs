//! Subcommand implementations and their exit codes.

use wpbs_core::{compare, grid_oracle, sample_region, solve, Error, Policy, SolveStatus};

use crate::config::{load_config, parse_config, ConfigError, LoadedConfig};
use crate::output::{region_csv, to_json, CompareDoc, RateScale, Sink, SolutionDoc};
use crate::sweep::{self, SweepSpec};
use crate::verify;
use crate::{Cli, Command, CommonArgs, SweepArgs, Switch};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(i32)]
pub enum ExitCode {
    Success = 0,
    /// I/O, configuration or usage error.
    Failure = 1,
    Infeasible = 2,
    /// The solver stopped without a KKT certificate.
    NotConverged = 3,
    /// The network is too large for the command.
    Unsupported = 4,
    VerificationFailed = 5,
}

impl ExitCode {
    pub fn for_status(status: SolveStatus) -> Self {
        match status {
            SolveStatus::Optimal => ExitCode::Success,
            SolveStatus::Infeasible => ExitCode::Infeasible,
            SolveStatus::MaxIterations | SolveStatus::BoundaryDegenerate => ExitCode::NotConverged,
        }
    }
}

/// What a command reports on failure.
pub(crate) enum Failure {
    Exit(ExitCode, String),
}

type Outcome = Result<ExitCode, Failure>;

fn fail(code: ExitCode, message: impl Into<String>) -> Failure {
    Failure::Exit(code, message.into())
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        fail(ExitCode::Failure, e.to_string())
    }
}

fn core_failure(e: Error) -> Failure {
    match e {
        Error::UnsupportedDimension { .. } => fail(ExitCode::Unsupported, e.to_string()),
        _ => fail(ExitCode::Failure, e.to_string()),
    }
}

fn write(sink: &Sink, text: &str) -> Result<(), Failure> {
    sink.write(text)
        .map_err(|e| fail(ExitCode::Failure, format!("cannot write output: {e}")))
}

pub fn execute(cli: &Cli) -> ExitCode {
    let result = (|| {
        let loaded = load(&cli.common)?;
        let scale = rate_scale(&cli.common)?;
        let sink = Sink::new(cli.common.out.as_deref());
        match &cli.command {
            Command::Solve => cmd_solve(&loaded, scale, &sink),
            Command::Sweep(args) => cmd_sweep(&loaded, args, cli.common.cold_start, scale, &sink),
            Command::Region => cmd_region(&loaded, cli.common.grid, scale, &sink),
            Command::Compare => cmd_compare(&loaded, scale, &sink),
            Command::Oracle { resolution } => cmd_oracle(&loaded, *resolution, scale, &sink),
            Command::Verify => cmd_verify(&loaded, cli.common.seed, &sink),
        }
    })();
    match result {
        Ok(code) => code,
        Err(Failure::Exit(code, message)) => {
            eprintln!("wpbs: {message}");
            code
        }
    }
}

fn load(common: &CommonArgs) -> Result<LoadedConfig, Failure> {
    let loaded = match &common.config {
        Some(path) => load_config(path)?,
        None => parse_config("[network]\nsensor_count = 1\n", "<built-in reference network>")?,
    };
    Ok(loaded.with_extension(common.extension.map(|s| s == Switch::On)))
}

fn rate_scale(common: &CommonArgs) -> Result<RateScale, Failure> {
    match common.frame_seconds {
        Some(t) if !(t.is_finite() && t > 0.0) => Err(fail(
            ExitCode::Failure,
            format!("--frame-seconds must be positive, got {t}"),
        )),
        other => Ok(RateScale::new(other)),
    }
}

pub(crate) fn cmd_solve(loaded: &LoadedConfig, scale: RateScale, sink: &Sink) -> Outcome {
    let solution = solve(&loaded.network, &loaded.settings).map_err(core_failure)?;
    write(sink, &to_json(&SolutionDoc::new(&solution, scale, &loaded.assumed)))?;
    let code = ExitCode::for_status(solution.status);
    match (code, solution.infeasibility) {
        (ExitCode::Infeasible, Some(id)) => eprintln!("wpbs: infeasible: {id} cannot be met"),
        (ExitCode::NotConverged, _) => eprintln!("wpbs: solver stopped with status {}", solution.status.as_str()),
        _ => {}
    }
    Ok(code)
}

pub(crate) fn cmd_oracle(loaded: &LoadedConfig, resolution: usize, scale: RateScale, sink: &Sink) -> Outcome {
    let solution = grid_oracle(&loaded.network, resolution).map_err(core_failure)?;
    write(sink, &to_json(&SolutionDoc::new(&solution, scale, &loaded.assumed)))?;
    Ok(ExitCode::for_status(solution.status))
}

pub(crate) fn cmd_compare(loaded: &LoadedConfig, scale: RateScale, sink: &Sink) -> Outcome {
    let results = compare(&loaded.network, &loaded.settings).map_err(core_failure)?;
    write(sink, &to_json(&CompareDoc::new(&results, scale, &loaded.assumed)))?;
    Ok(ExitCode::Success)
}

pub(crate) fn cmd_region(loaded: &LoadedConfig, grid: usize, scale: RateScale, sink: &Sink) -> Outcome {
    let points = sample_region(&loaded.network, grid).map_err(core_failure)?;
    write(sink, &region_csv(&points, scale))?;
    sink.write_assumed(&loaded.assumed)
        .map_err(|e| fail(ExitCode::Failure, format!("cannot write assumed values: {e}")))?;
    Ok(ExitCode::Success)
}

pub(crate) fn cmd_sweep(
    loaded: &LoadedConfig,
    args: &SweepArgs,
    cold_start: bool,
    scale: RateScale,
    sink: &Sink,
) -> Outcome {
    let policies = args
        .policies
        .iter()
        .map(|name| {
            Policy::parse(name.trim()).ok_or_else(|| fail(ExitCode::Failure, format!("unknown policy `{name}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let spec = SweepSpec::new(args.param, args.from, args.to, args.steps, &policies)
        .map_err(|m| fail(ExitCode::Failure, m))?;
    let rows = sweep::run(&loaded.network, &loaded.settings, &spec, !cold_start).map_err(core_failure)?;
    write(sink, &sweep::to_csv(&rows, spec.parameter, scale))?;
    sink.write_assumed(&loaded.assumed)
        .map_err(|e| fail(ExitCode::Failure, format!("cannot write assumed values: {e}")))?;
    Ok(ExitCode::Success)
}

pub(crate) fn cmd_verify(loaded: &LoadedConfig, seed: u64, sink: &Sink) -> Outcome {
    let reports = verify::run_all(&loaded.network, &loaded.settings, seed);
    let mut text = String::new();
    for r in &reports {
        text.push_str(&r.to_string());
        text.push('\n');
    }
    write(sink, &text)?;
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    if failed.is_empty() {
        Ok(ExitCode::Success)
    } else {
        Err(fail(
            ExitCode::VerificationFailed,
            format!("verification failed: {}", failed.join(", ")),
        ))
    }
}
