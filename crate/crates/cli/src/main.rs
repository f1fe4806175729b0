use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use nconn::harness::{self, emit, Command, HarnessError, ModelFile, RunOptions};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Check,
    Geometry,
    AnsatzVerify,
    Solve,
    Residuals,
    LcCompare,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Command {
        match c {
            Cmd::Check => Command::Check,
            Cmd::Geometry => Command::Geometry,
            Cmd::AnsatzVerify => Command::AnsatzVerify,
            Cmd::Solve => Command::Solve,
            Cmd::Residuals => Command::Residuals,
            Cmd::LcCompare => Command::LcCompare,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Output {
    Json,
    Csv,
}

/// Evaluate N-connection geometry models on grids and report residuals.
///
/// Exit codes: 0 pass, 1 tolerance failure, 2 input error, 3 numeric
/// domain failure. NCONN_JOBS sets the default thread count.
#[derive(Debug, Parser)]
#[command(name = "nconn", version)]
struct Cli {
    command: Cmd,
    /// Model file (JSON).
    #[arg(long)]
    model: PathBuf,
    /// Grid override, e.g. `x2=-1:1:9,v=0.5:2,x1=0.3` or `random=50`.
    #[arg(long)]
    grid: Option<String>,
    /// Tolerance override NAME=VALUE; may be repeated.
    #[arg(long = "tol", value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
    #[arg(long, value_enum, default_value = "json")]
    output: Output,
    /// Directory for report.json and CSV tables; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; the output does not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    /// Include wall-clock runtime in the report.
    #[arg(long)]
    timing: bool,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    let v: f64 = v.parse().map_err(|_| format!("'{v}' is not a number"))?;
    Ok((k.to_string(), v))
}

fn jobs(cli: &Cli) -> Result<Option<usize>, String> {
    if let Some(j) = cli.jobs {
        return Ok(Some(j));
    }
    match std::env::var("NCONN_JOBS") {
        Ok(s) if !s.trim().is_empty() => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("NCONN_JOBS: '{s}' is not a thread count")),
        _ => Ok(None),
    }
}

fn fail(e: &HarnessError) -> ExitCode {
    eprintln!("{}", emit::json_string(&e.diagnostic()).trim_end());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = match jobs(&cli) {
        Ok(j) => j,
        Err(msg) => return fail(&HarnessError::Schema(msg)),
    };
    let text = match std::fs::read_to_string(&cli.model) {
        Ok(t) => t,
        Err(source) => {
            return fail(&HarnessError::Io {
                path: cli.model.clone(),
                source,
            })
        }
    };
    let file = match ModelFile::from_json(&text) {
        Ok(f) => f,
        Err(e) => return fail(&e),
    };
    let opts = RunOptions {
        grid: cli.grid.clone(),
        tolerances: cli.tol.clone(),
        seed: cli.seed,
        timing: cli.timing,
    };
    let command: Command = cli.command.into();
    let report = match harness::with_jobs(jobs, || harness::run(command, file, &opts)) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let csv = matches!(cli.output, Output::Csv);
    match &cli.out {
        Some(dir) => {
            if let Err(e) = harness::write_artifacts(&report, dir, csv) {
                return fail(&e);
            }
        }
        None => {
            let bytes = if csv {
                emit::points_csv(&report.table)
            } else {
                harness::to_json(&report).into_bytes()
            };
            let mut out = std::io::stdout().lock();
            if out.write_all(&bytes).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(2);
            }
        }
    }
    if !report.pass {
        eprintln!("nconn {}: {:?}", command.name(), report.status);
    }
    ExitCode::from(report.exit_code() as u8)
}
