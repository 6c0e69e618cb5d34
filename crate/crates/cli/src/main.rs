use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use norden::cli::{self, Report, RunConfig};
use norden::Error;

/// Exit code for unreadable or invalid configuration.
const EXIT_CONFIG: u8 = 64;
const THREADS_VAR: &str = "NORDEN_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "norden",
    version,
    about = "Checks and classifies natural Norden structures on tangent bundles of space forms"
)]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Report file (directory for `dump`).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Number of sampled tangent points.
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Sampling seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Class membership tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Almost-complex, Norden and nondegeneracy checks.
    Check,
    /// Evaluate the eight class identities.
    Classify,
    /// Run a built-in verification, by id (e.g. 3.2) or name.
    Verify { id: String },
    /// Write coefficient and F tables as CSV.
    Dump,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invalid(_) | Error::Scalar(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load(args: &Args) -> Result<RunConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(n) = args.points {
        cfg.sampling.num_points = n;
    }
    if let Some(s) = args.seed {
        cfg.sampling.seed = s;
    }
    if let Some(t) = args.tol {
        cfg.tolerances.member = Some(t);
    }
    if let Some(o) = &args.output {
        cfg.output = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: &Args) -> Result<Report, Failure> {
    let cfg = load(args)?;
    let report = match &args.command {
        Cmd::Check => cli::cmd_check(&cfg)?,
        Cmd::Classify => cli::cmd_classify(&cfg)?,
        Cmd::Verify { id } => cli::cmd_verify(id, &cfg)?,
        Cmd::Dump => {
            let dir = cfg
                .output
                .clone()
                .ok_or_else(|| Failure::Config("dump needs --output <dir>".into()))?;
            let report = cli::cmd_dump(&cfg, &dir)?;
            let path = dir.join("report.json");
            fs::write(&path, report.to_json())
                .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
            return Ok(report);
        }
    };
    match &cfg.output {
        Some(path) => fs::write(path, report.to_json())
            .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?,
        None => println!("{}", report.to_json()),
    }
    Ok(report)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = std::env::var(THREADS_VAR)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        // ignore a second initialization
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match run(&args) {
        Ok(report) => {
            eprintln!(
                "{}: {:?}",
                report.target.as_deref().unwrap_or("status"),
                report.status
            );
            ExitCode::from(report.status.exit_code() as u8)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
