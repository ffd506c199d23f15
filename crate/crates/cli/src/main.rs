//! `ashgeo`: evaluate Ashtekar variables, run identity suites and compute
//! holonomies for a model described in a JSON config.

// Index loops mirror the tensor notation; negated comparisons also reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Format, Overrides, RawConfig, RawPathFile};
use error::CliError;

/// Environment variable capping the worker thread count.
const THREADS_ENV: &str = "ASHGEO_THREADS";

#[derive(Parser)]
#[command(name = "ashgeo", version, about = "Ashtekar variables on coordinate charts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON).
    #[arg(short, long)]
    config: PathBuf,
    /// Output format: json or csv.
    #[arg(long)]
    format: Option<Format>,
    /// Seed for sampled points and suite samples.
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance override, `SUITE=EPS` (repeatable).
    #[arg(long = "tol", value_name = "SUITE=EPS")]
    tol: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate q, e, E, K, W, Γ, k and A at the sample points.
    Eval {
        #[command(flatten)]
        common: Common,
    },
    /// Run identity suites and report the largest error of each.
    Check {
        #[command(flatten)]
        common: Common,
        /// Only run this suite (repeatable).
        #[arg(long)]
        suite: Vec<String>,
    },
    /// SO(3) and SU(2) holonomies along paths, with the double-cover residual.
    Holonomy {
        #[command(flatten)]
        common: Common,
        /// Path file (JSON).
        #[arg(long)]
        path: PathBuf,
    },
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let n: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::invalid(THREADS_ENV, format!("expected a positive integer, got `{value}`")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::invalid(THREADS_ENV, e))
}

fn load(common: &Common, suites: Vec<String>) -> Result<config::RunConfig, CliError> {
    let raw: RawConfig = config::read_json(&common.config, "config")?;
    raw.validate(&Overrides {
        seed: common.seed,
        format: common.format,
        suites,
        tolerances: common.tol.clone(),
    })
}

fn run(cli: Cli) -> Result<(String, bool), CliError> {
    let pool = thread_pool()?;
    match cli.command {
        Command::Eval { common } => {
            let cfg = load(&common, Vec::new())?;
            pool.install(|| commands::eval(&cfg)).map(|out| (out, true))
        }
        Command::Check { common, suite } => {
            let cfg = load(&common, suite)?;
            pool.install(|| commands::check(&cfg))
        }
        Command::Holonomy { common, path } => {
            let mut tolerance = None;
            let mut rest = Vec::new();
            for item in &common.tol {
                match item.split_once('=') {
                    Some(("holonomy", v)) => {
                        let v: f64 = v
                            .trim()
                            .parse()
                            .ok()
                            .filter(|v: &f64| *v > 0.0)
                            .ok_or_else(|| CliError::invalid("--tol", format!("bad holonomy tolerance `{v}`")))?;
                        tolerance = Some(v);
                    }
                    _ => rest.push(item.clone()),
                }
            }
            let common = Common { tol: rest, ..common };
            let cfg = load(&common, Vec::new())?;
            let raw: RawPathFile = config::read_json(&path, "path")?;
            let input = raw.validate(&cfg.model.chart)?;
            pool.install(|| commands::holonomy(&cfg, &input, tolerance))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((text, passed)) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(error::EXIT_NUMERIC);
            }
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(error::EXIT_NUMERIC)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
