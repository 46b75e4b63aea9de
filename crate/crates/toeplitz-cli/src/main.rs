mod commands;
mod config;
mod eval;
mod plant;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use toeplitz_lowrank::Error;

use commands::{Kind, Report};
use config::RunConfig;

#[derive(Parser)]
#[command(name = "tlr", version, about = "Sublinear low-rank Toeplitz approximation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a planted instance and its ground truth.
    Gen {
        #[arg(long, value_enum, default_value_t = KindArg::Matrix)]
        kind: KindArg,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Recover the dominant frequencies of a sparse-signal file.
    Sfft {
        input: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Fit a low-rank Toeplitz model to a matrix file.
    Lowrank {
        input: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Estimate a covariance from samples of a matrix file or a `.bin` sample file.
    Covest {
        input: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Tabulate reports as CSV.
    Eval {
        reports: Vec<PathBuf>,
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Largest relative error counted as a success.
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Matrix,
    Signal,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1024)]
    d: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 1e-2)]
    delta: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long)]
    samples: Option<usize>,
    /// Place planted frequencies on the half-integer grid.
    #[arg(long)]
    grid: bool,
    /// JSON file whose fields override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; reports go to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run seeds `seed..seed + trials`.
    #[arg(long, default_value_t = 1)]
    trials: usize,
}

impl RunArgs {
    fn resolve(&self) -> toeplitz_lowrank::Result<RunConfig> {
        let cfg = RunConfig {
            seed: self.seed,
            d: self.d,
            k: self.k,
            delta: self.delta,
            epsilon: self.epsilon,
            noise: self.noise,
            samples: self.samples,
            trials: self.trials,
            grid: self.grid,
            ..RunConfig::default()
        };
        match &self.config {
            Some(path) => cfg.with_file(path),
            None => Ok(cfg),
        }
    }
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_DEGRADED: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Invalid(_)
        | Error::Parse { .. }
        | Error::Io(_)
        | Error::Json(_)
        | Error::OverCap { .. }
        | Error::HashRange(_)
        | Error::Filter(_) => EXIT_VALIDATION,
        _ => EXIT_INTERNAL,
    }
}

fn emit(reports: Vec<toeplitz_lowrank::Result<Report>>, out: Option<&Path>) -> Result<bool, Error> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
    }
    let mut degraded = false;
    let mut first_err = None;
    for r in reports {
        match r {
            Ok(report) => {
                degraded |= report.degraded;
                match out {
                    Some(dir) => {
                        let path = dir.join(format!("{}-{}.json", report.command, report.seed));
                        commands::write_atomic(&path, &report)?;
                        eprintln!("wrote {}", path.display());
                    }
                    None => println!("{}", serde_json::to_string(&report)?),
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                first_err.get_or_insert(e);
            }
        }
    }
    match first_err {
        Some(e) => Err(e),
        None => Ok(degraded),
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Gen { kind, run } => {
            let cfg = run.resolve()?;
            let kind = match kind {
                KindArg::Matrix => Kind::Matrix,
                KindArg::Signal => Kind::Signal,
            };
            let out = run.out.clone().unwrap_or_else(|| PathBuf::from("."));
            for path in commands::gen(&cfg, kind, &out)? {
                eprintln!("wrote {}", path.display());
            }
            Ok(false)
        }
        Command::Sfft { input, run } => {
            let cfg = run.resolve()?;
            emit(commands::run_trials(&cfg, |c| commands::sfft(c, &input)), run.out.as_deref())
        }
        Command::Lowrank { input, run } => {
            let cfg = run.resolve()?;
            emit(commands::run_trials(&cfg, |c| commands::lowrank_cmd(c, &input)), run.out.as_deref())
        }
        Command::Covest { input, run } => {
            let cfg = run.resolve()?;
            emit(commands::run_trials(&cfg, |c| commands::covest(c, &input)), run.out.as_deref())
        }
        Command::Eval { reports, truth, tolerance, out } => {
            let csv = eval::eval(&reports, truth.as_deref(), tolerance)?;
            match out {
                Some(path) => std::fs::write(path, csv)?,
                None => print!("{csv}"),
            }
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(EXIT_DEGRADED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
