//! Command-line orchestration for selmerlab: enumeration, per-curve records,
//! family statistics and verification suites.

pub mod compute;
pub mod driver;
pub mod stats_cmd;
pub mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use selmerlab::{FamilyWindow, Orientation};

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    Failure = 1,
    BadConfig = 2,
    Io = 3,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(io::Error),
    Failed(String),
}

impl CliError {
    pub fn status(&self) -> Status {
        match self {
            CliError::Config(_) => Status::BadConfig,
            CliError::Io(_) => Status::Io,
            CliError::Failed(_) => Status::Failure,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(e) => CliError::Io(e),
            other => CliError::Io(io::Error::other(format!("{other:?}"))),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl From<selmerlab::Error> for CliError {
    fn from(e: selmerlab::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Tsv,
}

#[derive(Debug, Parser)]
#[command(name = "selmerlab", version, about = "Tamagawa ratios over the family y^2 = x^3 + Ax^2 + Bx")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count E(X) and compare with 4 X^{3/2} / zeta(6).
    Enumerate(RunArgs),
    /// Write one record per curve.
    Compute(RunArgs),
    /// Moments of (g1, g2) against the model, and the distribution of t.
    Stats(RunArgs),
    /// Run the invariant suites; exit 1 on any failure.
    Verify(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Height bound X: |A| <= X and B^2 <= X.
    #[arg(long, default_value_t = 1000)]
    pub xmax: u64,
    /// Prime cutoff z for g1, g2 in the statistics.
    #[arg(long, default_value_t = selmerlab::stats::DEFAULT_Z)]
    pub zcut: u64,
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, env = "SELMERLAB_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Process a uniform random subset of this many curves.
    #[arg(long)]
    pub sample: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also run the descent and record Selmer dimensions.
    #[arg(long)]
    pub with_descent: bool,
    /// Keep curves with A^2 - 4B a square (never used in the moments).
    #[arg(long)]
    pub include_square_disc: bool,
    /// Histogram of standardized t as TSV (stats).
    #[arg(long)]
    pub hist: Option<PathBuf>,
    #[arg(long, hide = true)]
    pub swap_orientation: bool,
}

/// Validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub xmax: u64,
    pub zcut: u64,
    pub threads: usize,
    pub sample: Option<u64>,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub with_descent: bool,
    pub include_square_disc: bool,
    pub hist: Option<PathBuf>,
    pub orientation: Orientation,
}

impl RunConfig {
    pub fn from_args(a: &RunArgs) -> CliResult<Self> {
        if a.xmax < 1 {
            return Err(CliError::Config("--xmax must be at least 1".into()));
        }
        if a.xmax > 1 << 40 {
            return Err(CliError::Config("--xmax above 2^40 overflows the coefficients".into()));
        }
        if a.zcut < 3 {
            return Err(CliError::Config("--zcut must be at least 3".into()));
        }
        Ok(RunConfig {
            xmax: a.xmax,
            zcut: a.zcut,
            threads: a.threads,
            sample: a.sample,
            seed: a.seed,
            format: a.format,
            out: a.out.clone(),
            with_descent: a.with_descent,
            include_square_disc: a.include_square_disc,
            hist: a.hist.clone(),
            orientation: if a.swap_orientation {
                Orientation::Swapped
            } else {
                Orientation::Standard
            },
        })
    }

    pub fn window(&self) -> FamilyWindow {
        FamilyWindow {
            x: self.xmax,
            include_square_disc: self.include_square_disc,
        }
    }

    pub fn pool(&self) -> CliResult<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))
    }

    pub fn writer(&self) -> CliResult<Box<dyn Write>> {
        open_output(self.out.as_ref())
    }
}

pub fn open_output(path: Option<&PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

type Handler = fn(&RunConfig, &mut dyn Write) -> CliResult<()>;

/// Runs a parsed command line, reporting to `stderr`.
pub fn run(cli: Cli, stderr: &mut dyn Write) -> Status {
    let (args, cmd): (&RunArgs, Handler) = match &cli.command {
        Command::Enumerate(a) => (a, compute::cmd_enumerate),
        Command::Compute(a) => (a, compute::cmd_compute),
        Command::Stats(a) => (a, stats_cmd::cmd_stats),
        Command::Verify(a) => (a, verify::cmd_verify),
    };
    let result = RunConfig::from_args(args).and_then(|cfg| cmd(&cfg, stderr));
    match result {
        Ok(()) => Status::Success,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.status()
        }
    }
}
