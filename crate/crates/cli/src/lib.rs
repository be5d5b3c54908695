//! Command-line experiments over `G_n(C^{n+m})`.
//!
//! Every subcommand renders a report to a string and reports whether its
//! mathematical checks passed; `main` maps that onto the exit-code contract
//! (0 pass, 1 check failed, 2 usage error).

mod commands;
mod render;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use grassgeo::{GeoError, Shape};

pub use commands::{cut_test, diastasis_sweep, geodesic, conjugate_scan, seven};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Input(GeoError),
    #[error("evaluation failed: {0}")]
    Math(GeoError),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Math(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "grassgeo", version, about = "Geodesics, conjugate loci and coherent states on complex Grassmannians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Plane dimension.
    #[arg(long)]
    pub n: usize,
    /// Codimension.
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a geodesic from the base plane.
    Geodesic {
        #[command(flatten)]
        common: CommonArgs,
        /// Initial velocity as a JSON n×m array of [re, im] pairs.
        #[arg(long, conflicts_with = "random", required_unless_present = "random")]
        b: Option<String>,
        /// Draw a unit-norm velocity from the seed.
        #[arg(long)]
        random: bool,
    },
    /// Compare predicted conjugate times with a Jacobian rank scan.
    ConjugateScan {
        #[command(flatten)]
        common: CommonArgs,
        /// Unit direction of length min(n, m) as a JSON array.
        #[arg(long, conflicts_with = "random", required_unless_present = "random")]
        h: Option<String>,
        #[arg(long)]
        random: bool,
        #[arg(long = "rank-tol", default_value_t = grassgeo::loci::RANK_TOL)]
        rank_tol: f64,
        #[arg(long = "tol-angle", default_value_t = grassgeo::loci::TOL_ANGLE)]
        tol_angle: f64,
    },
    /// Compute the seven invariants that all equal C(n+m, n).
    Seven {
        #[command(flatten)]
        common: CommonArgs,
        /// Energy weights as a JSON array of n+m distinct reals.
        #[arg(long, conflicts_with = "auto", required_unless_present = "auto")]
        weights: Option<String>,
        /// Use the weights 1, 2, .., n+m.
        #[arg(long)]
        auto: bool,
    },
    /// Check D = -2 log cos θ on random chart pairs.
    DiastasisSweep {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Check the cut locus on random geodesics and planes.
    CutTest {
        #[command(flatten)]
        common: CommonArgs,
    },
}

/// Validated form of [`CommonArgs`].
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub shape: Shape,
    pub seed: u64,
    pub tol: f64,
    pub t_max: Option<f64>,
    pub samples: usize,
    pub format: Format,
}

impl RunConfig {
    pub fn from_args(args: &CommonArgs, default_samples: usize, default_format: Format) -> Result<Self, CliError> {
        let shape = Shape::new(args.n, args.m).map_err(|e| CliError::Usage(e.to_string()))?;
        let samples = args.samples.unwrap_or(default_samples);
        if samples == 0 {
            return Err(CliError::Usage("--samples must be at least 1".into()));
        }
        if !(args.tol > 0.0) {
            return Err(CliError::Usage("--tol must be positive".into()));
        }
        if let Some(t) = args.t_max {
            if !(t > 0.0) || !t.is_finite() {
                return Err(CliError::Usage("--t-max must be positive".into()));
            }
        }
        Ok(Self {
            shape,
            seed: args.seed,
            tol: args.tol,
            t_max: args.t_max,
            samples,
            format: args.format.unwrap_or(default_format),
        })
    }
}

/// Rendered output of one subcommand.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub body: String,
    pub passed: bool,
}

impl Command {
    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Geodesic { common, .. }
            | Command::ConjugateScan { common, .. }
            | Command::Seven { common, .. }
            | Command::DiastasisSweep { common }
            | Command::CutTest { common } => common,
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Geodesic { common, b, random } => {
            let config = RunConfig::from_args(common, 21, Format::Json)?;
            geodesic(&config, b.as_deref().filter(|_| !random))
        }
        Command::ConjugateScan {
            common,
            h,
            random,
            rank_tol,
            tol_angle,
        } => {
            let config = RunConfig::from_args(common, 1, Format::Json)?;
            if !(*rank_tol > 0.0) || !(*tol_angle > 0.0) {
                return Err(CliError::Usage("--rank-tol and --tol-angle must be positive".into()));
            }
            conjugate_scan(&config, h.as_deref().filter(|_| !random), *rank_tol, *tol_angle)
        }
        Command::Seven { common, weights, auto } => {
            let config = RunConfig::from_args(common, 1, Format::Json)?;
            seven(&config, weights.as_deref().filter(|_| !auto))
        }
        Command::DiastasisSweep { common } => {
            let config = RunConfig::from_args(common, 100, Format::Csv)?;
            diastasis_sweep(&config)
        }
        Command::CutTest { common } => {
            let config = RunConfig::from_args(common, 50, Format::Json)?;
            cut_test(&config)
        }
    }
}

/// Reads `GRASSGEO_THREADS` and sizes the global rayon pool.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("GRASSGEO_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("GRASSGEO_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}
