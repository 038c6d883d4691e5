mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "weaver", version, about = "Certified Weaver partitions, pavings and frame partitions")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for generated instances.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Work cap applied to every evaluator and exhaustive search.
    #[arg(long, global = true)]
    pub budget: Option<f64>,
    /// Slack used when re-validating certificates.
    #[arg(long, global = true, value_enum, default_value_t = TolProfile::Standard)]
    pub tol_profile: TolProfile,
    /// Recompute the certified bounds from the partition alone and compare.
    #[arg(long, global = true)]
    pub verify: bool,
    /// Include wall-clock phase timings (makes reports non-reproducible).
    #[arg(long, global = true)]
    pub timings: bool,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum TolProfile {
    Strict,
    Standard,
    Loose,
}

impl TolProfile {
    pub fn slack(self) -> f64 {
        match self {
            TolProfile::Strict => 1e-12,
            TolProfile::Standard => 1e-9,
            TolProfile::Loose => 1e-6,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvaluatorArg {
    BlockLifted,
    Enumeration,
    Polarization,
    Auto,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaveClass {
    ProjectionHalf,
    ProjectionDelta,
    Reflection,
    Selfadjoint,
    Bounded,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    Parseval,
    TwoBases,
    EqualNormBessel,
    Riesz,
    HalfProjection,
    ZeroDiagonal,
    IdentityTuple,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Greedy Weaver partition of a frame.
    Weaver {
        frame: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long, value_enum, default_value_t = EvaluatorArg::BlockLifted)]
        evaluator: EvaluatorArg,
        /// Partition a Bessel input as given instead of extending it to Parseval.
        #[arg(long)]
        no_extend: bool,
    },
    /// Pave a matrix of the given class.
    Pave {
        matrix: PathBuf,
        #[arg(long, value_enum)]
        class: PaveClass,
        /// Target epsilon; the diagonal bound delta for `projection-delta`.
        #[arg(long)]
        eps: f64,
        /// Projection block count instead of ceil(36/eps^2).
        #[arg(long)]
        r: Option<usize>,
    },
    /// Partition a Bessel sequence into Riesz sequences with bounds eps/50 and eps/0.92.
    Feichtinger {
        frame: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0.92)]
        knob: f64,
        /// Use the explicit sufficient block count instead of searching upwards.
        #[arg(long)]
        guaranteed: bool,
    },
    /// Partition a unit-norm Bessel sequence into Riesz sequences with bounds 1 +- eps.
    Repsilon {
        frame: PathBuf,
        #[arg(long)]
        eps: f64,
    },
    /// Coordinate blocks on which a matrix with unit columns is a (1 +- eps)-isometry.
    Bt {
        matrix: PathBuf,
        #[arg(long)]
        eps: f64,
    },
    /// Naimark complement of a Parseval frame, optionally checking a subset.
    Complement {
        frame: PathBuf,
        /// Comma-separated subset indices for the Bessel/Riesz equivalence check.
        #[arg(long, value_delimiter = ',')]
        subset: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
    },
    /// Gram matrix of exponentials on a union of intervals and a greedy partition.
    Fourier {
        /// Interval `a,b`; repeatable.
        #[arg(long = "intervals", value_parser = parse_interval)]
        intervals: Vec<(f64, f64)>,
        #[arg(long = "N")]
        n: Option<usize>,
        /// JSON file `{"intervals": [[a, b], ...], "N": n}`.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        r: usize,
    },
    /// Root bound certificate for a PSD tuple summing to the identity.
    CertifyMcp { tuple: PathBuf },
    /// Exhaustive optimal partition.
    Oracle {
        frame: PathBuf,
        #[arg(long)]
        r: usize,
    },
    /// Generate a random instance from the seed.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 4)]
        m: usize,
    },
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected `a,b`, got `{s}`"));
    }
    let a = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let b = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((a, b))
}

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;
pub const EXIT_UNMET: u8 = 4;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<weaver::Error>() {
            return match e {
                weaver::Error::BudgetExceeded { .. } => EXIT_BUDGET,
                weaver::Error::Internal(_) => 1,
                _ => EXIT_INPUT,
            };
        }
        if cause.downcast_ref::<serde_json::Error>().is_some()
            || cause.downcast_ref::<std::io::Error>().is_some()
            || cause.downcast_ref::<commands::UsageError>().is_some()
        {
            return EXIT_INPUT;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
