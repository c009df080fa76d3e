//! Command-line front end for the harmonic normality toolkit.

mod commands;
pub mod complex;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use harmonic_normality::Error;

pub use report::{to_json, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "harmnorm",
    version,
    about = "Normality diagnostics for planar harmonic mappings"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct MapArgs {
    /// Holomorphic part h.
    #[arg(long = "h", value_name = "EXPR")]
    pub h: Option<String>,
    /// Co-analytic part g (defaults to 0).
    #[arg(long = "g", value_name = "EXPR")]
    pub g: Option<String>,
    /// Map record JSON file, or `catalog:NAME` for a builtin entry.
    #[arg(long = "map", value_name = "PATH", conflicts_with_all = ["h", "g"])]
    pub map: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normality and φ-normality sup estimates with trend verdicts.
    Analyze {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long = "phi", value_name = "SPEC")]
        phi: Option<String>,
        #[arg(long = "k", default_value_t = 1)]
        k: usize,
        #[arg(long = "rmax", default_value_t = 0.99)]
        rmax: f64,
        #[arg(long = "grid", default_value_t = 64)]
        grid: usize,
        #[arg(long = "refine", default_value_t = 3)]
        refine: usize,
        #[arg(long = "seed", default_value_t = 0)]
        seed: u64,
        /// Number of sampled pairs for the Lipschitz quotient.
        #[arg(long = "pairs", default_value_t = 4096)]
        pairs: usize,
    },
    /// Zalcman sequence extraction.
    Zalcman {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long = "alpha", default_value_t = 0.0, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long = "steps", default_value_t = 5)]
        steps: usize,
    },
    /// Solve f(z) = a for each target.
    Fibers {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long = "targets", value_name = "LIST", allow_hyphen_values = true)]
        targets: String,
        #[arg(long = "rmax", default_value_t = 0.9)]
        rmax: f64,
        /// Newton seeds per side of the seed grid.
        #[arg(long = "grid", default_value_t = 24)]
        grid: usize,
    },
    /// Sufficient-condition checkers, or the cross-check harness.
    Criteria {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long = "theorem", value_enum)]
        theorem: Theorem,
        #[arg(long = "k", default_value_t = 1)]
        k: usize,
        #[arg(long = "E", value_name = "LIST", allow_hyphen_values = true)]
        e: Option<String>,
        #[arg(long = "phi", value_name = "SPEC", default_value = "pow:2")]
        phi: String,
        #[arg(
            long = "P",
            value_name = "COEFFS",
            default_value = "0,1",
            allow_hyphen_values = true
        )]
        p: String,
        #[arg(long = "epsilon", default_value_t = 0.25)]
        epsilon: f64,
        #[arg(long = "rmax", default_value_t = 0.999)]
        rmax: f64,
        #[arg(long = "grid", default_value_t = 64)]
        grid: usize,
        #[arg(long = "refine", default_value_t = 3)]
        refine: usize,
        /// Harness k values.
        #[arg(long = "klist", value_name = "LIST", default_value = "1,2,3")]
        klist: String,
    },
    /// Validate a weight φ.
    PhiCheck {
        #[arg(long = "phi", value_name = "SPEC")]
        phi: String,
    },
    /// List builtin maps, or export them to a directory.
    Catalog {
        #[arg(long = "out", value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// CSV of a functional over a polar grid.
    Grid {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long = "functional", value_enum, default_value = "normality")]
        functional: GridFunctional,
        #[arg(long = "phi", value_name = "SPEC", default_value = "pow:2")]
        phi: String,
        #[arg(long = "k", default_value_t = 1)]
        k: usize,
        #[arg(long = "rmax", default_value_t = 0.99)]
        rmax: f64,
        #[arg(long = "grid", default_value_t = 64)]
        grid: usize,
        #[arg(long = "out", value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Theorem {
    #[value(name = "1.2")]
    MinSpherical,
    #[value(name = "1.3")]
    LappanPoly,
    #[value(name = "1.5")]
    Y,
    #[value(name = "1.6")]
    Ya,
    #[value(name = "harness")]
    Harness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridFunctional {
    Normality,
    Phi,
    Esd,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) => match e {
                Error::Parse(_) => EXIT_PARSE,
                Error::InvalidParameter(_) | Error::OutsideDisk(_) | Error::Io(_) => EXIT_USAGE,
                _ => EXIT_NUMERIC,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

/// Parses `args` (program name first), runs the command, and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match commands::dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
