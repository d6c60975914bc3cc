//! `centroaffine` command-line tool.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid input,
//! 3 structurally impossible request, 4 generation failure.

mod commands;
mod document;
mod verify;

use std::process::ExitCode;

use centroaffine::{Error, ToleranceConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn verification(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    pub fn structural(message: impl Into<String>) -> Self {
        Failure { code: 3, message: message.into() }
    }

    pub fn generation(message: impl Into<String>) -> Self {
        Failure { code: 4, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::InvalidInput(_)
            | Error::PeriodTooShort(_)
            | Error::LengthMismatch { .. }
            | Error::NonFinite(_)
            | Error::NotLocallyConvex { .. }
            | Error::NonTransversal { .. }
            | Error::NotParallel { .. }
            | Error::NotEqualVolume { .. }
            | Error::NotExact { .. } => Failure::input(message),
            Error::GenerationFailed { .. } => Failure::generation(message),
            _ => Failure::structural(message),
        }
    }
}

/// Command output with the exit code it should end with.
#[derive(Debug)]
pub struct Output {
    pub text: String,
    pub code: u8,
}

impl Output {
    pub fn ok(text: String) -> Self {
        Output { text, code: 0 }
    }
}

#[derive(Parser, Debug)]
#[command(name = "centroaffine", version, about = "Centroaffine invariants, duality and pedal transforms of closed polygons")]
struct Cli {
    #[command(flatten)]
    tolerances: ToleranceArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ToleranceArgs {
    /// Relative dead-band for strict sign decisions.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_sign: f64,
    /// Relative bound for identity residuals.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_residual: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Radial,
    Framed,
    EqualVolume,
    Planar,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Obj,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Invariants and features of a polygon document.
    Analyze {
        /// Input document, `-` for standard input.
        input: String,
    },
    /// Dual pair of a polygon document, with identity residuals.
    Dual {
        input: String,
        /// Also dualize back and report the deviation from the input.
        #[arg(long)]
        roundtrip: bool,
    },
    /// Affine cylindrical pedal of a planar pair, or its inverse.
    Pedal {
        input: String,
        /// Recover the planar pair from a pedal document.
        #[arg(long)]
        invert: bool,
    },
    /// Writes a reproducible random instance.
    Generate {
        #[arg(long, value_enum, default_value_t = Kind::Radial)]
        kind: Kind,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Range of the radial scales as `lo..hi`.
        #[arg(long, default_value = "0.5..2")]
        lambda_range: String,
    },
    /// Checks the flattening theorem and the duality identities on random instances.
    Verify {
        #[arg(long, default_value_t = 100)]
        instances: u64,
        /// Node counts as `lo..hi` (inclusive).
        #[arg(long, default_value = "5..50")]
        n_range: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "0.5..2")]
        lambda_range: String,
        /// Also write the report to this path.
        #[arg(long)]
        report: Option<String>,
    },
    /// Exports a polygon for external viewers.
    Export {
        input: String,
        #[arg(long, value_enum, default_value_t = Format::Obj)]
        format: Format,
        /// Add the finite focal points as a second polyline.
        #[arg(long)]
        with_focal: bool,
    },
}

/// Parses `lo..hi`.
pub fn parse_range<T: std::str::FromStr>(text: &str, what: &str) -> Result<(T, T), Failure> {
    let bad = || Failure::input(format!("{what} must look like lo..hi, got {text:?}"));
    let (lo, hi) = text.split_once("..").ok_or_else(bad)?;
    Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
}

fn run(cli: Cli) -> Result<Output, Failure> {
    let cfg = ToleranceConfig::new(cli.tolerances.tol_sign, cli.tolerances.tol_residual)?;
    match cli.command {
        Command::Analyze { input } => commands::analyze(&document::read_input(&input)?, cfg),
        Command::Dual { input, roundtrip } => commands::dual(&document::read_input(&input)?, roundtrip, cfg),
        Command::Pedal { input, invert } => commands::pedal(&document::read_input(&input)?, invert, cfg),
        Command::Generate { kind, n, seed, lambda_range } => {
            commands::generate(kind, n, seed, parse_range(&lambda_range, "--lambda-range")?, cfg)
        }
        Command::Verify {
            instances,
            n_range,
            seed,
            lambda_range,
            report,
        } => verify::run(
            &verify::Settings {
                instances,
                n_range: parse_range(&n_range, "--n-range")?,
                seed,
                lambda_range: parse_range(&lambda_range, "--lambda-range")?,
                cfg,
            },
            report.as_deref(),
        ),
        Command::Export { input, format, with_focal } => {
            commands::export(&document::read_input(&input)?, format, with_focal, cfg)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
