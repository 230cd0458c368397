//! The `asep-spectra` command line.
//!
//! Exit codes: `0` success, `1` a failed check or solver, `2` a usage error.

mod commands;
mod output;

pub use output::{Header, OUT_DIR_ENV};

use crate::spectral::LanczosOptions;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::ops::RangeInclusive;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "asep-spectra", version, about = "Spectral gaps of the q-exclusion process on L×H sticks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate gaps and γ = sup_N 1/gap over a grid of (L, H).
    GapScan(GapScanArgs),
    /// Gaps of the kink Hamiltonians and their conjugation residuals.
    Xxz(XxzArgs),
    /// Run the built-in identity suite.
    Verify(VerifyArgs),
    /// Simulate the dynamics and estimate the relaxation rate.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanForm {
    Full,
    Modified,
    BernoulliLaplace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Dense,
    Iterative,
    Blocks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Lattice,
    Profile,
}

/// Inclusive range `a..b`, `a-b` or a single value.
pub fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("malformed range {s:?}"));
    let (a, b) = if let Some((a, b)) = s.split_once("..") {
        (parse(a.trim_start_matches('=').trim_end_matches('='))?, parse(b.trim_start_matches('='))?)
    } else if let Some((a, b)) = s.split_once('-') {
        (parse(a)?, parse(b)?)
    } else {
        let v = parse(s)?;
        (v, v)
    };
    if a > b {
        return Err(format!("empty range {s:?}"));
    }
    Ok(a..=b)
}

fn parse_q(s: &str) -> Result<f64, String> {
    let q: f64 = s.parse().map_err(|_| format!("malformed q {s:?}"))?;
    if q > 0.0 && q < 1.0 {
        Ok(q)
    } else {
        Err(format!("q = {q} must lie in (0, 1)"))
    }
}

fn parse_delta(s: &str) -> Result<f64, String> {
    let d: f64 = s.parse().map_err(|_| format!("malformed Delta {s:?}"))?;
    if d > 1.0 && d.is_finite() {
        Ok(d)
    } else {
        Err(format!("Delta = {d} must exceed 1"))
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Relative residual at which Lanczos stops.
    #[arg(long, default_value_t = LanczosOptions::default().tol)]
    pub tol: f64,
    #[arg(long, default_value_t = LanczosOptions::default().max_matvecs)]
    pub max_matvecs: usize,
}

impl SolverArgs {
    pub fn lanczos(&self) -> LanczosOptions {
        LanczosOptions {
            tol: self.tol,
            max_matvecs: self.max_matvecs,
            ..LanczosOptions::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GapScanArgs {
    #[arg(long, value_parser = parse_q, default_value = "0.5")]
    pub q: f64,
    /// Stick counts L, e.g. `2..5`.
    #[arg(long, value_parser = parse_range)]
    pub sticks: RangeInclusive<usize>,
    /// Stick heights H; ignored for the Bernoulli–Laplace form.
    #[arg(long, value_parser = parse_range, default_value = "1")]
    pub heights: RangeInclusive<usize>,
    #[arg(long, value_enum, default_value_t = ScanForm::Full)]
    pub form: ScanForm,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    /// Scan every N in 1..LH−1 rather than the lower half.
    #[arg(long)]
    pub all_n: bool,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Exit 0 even when some cells fail.
    #[arg(long)]
    pub keep_going: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct XxzArgs {
    #[arg(long = "delta", value_parser = parse_delta, default_value = "1.25")]
    pub delta: f64,
    /// 2S, e.g. `1..3`.
    #[arg(long, value_parser = parse_range, default_value = "1")]
    pub twice_s: RangeInclusive<usize>,
    #[arg(long, value_parser = parse_range, default_value = "2")]
    pub height: RangeInclusive<usize>,
    /// A single sector 2n; all sectors when omitted.
    #[arg(long, allow_negative_numbers = true)]
    pub sector: Option<i64>,
    /// Use the diagonal region Γ_{R,H} instead of the chain.
    #[arg(long)]
    pub diagonal: bool,
    /// Half-widths R for the diagonal mode, e.g. `1..3`.
    #[arg(long, value_parser = parse_range, default_value = "1")]
    pub half_width: RangeInclusive<usize>,
    #[arg(long)]
    pub keep_going: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Run only checks whose name contains this string.
    #[arg(long)]
    pub filter: Option<String>,
    /// Also write the rows as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Print every instance instead of one line per check.
    #[arg(long)]
    pub verbose: bool,
    /// Test hook: corrupt one rate of every full generator by this factor.
    #[arg(long, hide = true)]
    pub inject_fault: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = parse_q, default_value = "0.5")]
    pub q: f64,
    #[arg(long)]
    pub sticks: usize,
    #[arg(long)]
    pub height: usize,
    #[arg(long)]
    pub particles: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Lattice)]
    pub mode: ModeArg,
    /// Drawn from the operating system and echoed when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 100.0)]
    pub t_burn: f64,
    #[arg(long, default_value_t = 10_100.0)]
    pub t_run: f64,
    #[arg(long, default_value_t = 0.05)]
    pub sample_dt: f64,
    /// `rowH` or `height`; defaults to the row nearest the density.
    #[arg(long)]
    pub observable: Option<String>,
    /// Output files are `<prefix>_series.csv` and `<prefix>_estimate.json`.
    #[arg(long)]
    pub out_prefix: Option<PathBuf>,
}

/// Parse `args` (program name first) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::GapScan(a) => commands::cmd_gap_scan(a),
        Command::Xxz(a) => commands::cmd_xxz(a),
        Command::Verify(a) => commands::cmd_verify(a),
        Command::Simulate(a) => commands::cmd_simulate(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                crate::Error::InvalidParams(_) | crate::Error::OutOfRange(_) => EXIT_USAGE,
                _ => EXIT_FAILURE,
            }
        }
    }
}
