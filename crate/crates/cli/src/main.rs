//! Command-line surface of the node simulator: analytic ledgers, protocol
//! Monte Carlo, swap performance curves, crosstalk reports, tomography and
//! histogram-fit demos.

mod commands;
mod io_util;

use clap::{Parser, Subcommand, ValueEnum};
use ionlink_core::herald::HeraldScheme;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or usage; exit code 1.
    Config(String),
    /// Numerical failure (non-convergence, degenerate fit); exit code 2.
    Numerical(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    SinglePhoton,
    Bsm,
    Direct,
}

impl From<SchemeArg> for HeraldScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::SinglePhoton => HeraldScheme::SinglePhoton,
            SchemeArg::Bsm => HeraldScheme::Bsm,
            SchemeArg::Direct => HeraldScheme::Direct,
        }
    }
}

/// Accept counts in scientific notation (`1e5`) as well as integers.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|_| format!("`{s}` is not a count"))?;
    if !(0.0..=1e15).contains(&f) || (f - f.round()).abs() > 1e-6 {
        return Err(format!("`{s}` is not a usable count"));
    }
    Ok(f.round() as u64)
}

#[derive(Parser)]
#[command(
    name = "ionlink",
    version,
    about = "Dual-type trapped-ion network node simulator",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rate and infidelity ledger for a scenario.
    Budget {
        #[arg(long)]
        scenario: String,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo of the heralded node sequence.
    SimulateNode {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_parser = parse_count, default_value = "1000")]
        sequences: u64,
        /// Fix the rayon worker count (results are identical regardless).
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Swap success/fidelity versus link generation rate.
    SwapCurve {
        /// Either `start..end` (log-spaced with --points) or a comma list.
        #[arg(long)]
        rates: String,
        #[arg(long, default_value_t = 20)]
        points: usize,
        /// Memory lifetime T1' in seconds.
        #[arg(long, default_value_t = 0.79)]
        t1: f64,
        /// Memory dephasing time T2 in seconds.
        #[arg(long, default_value_t = 0.323)]
        t2: f64,
        /// Average the fidelity over decay-free trials only.
        #[arg(long)]
        conditioned: bool,
        #[arg(long, value_parser = parse_count, default_value = "20000")]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Memory-qubit disturbance ledger from communication-qubit operations.
    CrosstalkReport {
        #[arg(long, default_value = "paper-s13")]
        scenario: String,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample tomography counts from the degraded herald state and
    /// reconstruct it by maximum likelihood.
    TomographyDemo {
        #[arg(long)]
        scenario: String,
        #[arg(long, value_parser = parse_count, default_value = "100000")]
        shots: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the arrival-time model to a CSV of timestamps in nanoseconds.
    FitHistogram {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Detector-pattern table for a heralding scheme.
    HeraldTable {
        #[arg(long)]
        scenario: String,
        #[arg(long, value_enum)]
        scheme: Option<SchemeArg>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Conversion efficiency and SNR at a pump power.
    Conversion {
        #[arg(long, default_value = "paper-12km")]
        scenario: String,
        #[arg(long, default_value_t = 1.1)]
        pump_w: f64,
        #[arg(long, default_value_t = 0.0)]
        signal_hz: f64,
    },
    /// List the built-in scenarios.
    Scenarios,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Budget {
            scenario,
            format,
            out,
        } => commands::budget(&scenario, format, out.as_deref()),
        Command::SimulateNode {
            scenario,
            seed,
            sequences,
            workers,
            format,
            out,
        } => commands::simulate_node(&scenario, seed, sequences, workers, format, out.as_deref()),
        Command::SwapCurve {
            rates,
            points,
            t1,
            t2,
            conditioned,
            trials,
            seed,
            format,
            out,
        } => commands::swap_curve_cmd(
            &rates,
            points,
            t1,
            t2,
            conditioned,
            trials,
            seed,
            format,
            out.as_deref(),
        ),
        Command::CrosstalkReport {
            scenario,
            format,
            out,
        } => commands::crosstalk_report(&scenario, format, out.as_deref()),
        Command::TomographyDemo {
            scenario,
            shots,
            seed,
            out,
        } => commands::tomography_demo(&scenario, shots, seed, out.as_deref()),
        Command::FitHistogram { input, out } => commands::fit_histogram_cmd(&input, out.as_deref()),
        Command::HeraldTable {
            scenario,
            scheme,
            format,
            out,
        } => commands::herald_table(&scenario, scheme.map(Into::into), format, out.as_deref()),
        Command::Conversion {
            scenario,
            pump_w,
            signal_hz,
        } => commands::conversion_point(&scenario, pump_w, signal_hz),
        Command::Scenarios => {
            for name in ionlink_core::scenario::Scenario::builtin_names() {
                println!("{name}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ CliError::Config(_)) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
        Err(e @ CliError::Numerical(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
