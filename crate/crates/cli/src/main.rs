//! `ormac`: bounds, weight distributions, entropies, simulations and sweeps
//! for Bloom-filter coding over the OR channel.
//!
//! Exit codes: 0 success, 1 invalid input, 2 resource guard, 3 I/O.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ormac::schemes::Mode;
use ormac::Error;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ORMAC_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "ormac", version, about = "Bloom-filter coding over OR multi-access channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cost intervals, rate constraints, thresholds and feasibility verdicts.
    Bounds(BoundsArgs),
    /// Exact weight distribution of BF(L, K) as CSV.
    WeightDist(WeightDistArgs),
    /// Exact and limiting entropies of Bloom filter inputs.
    Entropy(EntropyArgs),
    /// Monte Carlo run of one scheme.
    Simulate(SimulateArgs),
    /// Parameter sweeps from a config file.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// Activity exponent, in (0, 1).
    #[arg(long)]
    beta: f64,
    /// Message exponent, >= 0.
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    /// Hash density for the sum-rate threshold.
    #[arg(long, default_value_t = std::f64::consts::LN_2)]
    kappa: f64,
    /// Slack in the sum-rate threshold.
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// Two-phase cost multipliers to check for feasibility.
    #[arg(long, requires = "kappa2")]
    kappa1: Option<f64>,
    #[arg(long, requires = "kappa1")]
    kappa2: Option<f64>,
    /// Two-user hash densities `a,b` for the rate constraints.
    #[arg(long, value_delimiter = ',')]
    region: Option<Vec<f64>>,
    /// Print rates in nats instead of bits.
    #[arg(long)]
    nats: bool,
}

#[derive(Debug, Args)]
struct WeightDistArgs {
    #[arg(long = "l")]
    len: usize,
    #[arg(long = "k")]
    hashes: usize,
    /// Also report the concentration band of half-width eps*L around the
    /// mean zero count and the bound on the mass outside it.
    #[arg(long)]
    eps: Option<f64>,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EntropyArgs {
    #[arg(long = "l")]
    len: usize,
    #[arg(long = "k")]
    hashes: usize,
    /// Hash count of a second filter; reports H(x1 OR x2 | x1).
    #[arg(long = "k2")]
    hashes2: Option<usize>,
    #[arg(long)]
    nats: bool,
}

#[derive(Debug, Args)]
struct ScenarioFlags {
    /// Total users N.
    #[arg(long = "n")]
    users: Option<u64>,
    /// Activity exponent: about N^beta users are active.
    #[arg(long)]
    beta: Option<f64>,
    /// Message exponent: active users send one of about N^gamma messages.
    #[arg(long)]
    gamma: Option<f64>,
    /// Activity-recognition cost multiplier.
    #[arg(long = "omega-a")]
    omega_a: Option<f64>,
    /// Hash density of the many-access scheme.
    #[arg(long)]
    kappa: Option<f64>,
    /// Two-phase cost multiplier of the recognition phase.
    #[arg(long)]
    kappa1: Option<f64>,
    /// Two-phase cost multiplier of the message phase.
    #[arg(long)]
    kappa2: Option<f64>,
    /// Messages per user M.
    #[arg(long = "m")]
    messages: Option<u64>,
    /// Fixed-population array length L.
    #[arg(long = "l")]
    len: Option<usize>,
    /// Fixed-population hash count K.
    #[arg(long = "k")]
    hashes: Option<usize>,
    /// Fixed-population sum rate in bits per channel use.
    #[arg(long)]
    rate: Option<f64>,
    /// Condition every trial on exactly this many active users.
    #[arg(long = "active-count")]
    active_count: Option<u64>,
    /// Override for the mean active count.
    #[arg(long = "active-mean")]
    active_mean: Option<u64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Scheme: mac (fixed population), ar (activity recognition) or mt (two-phase).
    #[arg(long)]
    mode: Mode,
    #[command(flatten)]
    scenario: ScenarioFlags,
    /// Number of independent trials.
    #[arg(long)]
    trials: u64,
    /// Master seed; a fresh one is chosen and printed when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: $ORMAC_OUT_DIR, then ./ormac-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run trials on one thread.
    #[arg(long)]
    serial: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Sweep configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the file's mode.
    #[arg(long)]
    mode: Option<Mode>,
    /// Overrides the file's trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Overrides the file's seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    serial: bool,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parameter(_)
        | Error::Domain { .. }
        | Error::Dimension { .. }
        | Error::Format { .. } => 1,
        Error::Resource(_) => 2,
        Error::Io { .. } => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let mut stdout = std::io::stdout().lock();
    let result = match cli.command {
        Command::Bounds(a) => commands::bounds(&a, &mut stdout),
        Command::WeightDist(a) => commands::weight_dist(&a, &mut stdout),
        Command::Entropy(a) => commands::entropy(&a, &mut stdout),
        Command::Simulate(a) => commands::simulate(&a, &mut stdout),
        Command::Sweep(a) => commands::sweep(&a, &mut stdout),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
