//! `qmimo` — quantum MIMO link experiments from the command line.
//!
//! Every subcommand reads an optional TOML config, writes deterministic
//! tables into `--out`, and prints the run summary to stdout. Outputs are
//! byte-identical for the same config and seed.

mod config;
mod runs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;

#[derive(Parser)]
#[command(
    name = "qmimo",
    version,
    about = "Quantum MIMO link simulator: approximate cloning, crosstalk + \
             depolarization channels, and SDP-based state purification"
)]
struct Cli {
    /// TOML experiment configuration; defaults are used when absent.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory for tables and summaries (created if missing).
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// RNG seed; required by subcommands with Monte-Carlo content.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Rayon worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Best-strategy maps over (lambda1, lambda2) per CSI regime on the 2x2 link.
    Scan2x2,
    /// Direct vs 2-clone (and optionally 4-clone) purification on the 4x4 link.
    Scan4x4,
    /// Fidelity / success-probability trade-off curves, symmetric and optimized.
    Tradeoff,
    /// Mean fidelity gains of cloning and purification vs crosstalk strength.
    Gains,
    /// Dump the Haar-averaged Q/R operators and a solved decoder Choi matrix.
    QrDump,
    /// Run the built-in oracle suite; nonzero exit if any oracle fails.
    Validate,
}

#[derive(Parser)]
struct FullCli {
    #[command(flatten)]
    common: Cli,
    #[command(subcommand)]
    command: Command,
}

fn run(cli: FullCli) -> qmimo::Result<bool> {
    if let Some(n) = cli.common.threads {
        // Ignore the error if a global pool already exists (e.g. in tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = ExperimentConfig::load(cli.common.config.as_deref())?;
    let out = &cli.common.out;
    let (text, ok) = match cli.command {
        Command::Scan2x2 => (runs::scan2x2(&cfg.scan2x2, out)?, true),
        Command::Scan4x4 => (runs::scan4x4(&cfg.scan4x4, out)?, true),
        Command::Tradeoff => (runs::tradeoff(&cfg.tradeoff, out)?, true),
        Command::Gains => (runs::gains(&cfg.gains, out)?, true),
        Command::QrDump => (runs::qr_dump(&cfg.qr_dump, out)?, true),
        Command::Validate => runs::validate(cli.common.seed, out)?,
    };
    print!("{text}");
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = FullCli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: one or more validation oracles failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
