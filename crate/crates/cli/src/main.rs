//! `subrip` command-line driver.
//!
//! Exit status: 0 on completion, 2 on a configuration error, 1 on any other
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use subrip::harness::{run_to_destination, ExperimentConfig, ExperimentKind, Format};
use subrip::Error;

#[derive(Parser)]
#[command(name = "subrip", version, about = "Seeded experiments on subsampled unitary matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact restricted isometry constants over (N, k, q) grids.
    RipExact(Flags),
    /// Smallest row count reaching δ_k <= ε, per (N, k, ε).
    RipScaling(Flags),
    /// End-to-end Maurey-net verification; CSV output gives |g| histograms.
    MaureyVerify(Flags),
    /// Empirical failure rates of concentration statements.
    TailProbe(Flags),
    /// IHT and OMP success rates over (k, q).
    RecoveryPhase(Flags),
}

/// Flags override the matching config fields.
#[derive(Args)]
struct Flags {
    /// JSON experiment config; defaults apply to anything it omits.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format (default: json for maurey-verify, csv otherwise).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "INT")]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl Command {
    fn split(self) -> (ExperimentKind, Flags) {
        match self {
            Command::RipExact(f) => (ExperimentKind::RipExact, f),
            Command::RipScaling(f) => (ExperimentKind::RipScaling, f),
            Command::MaureyVerify(f) => (ExperimentKind::MaureyVerify, f),
            Command::TailProbe(f) => (ExperimentKind::TailProbe, f),
            Command::RecoveryPhase(f) => (ExperimentKind::RecoveryPhase, f),
        }
    }
}

fn build_config(kind: ExperimentKind, flags: Flags) -> subrip::Result<ExperimentConfig> {
    let mut c = match &flags.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    match c.experiment {
        Some(k) if k != kind => {
            return Err(Error::Config(format!(
                "config is for {} but the subcommand is {}",
                k.name(),
                kind.name()
            )))
        }
        _ => c.experiment = Some(kind),
    }
    if let Some(seed) = flags.seed {
        c.seed = seed;
    }
    if let Some(out) = flags.out {
        c.out = Some(out);
    }
    if let Some(f) = flags.format {
        c.format = Some(match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        });
    }
    if let Some(t) = flags.threads {
        c.threads = Some(t);
    }
    Ok(c)
}

fn main() -> ExitCode {
    let (kind, flags) = Cli::parse().command.split();
    let result = build_config(kind, flags).and_then(|c| {
        let text = run_to_destination(&c)?;
        if c.out.is_none() {
            print!("{text}");
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("subrip: {e}");
            ExitCode::from(if matches!(e, Error::Config(_)) { 2 } else { 1 })
        }
    }
}
