//! Seeded experiment driver.
//!
//! An [`ExperimentConfig`] fixes every input of a run. Each runner fills
//! empty grids with desk-scale defaults, splits work across a rayon pool,
//! collects results by index, and stamps every row with the master seed, a
//! per-row seed and the config hash. Equal configs give byte-identical
//! output.

mod config;
mod exact;
mod nets;
mod output;
mod phase;
mod probes;
mod scaling;

pub use config::{
    default_probes, ExperimentConfig, ExperimentKind, Format, Grid, InputKind, MaureyOptions, Probe,
    RecoveryOptions, RipOptions, TailOptions, DEFAULT_Q_CONSTANT,
};
pub use exact::{run_rip_exact, RipExactRow};
pub use nets::{
    row_count_formula, run_maurey_verify, HistogramLevel, HistogramRow, MaureyBundle, MaureySummary, MaureyTrial,
};
pub use output::{schema_name, Table, SCHEMA_VERSION};
pub use phase::{run_recovery_phase, sign_sparse, RecoveryPhaseRow};
pub use probes::{run_tail_probe, TailProbeRow};
pub use scaling::{run_rip_scaling, RipScalingRow, Surrogate};

use crate::error::{Error, Result};

/// Runs the configured experiment on a pool of `config.threads` workers
/// (all cores when unset) and renders it in the configured format.
///
/// For `maurey-verify`, CSV output is the per-level `|g|` histograms and JSON
/// is the full report bundle.
pub fn run(config: &ExperimentConfig) -> Result<String> {
    let c = config.resolved()?;
    let format = c.format()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(c.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} worker threads: {e}", c.threads.unwrap_or(0))))?;
    pool.install(|| {
        let kind = c.kind()?;
        macro_rules! render {
            ($t:expr) => {{
                let t = $t;
                match format {
                    Format::Csv => t.to_csv(),
                    Format::Json => t.to_json(),
                }
            }};
        }
        match kind {
            ExperimentKind::RipExact => render!(run_rip_exact(&c)?),
            ExperimentKind::RipScaling => render!(run_rip_scaling(&c)?),
            ExperimentKind::TailProbe => render!(run_tail_probe(&c)?),
            ExperimentKind::RecoveryPhase => render!(run_recovery_phase(&c)?),
            ExperimentKind::MaureyVerify => {
                let b = run_maurey_verify(&c)?;
                match format {
                    Format::Csv => b.histogram_csv(),
                    Format::Json => b.to_json(),
                }
            }
        }
    })
}

/// As [`run`], writing to `config.out` when set. Returns the rendered text.
pub fn run_to_destination(config: &ExperimentConfig) -> Result<String> {
    let text = run(config)?;
    if let Some(path) = &config.out {
        std::fs::write(path, &text)?;
    }
    Ok(text)
}
