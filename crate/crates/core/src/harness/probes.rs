use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use super::output::Table;
use crate::error::{Error, Result};
use crate::maurey::tail_probe;
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailProbeRow {
    pub probe: usize,
    /// The distribution as compact JSON.
    pub distribution: String,
    /// The checked statement as compact JSON.
    pub statement: String,
    pub n_vars: usize,
    pub trials: usize,
    pub failures: usize,
    pub failure_rate: f64,
    pub probe_seed: u64,
    pub seed: u64,
    pub config_hash: String,
}

/// Empirical failure rate of every configured probe at every `n_vars`.
pub fn run_tail_probe(config: &ExperimentConfig) -> Result<Table<TailProbeRow>> {
    let c = config.resolved()?;
    let hash = c.hash();
    let trials = c.trials.expect("resolved");
    let mut rows = Vec::new();
    for (i, p) in c.tail.probes.iter().enumerate() {
        for &n_vars in &c.grid.n_vars {
            let probe_seed = rng::derive_seed(c.seed, &[i as u64, n_vars as u64]);
            let r = tail_probe(p.distribution, p.statement, n_vars, trials, probe_seed).map_err(|e| match e {
                Error::UnsupportedDistribution(_) | Error::InvalidParameter(_) => {
                    Error::Config(format!("probe {i}: {e}"))
                }
                e => e,
            })?;
            rows.push(TailProbeRow {
                probe: i,
                distribution: serde_json::to_string(&p.distribution)?,
                statement: serde_json::to_string(&p.statement)?,
                n_vars,
                trials,
                failures: r.failures,
                failure_rate: r.failure_rate,
                probe_seed,
                seed: c.seed,
                config_hash: hash.clone(),
            });
        }
    }
    Ok(Table::new(ExperimentKind::TailProbe.name(), hash, rows))
}
