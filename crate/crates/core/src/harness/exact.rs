use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use super::output::{join_indices, Table};
use crate::error::{Error, Result};
use crate::linalg::UnitaryKind;
use crate::rip::{binomial, rip_constant_exact_with_budget};
use crate::rng;
use crate::sampling::{sample_rows_with, PartialOperator};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RipExactRow {
    pub n: usize,
    pub k: usize,
    pub q: usize,
    pub unitary: UnitaryKind,
    pub trial: usize,
    pub delta: f64,
    /// Maximizing support, space-separated.
    pub witness: String,
    pub sample_seed: u64,
    pub seed: u64,
    pub config_hash: String,
    pub elapsed_ms: Option<f64>,
}

/// Exact `δ_k` for `trials` row samples at every `(N, k, q)`. The sample for
/// `(N, q, trial)` is shared by all `k`.
pub fn run_rip_exact(config: &ExperimentConfig) -> Result<Table<RipExactRow>> {
    let c = config.resolved()?;
    let hash = c.hash();
    let g = &c.grid;
    for &n in &g.n {
        for &k in &g.k {
            if k > n {
                return Err(Error::Config(format!("k={k} exceeds N={n}")));
            }
            let supports = binomial(n, k);
            if supports > c.rip.budget as u128 {
                return Err(Error::Config(format!(
                    "N={n}, k={k} has {supports} supports, above rip.budget={}; \
                     lower N or k, raise the budget, or use rip-scaling's lower-bound path",
                    c.rip.budget
                )));
            }
        }
    }
    let trials = c.trials.expect("resolved");
    let mut tasks = Vec::new();
    for &n in &g.n {
        for &k in &g.k {
            for &q in &g.q {
                for t in 0..trials {
                    tasks.push((n, k, q, t));
                }
            }
        }
    }
    let ops: Vec<_> = g.n.iter().map(|&n| c.unitary_for(n)).collect::<Result<_>>()?;
    let rows = tasks
        .par_iter()
        .map(|&(n, k, q, t)| {
            let m = &ops[g.n.iter().position(|&v| v == n).expect("grid value")];
            let sample_seed = rng::derive_seed(c.seed, &[n as u64, q as u64, t as u64]);
            let sample = sample_rows_with(&mut rng::from_seed(sample_seed), n, q)?;
            let a = PartialOperator::new(m, sample)?;
            let est = rip_constant_exact_with_budget(&a, k, c.rip.budget)?;
            Ok(RipExactRow {
                n,
                k,
                q,
                unitary: c.unitary,
                trial: t,
                delta: est.value,
                witness: join_indices(&est.witness),
                sample_seed,
                seed: c.seed,
                config_hash: hash.clone(),
                elapsed_ms: if c.record_timing { est.elapsed_ms } else { None },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table::new(ExperimentKind::RipExact.name(), hash, rows))
}
