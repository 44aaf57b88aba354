use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use super::output::Table;
use crate::error::{Error, Result};
use crate::linalg::ImplicitUnitary;
use crate::rip::{binomial, rip_constant_exact_with_budget, rip_lower_bound};
use crate::rng;
use crate::sampling::{sample_rows_with, PartialOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Surrogate {
    Exhaustive,
    RandomSupports,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RipScalingRow {
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    pub q_star: usize,
    /// Fraction of resamples with `δ_k <= ε` at `q_star`.
    pub success_rate: f64,
    /// The search hit the cap without reaching the target rate.
    pub saturated: bool,
    pub surrogate: Surrogate,
    pub resamples: usize,
    /// Distinct `q` values evaluated.
    pub evaluations: usize,
    pub cell_seed: u64,
    pub seed: u64,
    pub config_hash: String,
}

/// Success rate of `δ_k <= ε` at one `q`, over fixed resample streams.
struct Cell<'a> {
    m: &'a ImplicitUnitary,
    k: usize,
    eps: f64,
    seed: u64,
    resamples: usize,
    surrogate: Surrogate,
    budget: u64,
    lb_trials: u64,
    cache: BTreeMap<usize, f64>,
}

impl Cell<'_> {
    fn rate(&mut self, q: usize) -> Result<f64> {
        if let Some(&r) = self.cache.get(&q) {
            return Ok(r);
        }
        let n = self.m.dim();
        // resample t always reads rows from stream (seed, t): samples at
        // different q share a prefix
        let hits = (0..self.resamples as u64)
            .into_par_iter()
            .map(|t| {
                let sample = sample_rows_with(&mut rng::stream(self.seed, t), n, q)?;
                let a = PartialOperator::new(self.m, sample)?;
                let est = match self.surrogate {
                    Surrogate::Exhaustive => rip_constant_exact_with_budget(&a, self.k, self.budget)?,
                    Surrogate::RandomSupports => {
                        rip_lower_bound(&a, self.k, self.lb_trials, rng::derive_seed(self.seed, &[t]))?
                    }
                };
                Ok((est.value <= self.eps) as usize)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .sum::<usize>();
        let r = hits as f64 / self.resamples as f64;
        self.cache.insert(q, r);
        Ok(r)
    }
}

/// Smallest `q` (to within `max(1, q/32)`) at which `δ_k <= ε` holds in at
/// least `rip.success_fraction` of the resamples.
///
/// The bracket doubles from `q = k`, then bisects. `δ_k` is exact when
/// `C(N, k)` fits `rip.budget` and a random-support lower bound otherwise.
pub fn run_rip_scaling(config: &ExperimentConfig) -> Result<Table<RipScalingRow>> {
    let c = config.resolved()?;
    let hash = c.hash();
    let g = &c.grid;
    let mut rows = Vec::new();
    for &n in &g.n {
        let m = c.unitary_for(n)?;
        let cap = c.rip.q_cap.unwrap_or(16 * n);
        for &k in &g.k {
            if k > n {
                return Err(Error::Config(format!("k={k} exceeds N={n}; use k <= N")));
            }
            if cap < k {
                return Err(Error::Config(format!(
                    "rip.q_cap={cap} is below k={k}; the search starts at q=k, so raise q_cap to at least {k}"
                )));
            }
            for &eps in &g.eps {
                let cell_seed = rng::derive_seed(c.seed, &[n as u64, k as u64, eps.to_bits()]);
                let surrogate = if binomial(n, k) <= c.rip.budget as u128 {
                    Surrogate::Exhaustive
                } else {
                    Surrogate::RandomSupports
                };
                let mut cell = Cell {
                    m: &m,
                    k,
                    eps,
                    seed: cell_seed,
                    resamples: c.rip.resamples,
                    surrogate,
                    budget: c.rip.budget,
                    lb_trials: c.rip.lower_bound_trials,
                    cache: BTreeMap::new(),
                };
                let target = c.rip.success_fraction;
                let (q_star, saturated) = search(&mut cell, k, cap, target)?;
                rows.push(RipScalingRow {
                    n,
                    k,
                    eps,
                    q_star,
                    success_rate: cell.rate(q_star)?,
                    saturated,
                    surrogate,
                    resamples: c.rip.resamples,
                    evaluations: cell.cache.len(),
                    cell_seed,
                    seed: c.seed,
                    config_hash: hash.clone(),
                });
            }
        }
    }
    Ok(Table::new(ExperimentKind::RipScaling.name(), hash, rows))
}

fn search(cell: &mut Cell<'_>, start: usize, cap: usize, target: f64) -> Result<(usize, bool)> {
    let mut hi = start;
    let mut lo = None;
    while cell.rate(hi)? < target {
        if hi >= cap {
            return Ok((cap, true));
        }
        lo = Some(hi);
        hi = (hi * 2).min(cap);
    }
    let Some(mut lo) = lo else { return Ok((hi, false)) };
    while hi - lo > (hi / 32).max(1) {
        let mid = lo + (hi - lo) / 2;
        if cell.rate(mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((hi, false))
}
