use num_complex::Complex64;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use super::output::Table;
use crate::error::{Error, Result};
use crate::linalg::ComplexVector;
use crate::recovery::{iht, omp, Solver};
use crate::rng::{self, Rng};
use crate::sampling::{sample_rows_with, PartialOperator, RowSample};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryPhaseRow {
    pub n: usize,
    pub k: usize,
    pub q: usize,
    pub solver: Solver,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_iterations: f64,
    pub cell_seed: u64,
    pub seed: u64,
    pub config_hash: String,
}

/// `k` random coordinates set to `±1`.
pub fn sign_sparse(n: usize, k: usize, r: &mut Rng) -> ComplexVector {
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for j in rand::seq::index::sample(r, n, k) {
        v[j] = Complex64::new(if r.random::<bool>() { 1.0 } else { -1.0 }, 0.0);
    }
    ComplexVector::from_vec_unchecked(v)
}

/// Success counts over the `(k, q)` grid for each solver. Solvers see the
/// same signal and rows in each trial. At `q = N` the rows are `[N]` taken
/// once each unless `recovery.full_sample_at_n` is off.
pub fn run_recovery_phase(config: &ExperimentConfig) -> Result<Table<RecoveryPhaseRow>> {
    let c = config.resolved()?;
    let hash = c.hash();
    let trials = c.trials.expect("resolved");
    let opts = &c.recovery;
    let mut rows = Vec::new();
    for &n in &c.grid.n {
        let m = c.unitary_for(n)?;
        for &k in &c.grid.k {
            if k > n {
                return Err(Error::Config(format!("k={k} exceeds N={n}")));
            }
            for &q in &c.grid.q {
                let cell_seed = rng::derive_seed(c.seed, &[n as u64, k as u64, q as u64]);
                let outcomes: Vec<Vec<(bool, usize)>> = (0..trials as u64)
                    .into_par_iter()
                    .map(|t| {
                        let x = sign_sparse(n, k, &mut rng::stream(cell_seed, 2 * t));
                        let sample = if q == n && opts.full_sample_at_n {
                            RowSample::full(n)
                        } else {
                            sample_rows_with(&mut rng::stream(cell_seed, 2 * t + 1), n, q)?
                        };
                        let a = PartialOperator::new(&m, sample)?;
                        let y = a.apply(&x)?;
                        let tol = opts.tol * y.norm2();
                        opts.solvers
                            .iter()
                            .map(|s| {
                                let res = match s {
                                    Solver::Iht => iht(&a, &y, k, opts.max_iters, tol)?,
                                    Solver::Omp => omp(&a, &y, k, tol)?,
                                };
                                Ok((res.relative_error(&x)? <= opts.success_tol, res.iterations))
                            })
                            .collect()
                    })
                    .collect::<Result<_>>()?;
                for (si, &solver) in opts.solvers.iter().enumerate() {
                    let successes = outcomes.iter().filter(|o| o[si].0).count();
                    let iters: usize = outcomes.iter().map(|o| o[si].1).sum();
                    rows.push(RecoveryPhaseRow {
                        n,
                        k,
                        q,
                        solver,
                        trials,
                        successes,
                        success_rate: successes as f64 / trials as f64,
                        mean_iterations: iters as f64 / trials as f64,
                        cell_seed,
                        seed: c.seed,
                        config_hash: hash.clone(),
                    });
                }
            }
        }
    }
    Ok(Table::new(ExperimentKind::RecoveryPhase.name(), hash, rows))
}
