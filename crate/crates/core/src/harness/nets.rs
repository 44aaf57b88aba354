use num_complex::Complex64;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind, InputKind};
use super::output::{rows_to_csv, schema_name, to_json_text};
use crate::error::{Error, Result};
use crate::linalg::{ComplexVector, ImplicitUnitary};
use crate::maurey::{
    build_improved_family, build_simple_family, realize_levels, sampled_vs_full, verify_decomposition,
    DecompositionReport, LemmaCheck, NetFamily, NetParams, NetVariant, VerifySlack,
};
use crate::rng::{self, RNG_ALGORITHM};
use crate::sampling::{sample_rows_with, RowSample};

/// Row count from the sample-size bound of the chosen variant, scaled by `c`:
/// `c·ε^{-3}·η^{-1}·log N·log²(1/η)` (simple) or
/// `c·log²(1/ε)·ε^{-1}·η^{-1}·log N·log²(1/η)` (improved), logs base 2.
pub fn row_count_formula(variant: NetVariant, n: usize, eps: f64, eta: f64, c: f64) -> usize {
    let log_n = (n as f64).log2();
    let l_eta = (1.0 / eta).log2();
    let core = match variant {
        NetVariant::Simple => eps.powi(-3),
        NetVariant::Improved => (1.0 / eps).log2().powi(2) / eps,
    };
    ((c * core / eta * log_n * l_eta * l_eta).ceil() as usize).max(1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramLevel {
    pub level: u32,
    /// Counts over equal bins of `[0, √2]`, unit-flatness scale.
    pub counts: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaureyTrial {
    pub n: usize,
    pub eps: f64,
    pub eta: f64,
    pub q: usize,
    pub trial: usize,
    pub trial_seed: u64,
    /// Basis index for basis inputs.
    pub basis_index: Option<usize>,
    /// Attempts per level, first level first; empty if a level gave up.
    pub attempts: Vec<u32>,
    pub first_level: u32,
    /// Why the net pipeline stopped early, if it did.
    pub error: Option<String>,
    pub decomposition: Option<DecompositionReport>,
    pub end_to_end: LemmaCheck,
    pub histograms: Vec<HistogramLevel>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaureySummary {
    pub n: usize,
    pub eps: f64,
    pub eta: f64,
    pub q: usize,
    pub variant: NetVariant,
    pub trials: usize,
    pub end_to_end_pass_rate: f64,
    pub decomposition_pass_rate: f64,
    /// Fraction of (trial, level) pairs accepted within two attempts.
    pub within_two_attempts: f64,
    pub mean_attempts: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaureyBundle {
    pub schema: String,
    pub config_hash: String,
    pub rng: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub summaries: Vec<MaureySummary>,
    pub trials: Vec<MaureyTrial>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub n: usize,
    pub eps: f64,
    pub eta: f64,
    pub q: usize,
    pub trial: usize,
    pub level: u32,
    pub bin: usize,
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count: usize,
    pub trial_seed: u64,
    pub seed: u64,
    pub config_hash: String,
}

impl MaureyBundle {
    pub fn to_json(&self) -> Result<String> {
        to_json_text(self)
    }

    /// Per-level `|g|` histograms in long format.
    pub fn histogram_csv(&self) -> Result<String> {
        let bins = self.config.maurey.histogram_bins;
        let width = std::f64::consts::SQRT_2 / bins as f64;
        let mut rows = Vec::new();
        for t in &self.trials {
            for h in &t.histograms {
                for (b, &count) in h.counts.iter().enumerate() {
                    rows.push(HistogramRow {
                        n: t.n,
                        eps: t.eps,
                        eta: t.eta,
                        q: t.q,
                        trial: t.trial,
                        level: h.level,
                        bin: b,
                        bin_lo: b as f64 * width,
                        bin_hi: (b + 1) as f64 * width,
                        count,
                        trial_seed: t.trial_seed,
                        seed: self.seed,
                        config_hash: self.config_hash.clone(),
                    });
                }
            }
        }
        let mut out = format!(
            "# schema: {}\n# config_hash: {}\n# rng: {}\n",
            schema_name("maurey-histogram"),
            self.config_hash,
            self.rng
        );
        out.push_str(&rows_to_csv(&rows)?);
        Ok(out)
    }
}

fn histogram(g: &ComplexVector, bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins];
    let width = std::f64::consts::SQRT_2 / bins as f64;
    for z in g.iter() {
        let b = ((z.norm() / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
}

fn sparse_input(n: usize, k: usize, r: &mut rng::Rng) -> ComplexVector {
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for j in rand::seq::index::sample(r, n, k.min(n)) {
        v[j] = Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
    }
    let v = ComplexVector::from_vec_unchecked(v);
    v.l1_normalized().unwrap_or_else(|| ComplexVector::basis(n, 0))
}

fn run_trial(
    c: &ExperimentConfig,
    m: &ImplicitUnitary,
    params: &NetParams,
    n: usize,
    q: usize,
    trial: usize,
) -> Result<MaureyTrial> {
    let (eps, eta) = (params.eps, params.eta);
    let trial_seed = rng::derive_seed(
        c.seed,
        &[n as u64, q as u64, eps.to_bits(), eta.to_bits(), trial as u64],
    );
    let (x, basis_index) = match c.maurey.input {
        InputKind::Sparse => (sparse_input(n, c.maurey.sparsity, &mut rng::stream(trial_seed, 0)), None),
        InputKind::Basis => (ComplexVector::basis(n, trial % n), Some(trial % n)),
    };
    let sample = if q == n && c.maurey.full_sample_at_n {
        RowSample::full(n)
    } else {
        sample_rows_with(&mut rng::stream(trial_seed, 1), n, q)?
    };
    let end_to_end = sampled_vs_full(m, &x, &sample, eps, eta)?;
    let mut out = MaureyTrial {
        n,
        eps,
        eta,
        q,
        trial,
        trial_seed,
        basis_index,
        attempts: Vec::new(),
        first_level: *params.required_levels().start(),
        error: None,
        decomposition: None,
        end_to_end,
        histograms: Vec::new(),
    };
    let levels = match realize_levels(
        m,
        &x,
        &sample,
        params,
        rng::derive_seed(trial_seed, &[2]),
        c.maurey.max_attempts,
    ) {
        Ok(l) => l,
        Err(e @ Error::NoGoodSample { .. }) => {
            out.error = Some(e.to_string());
            return Ok(out);
        }
        Err(e) => return Err(e),
    };
    out.attempts = levels.attempts.clone();
    out.histograms = levels
        .g
        .iter()
        .enumerate()
        .map(|(i, g)| HistogramLevel {
            level: levels.first_level + i as u32,
            counts: histogram(g, c.maurey.histogram_bins),
        })
        .collect();
    let family = match params.variant {
        NetVariant::Simple => NetFamily::Simple(build_simple_family(&levels.g, params)?),
        NetVariant::Improved => NetFamily::Improved(build_improved_family(&levels.g, params)?),
    };
    out.decomposition = Some(verify_decomposition(
        m,
        &x,
        &sample,
        &family,
        params,
        &c.maurey.slack.unwrap_or(VerifySlack::for_variant(params.variant)),
    )?);
    Ok(out)
}

/// Runs sampling, level realization, family construction and both
/// verifications for every `(N, ε, η, q)` and trial.
pub fn run_maurey_verify(config: &ExperimentConfig) -> Result<MaureyBundle> {
    let c = config.resolved()?;
    let hash = c.hash();
    let trials = c.trials.expect("resolved");
    let mo = &c.maurey;
    let mut summaries = Vec::new();
    let mut records = Vec::new();
    for &n in &c.grid.n {
        let m = c.unitary_for(n)?;
        for &eps in &c.grid.eps {
            for &eta in &c.grid.eta {
                let params = NetParams::new(mo.variant, eps, eta)
                    .and_then(|p| p.with_sample_constant(mo.sample_constant))
                    .map_err(|e| Error::Config(e.to_string()))?;
                let qs = if c.grid.q.is_empty() {
                    vec![row_count_formula(mo.variant, n, eps, eta, mo.q_constant)]
                } else {
                    c.grid.q.clone()
                };
                for q in qs {
                    let cell: Vec<MaureyTrial> = (0..trials)
                        .into_par_iter()
                        .map(|t| run_trial(&c, &m, &params, n, q, t))
                        .collect::<Result<_>>()?;
                    summaries.push(summarize(&cell, &params, n, q));
                    records.extend(cell);
                }
            }
        }
    }
    Ok(MaureyBundle {
        schema: schema_name(ExperimentKind::MaureyVerify.name()),
        config_hash: hash,
        rng: RNG_ALGORITHM.to_string(),
        seed: c.seed,
        config: c,
        summaries,
        trials: records,
    })
}

fn summarize(cell: &[MaureyTrial], params: &NetParams, n: usize, q: usize) -> MaureySummary {
    let t = cell.len() as f64;
    let attempts: Vec<u32> = cell.iter().flat_map(|r| r.attempts.iter().copied()).collect();
    let levels_per_trial = params.required_levels().count();
    // a trial that gave up contributes all its levels as failures
    let total_levels = (cell.len() * levels_per_trial) as f64;
    MaureySummary {
        n,
        eps: params.eps,
        eta: params.eta,
        q,
        variant: params.variant,
        trials: cell.len(),
        end_to_end_pass_rate: cell.iter().filter(|r| r.end_to_end.passed).count() as f64 / t,
        decomposition_pass_rate: cell
            .iter()
            .filter(|r| r.decomposition.as_ref().is_some_and(|d| d.passed))
            .count() as f64
            / t,
        within_two_attempts: attempts.iter().filter(|&&a| a <= 2).count() as f64 / total_levels,
        mean_attempts: if attempts.is_empty() {
            0.0
        } else {
            attempts.iter().map(|&a| a as f64).sum::<f64>() / attempts.len() as f64
        },
    }
}
