use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use rand::distr::Distribution as _;
use serde::{Deserialize, Serialize};

use super::phase::{phase_decompose, unit_phase, PhaseDistribution};
use super::NetParams;
use crate::error::{Error, Result};
use crate::linalg::{approx_within, check_dim, ApproxSpec, ComplexVector, ImplicitUnitary};
use crate::rng::{self, Rng};
use crate::sampling::RowSample;

/// One Maurey sample at `level`: `g = (√2/|F|)·Σ_{(ℓ,s)∈F} i^s·M^(ℓ)` for
/// `|F| = params.sample_size(level)` iid draws from `d`.
///
/// Accumulates the coefficients first and applies `M` once.
pub fn sample_g(
    m: &ImplicitUnitary,
    d: &PhaseDistribution,
    level: u32,
    params: &NetParams,
    rng: &mut Rng,
) -> Result<ComplexVector> {
    params.check_level(level)?;
    sample_g_sized(m, d, params.sample_size(level), rng)
}

pub(crate) fn sample_g_sized(
    m: &ImplicitUnitary,
    d: &PhaseDistribution,
    size: usize,
    rng: &mut Rng,
) -> Result<ComplexVector> {
    check_dim(m.dim(), d.dim())?;
    let sampler = d.sampler();
    let mut counts = vec![[0u32; 4]; d.dim()];
    for _ in 0..size {
        let idx = sampler.sample(rng);
        counts[idx / 4][idx % 4] += 1;
    }
    let w = SQRT_2 / size as f64;
    let mut coeffs: Vec<Complex64> = counts
        .iter()
        .map(|c| {
            c.iter()
                .enumerate()
                .map(|(s, &k)| unit_phase(s) * k as f64)
                .sum::<Complex64>()
                * w
        })
        .collect();
    m.apply_in_place(&mut coeffs, false);
    Ok(ComplexVector::from_vec_unchecked(coeffs))
}

/// Outcome of testing `|(Mx)_j| ≈_{0, 2^{-i/2}·||M||_inf} |g_j|` coordinatewise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelCheck {
    pub level: u32,
    /// Additive band in the native scale of `M`.
    pub band: f64,
    pub failures_full: usize,
    /// Failures among the rows of `Q`, with multiplicity.
    pub failures_sampled: usize,
    pub allowed_full: f64,
    pub allowed_sampled: f64,
    pub passed: bool,
}

impl LevelCheck {
    pub(crate) fn evaluate(
        mx: &ComplexVector,
        g: &ComplexVector,
        q: &RowSample,
        level: u32,
        gamma: f64,
        flatness: f64,
    ) -> Self {
        let band = NetParams::band(level) * flatness;
        let spec = ApproxSpec::additive(band);
        let bad: Vec<bool> = mx
            .iter()
            .zip(g.iter())
            .map(|(a, b)| !approx_within(a.norm(), b.norm(), spec))
            .collect();
        let failures_full = bad.iter().filter(|&&b| b).count();
        let failures_sampled = q.indices().iter().filter(|&&j| bad[j]).count();
        let allowed_full = gamma * mx.len() as f64;
        let allowed_sampled = gamma * q.q() as f64;
        Self {
            level,
            band,
            failures_full,
            failures_sampled,
            allowed_full,
            allowed_sampled,
            passed: failures_full as f64 <= allowed_full && failures_sampled as f64 <= allowed_sampled,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodSample {
    /// `g` in the native scale of `M`.
    pub g: ComplexVector,
    pub attempts: u32,
    pub check: LevelCheck,
}

/// Redraws `g` at `level` (fresh `F` each time) until it tracks `|Mx|` on
/// all but a `γ` fraction of `[N]` and of `Q`.
pub fn find_good_g(
    m: &ImplicitUnitary,
    x: &ComplexVector,
    q: &RowSample,
    level: u32,
    params: &NetParams,
    rng: &mut Rng,
    max_attempts: u32,
) -> Result<GoodSample> {
    let d = phase_decompose(x)?;
    let mx = m.apply(x)?;
    find_good_g_with(m, &d, &mx, q, level, params, rng, max_attempts)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn find_good_g_with(
    m: &ImplicitUnitary,
    d: &PhaseDistribution,
    mx: &ComplexVector,
    q: &RowSample,
    level: u32,
    params: &NetParams,
    rng: &mut Rng,
    max_attempts: u32,
) -> Result<GoodSample> {
    params.check_level(level)?;
    check_dim(m.dim(), q.n())?;
    if max_attempts == 0 {
        return Err(Error::InvalidParameter("max_attempts must be at least 1".into()));
    }
    for attempt in 1..=max_attempts {
        let g = sample_g(m, d, level, params, rng)?;
        let check = LevelCheck::evaluate(mx, &g, q, level, params.gamma, m.flatness());
        if check.passed {
            return Ok(GoodSample {
                g,
                attempts: attempt,
                check,
            });
        }
    }
    Err(Error::NoGoodSample {
        level,
        attempts: max_attempts,
    })
}

/// Accepted g-vectors for a run of consecutive levels, rescaled to unit
/// flatness (`g / ||M||_inf`), which is the scale the family builders expect.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizedLevels {
    pub first_level: u32,
    pub flatness: f64,
    pub g: Vec<ComplexVector>,
    pub attempts: Vec<u32>,
    pub checks: Vec<LevelCheck>,
}

impl RealizedLevels {
    pub fn last_level(&self) -> u32 {
        self.first_level + self.g.len() as u32 - 1
    }

    /// Unit-flatness `g^(level)`.
    pub fn get(&self, level: u32) -> Option<&ComplexVector> {
        level
            .checked_sub(self.first_level)
            .and_then(|i| self.g.get(i as usize))
    }
}

/// Runs [`find_good_g`] for every level the variant needs. Level `i` draws
/// from stream `(seed, i)`.
pub fn realize_levels(
    m: &ImplicitUnitary,
    x: &ComplexVector,
    q: &RowSample,
    params: &NetParams,
    seed: u64,
    max_attempts: u32,
) -> Result<RealizedLevels> {
    let d = phase_decompose(x)?;
    let mx = m.apply(x)?;
    let levels = params.required_levels();
    let first_level = *levels.start();
    let flatness = m.flatness();
    let unit = Complex64::new(1.0 / flatness, 0.0);
    let mut out = RealizedLevels {
        first_level,
        flatness,
        g: Vec::new(),
        attempts: Vec::new(),
        checks: Vec::new(),
    };
    for level in levels {
        let mut r = rng::stream(seed, level as u64);
        let good = find_good_g_with(m, &d, &mx, q, level, params, &mut r, max_attempts)?;
        out.g.push(good.g.scaled(unit));
        out.attempts.push(good.attempts);
        out.checks.push(good.check);
    }
    Ok(out)
}
