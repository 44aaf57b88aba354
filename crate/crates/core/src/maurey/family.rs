use serde::{Deserialize, Serialize};

use super::NetParams;
use crate::error::{Error, Result};
use crate::linalg::ComplexVector;
use crate::numeric::{exact_sum, two_diff};

/// Clipped level-set family built from `g^(1+r), …, g^(t+r)`.
///
/// `B_i` holds the coordinates whose first crossing of `|g^(i+r)_j| >=
/// 2·2^{-i/2}` happens at level `i`; `h^(i)_j = min(|g^(i+r)_j|², 9·2^{-i})`
/// on `B_i` and zero elsewhere. `h[i-1]` is stored aligned with `sets[i-1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimpleFamily {
    pub n: usize,
    pub t: u32,
    pub r: u32,
    /// Unit-flatness `g^(1+r)..g^(t+r)`.
    pub g_levels: Vec<ComplexVector>,
    pub sets: Vec<Vec<usize>>,
    pub h: Vec<Vec<f64>>,
}

/// Telescoped family built from `g^(1), …, g^(t+r)`.
///
/// `C_i` is the first-crossing set of `|g^(i)_j| >= 2·2^{-i/2}`. For
/// `m ∈ [i, i+r]`, `h^(i,m)_j = |g^(m)_j|²` on `C_i`, and `Δ^(i,m)` is the
/// difference `h^(i,m) - h^(i,m-1)` (with `h^(i,i-1) = 0`) zeroed wherever
/// it exceeds `30·2^{-(i+m)/2}` in magnitude. `h[i-1][m-i]` and
/// `delta[i-1][m-i]` are stored aligned with `sets[i-1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImprovedFamily {
    pub n: usize,
    pub t: u32,
    pub r: u32,
    /// Unit-flatness `g^(1)..g^(t+r)`.
    pub g_levels: Vec<ComplexVector>,
    pub sets: Vec<Vec<usize>>,
    pub h: Vec<Vec<Vec<f64>>>,
    pub delta: Vec<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum NetFamily {
    Simple(SimpleFamily),
    Improved(ImprovedFamily),
}

fn threshold(i: u32) -> f64 {
    2.0 * 2f64.powf(-(i as f64) / 2.0)
}

/// `idx[j]` = the smallest level `i ∈ 1..=t` with `|g_i[j]| >= 2·2^{-i/2}`,
/// where `g_i = levels[i-1]`.
fn first_crossings(levels: &[&ComplexVector], n: usize) -> Vec<Option<u32>> {
    (0..n)
        .map(|j| {
            levels
                .iter()
                .enumerate()
                .find(|(k, g)| g[j].norm() >= threshold(*k as u32 + 1))
                .map(|(k, _)| k as u32 + 1)
        })
        .collect()
}

fn check_levels(g_levels: &[ComplexVector], expected: usize) -> Result<usize> {
    if g_levels.len() != expected {
        return Err(Error::InvalidParameter(format!(
            "expected {expected} g-levels, got {}",
            g_levels.len()
        )));
    }
    let n = g_levels[0].len();
    if let Some(g) = g_levels.iter().find(|g| g.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: g.len(),
        });
    }
    Ok(n)
}

/// Builds the clipped family from the `t` unit-flatness vectors
/// `g^(1+r), …, g^(t+r)`.
pub fn build_simple_family(g_levels: &[ComplexVector], params: &NetParams) -> Result<SimpleFamily> {
    let t = params.t;
    let n = check_levels(g_levels, t as usize)?;
    let refs: Vec<&ComplexVector> = g_levels.iter().collect();
    let crossing = first_crossings(&refs, n);
    let mut sets = vec![Vec::new(); t as usize];
    let mut h = vec![Vec::new(); t as usize];
    for (j, c) in crossing.iter().enumerate() {
        if let Some(i) = *c {
            let k = (i - 1) as usize;
            sets[k].push(j);
            h[k].push(g_levels[k][j].norm_sqr().min(SimpleFamily::cap(i)));
        }
    }
    Ok(SimpleFamily {
        n,
        t,
        r: params.r,
        g_levels: g_levels.to_vec(),
        sets,
        h,
    })
}

/// Builds the telescoped family from the `t + r` unit-flatness vectors
/// `g^(1), …, g^(t+r)`.
pub fn build_improved_family(g_levels: &[ComplexVector], params: &NetParams) -> Result<ImprovedFamily> {
    let (t, r) = (params.t, params.r);
    let n = check_levels(g_levels, (t + r) as usize)?;
    let refs: Vec<&ComplexVector> = g_levels[..t as usize].iter().collect();
    let crossing = first_crossings(&refs, n);
    let mut sets = vec![Vec::new(); t as usize];
    for (j, c) in crossing.iter().enumerate() {
        if let Some(i) = *c {
            sets[(i - 1) as usize].push(j);
        }
    }
    let mut h = Vec::with_capacity(t as usize);
    let mut delta = Vec::with_capacity(t as usize);
    for i in 1..=t {
        let set = &sets[(i - 1) as usize];
        let hi: Vec<Vec<f64>> = (i..=i + r)
            .map(|m| set.iter().map(|&j| g_levels[(m - 1) as usize][j].norm_sqr()).collect())
            .collect();
        let di: Vec<Vec<f64>> = (i..=i + r)
            .map(|m| {
                let bound = ImprovedFamily::delta_bound(i, m);
                let cur = &hi[(m - i) as usize];
                (0..set.len())
                    .map(|p| {
                        let prev = if m == i { 0.0 } else { hi[(m - i - 1) as usize][p] };
                        let d = cur[p] - prev;
                        if d.abs() <= bound {
                            d
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        h.push(hi);
        delta.push(di);
    }
    let family = ImprovedFamily {
        n,
        t,
        r,
        g_levels: g_levels.to_vec(),
        sets,
        h,
        delta,
    };
    debug_assert!(family.telescopes());
    Ok(family)
}

fn expand(n: usize, set: &[usize], values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (&j, &v) in set.iter().zip(values) {
        out[j] = v;
    }
    out
}

impl SimpleFamily {
    /// `9·2^{-i}`.
    pub fn cap(i: u32) -> f64 {
        9.0 * 2f64.powi(-(i as i32))
    }

    pub fn set(&self, i: u32) -> &[usize] {
        &self.sets[(i - 1) as usize]
    }

    /// Dense `h^(i)`.
    pub fn h_dense(&self, i: u32) -> Vec<f64> {
        let k = (i - 1) as usize;
        expand(self.n, &self.sets[k], &self.h[k])
    }

    /// `Σ_i h^(i)_j` for every `j`.
    pub fn approximation(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (set, vals) in self.sets.iter().zip(&self.h) {
            for (&j, &v) in set.iter().zip(vals) {
                out[j] += v;
            }
        }
        out
    }
}

impl ImprovedFamily {
    /// `30·2^{-(i+m)/2}`.
    pub fn delta_bound(i: u32, m: u32) -> f64 {
        30.0 * 2f64.powf(-((i + m) as f64) / 2.0)
    }

    pub fn set(&self, i: u32) -> &[usize] {
        &self.sets[(i - 1) as usize]
    }

    fn slot(&self, i: u32, m: u32) -> Option<(usize, usize)> {
        (i >= 1 && i <= self.t && m >= i && m <= i + self.r).then(|| ((i - 1) as usize, (m - i) as usize))
    }

    /// Dense `h^(i,m)`; zero for `m` outside `[i, i+r]`.
    pub fn h_dense(&self, i: u32, m: u32) -> Vec<f64> {
        match self.slot(i, m) {
            Some((a, b)) => expand(self.n, &self.sets[a], &self.h[a][b]),
            None => vec![0.0; self.n],
        }
    }

    /// Dense `Δ^(i,m)`; zero for `m` outside `[i, i+r]`.
    pub fn delta_dense(&self, i: u32, m: u32) -> Vec<f64> {
        match self.slot(i, m) {
            Some((a, b)) => expand(self.n, &self.sets[a], &self.delta[a][b]),
            None => vec![0.0; self.n],
        }
    }

    /// Whether `Σ_{m=i}^{i+r} (h^(i,m) - h^(i,m-1)) = h^(i,i+r)` holds
    /// exactly in every coordinate, evaluating each difference without
    /// rounding and summing the differences exactly.
    pub fn telescopes(&self) -> bool {
        self.h.iter().all(|hi| {
            let len = hi[0].len();
            (0..len).all(|p| {
                let mut terms = Vec::with_capacity(2 * hi.len());
                let mut prev = 0.0;
                for row in hi {
                    let (d, e) = two_diff(row[p], prev);
                    terms.push(d);
                    terms.push(e);
                    prev = row[p];
                }
                exact_sum(terms) == prev
            })
        })
    }

    /// `Σ_i Σ_{m=i}^{i+r} Δ^(i,m)_j` for every `j`.
    pub fn approximation(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (set, di) in self.sets.iter().zip(&self.delta) {
            for (p, &j) in set.iter().enumerate() {
                out[j] = di.iter().map(|row| row[p]).sum();
            }
        }
        out
    }

    /// `Σ_i 2^{-i}·|C_i|/N`.
    pub fn level_mass(&self) -> f64 {
        self.sets
            .iter()
            .enumerate()
            .map(|(k, s)| 2f64.powi(-(k as i32 + 1)) * s.len() as f64)
            .sum::<f64>()
            / self.n as f64
    }
}

impl NetFamily {
    pub fn approximation(&self) -> Vec<f64> {
        match self {
            NetFamily::Simple(f) => f.approximation(),
            NetFamily::Improved(f) => f.approximation(),
        }
    }

    pub fn g_levels(&self) -> &[ComplexVector] {
        match self {
            NetFamily::Simple(f) => &f.g_levels,
            NetFamily::Improved(f) => &f.g_levels,
        }
    }

    /// Level index of `g_levels()[0]`.
    pub fn first_level(&self) -> u32 {
        match self {
            NetFamily::Simple(f) => f.r + 1,
            NetFamily::Improved(_) => 1,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            NetFamily::Simple(f) => f.n,
            NetFamily::Improved(f) => f.n,
        }
    }
}
