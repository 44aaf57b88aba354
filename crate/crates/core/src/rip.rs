//! Restricted isometry constants of partial operators.
//!
//! `δ_k(A) = max_{|S|=k} ||A_S* A_S - I_k||`, the spectral deviation of the
//! Gram submatrix from the identity. At desk scale this is computed exactly by
//! enumerating supports in colexicographic order; otherwise a lower bound is
//! taken over random supports.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{approx_within, hermitian_eigen, ApproxSpec, ComplexVector, UnitaryKind};
use crate::rng;
use crate::sampling::PartialOperator;

pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RipMode {
    Exhaustive,
    RandomSupports { trials: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RipEstimate {
    pub k: usize,
    pub value: f64,
    pub mode: RipMode,
    /// Support achieving `value`, ascending.
    pub witness: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub elapsed_ms: Option<f64>,
}

/// `A*A` for a partial operator, stored by structure.
///
/// For the DFT the Gram matrix is circulant and for the Hadamard matrix it is
/// dyadic (depends on `a XOR b`); both are generated from the row histogram
/// with one fast transform.
#[derive(Clone, Debug)]
pub struct Gram {
    n: usize,
    repr: GramRepr,
}

#[derive(Clone, Debug)]
enum GramRepr {
    Circulant(Vec<Complex64>),
    Dyadic(Vec<Complex64>),
    Dense(Vec<Complex64>),
}

impl Gram {
    pub fn of(a: &PartialOperator<'_>) -> Self {
        let n = a.cols();
        let base = a.base();
        let repr = match base.kind() {
            UnitaryKind::Dft | UnitaryKind::Hadamard => {
                let mut h: Vec<Complex64> = a
                    .sample()
                    .histogram()
                    .into_iter()
                    .map(|c| Complex64::new(c as f64, 0.0))
                    .collect();
                base.apply_in_place(&mut h, false);
                let s = (n as f64).sqrt() / a.rows() as f64;
                h.iter_mut().for_each(|z| *z *= s);
                if base.kind() == UnitaryKind::Dft {
                    GramRepr::Circulant(h)
                } else {
                    GramRepr::Dyadic(h)
                }
            }
            UnitaryKind::Dense => {
                let q = a.rows();
                let d = a.to_dense();
                let mut g = vec![Complex64::new(0.0, 0.0); n * n];
                for x in 0..n {
                    for y in x..n {
                        let z: Complex64 = (0..q).map(|r| d[r * n + x].conj() * d[r * n + y]).sum();
                        g[x * n + y] = z;
                        g[y * n + x] = z.conj();
                    }
                }
                GramRepr::Dense(g)
            }
        };
        Self { n, repr }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `(A*A)_{a,b} = <A^(a), A^(b)>`.
    pub fn entry(&self, a: usize, b: usize) -> Complex64 {
        match &self.repr {
            GramRepr::Circulant(c) => c[(b + self.n - a) % self.n],
            GramRepr::Dyadic(c) => c[a ^ b],
            GramRepr::Dense(g) => g[a * self.n + b],
        }
    }

    /// Row-major `A_S* A_S - I`.
    pub fn deviation(&self, support: &[usize]) -> Vec<Complex64> {
        let k = support.len();
        let mut out = Vec::with_capacity(k * k);
        for (i, &a) in support.iter().enumerate() {
            for (j, &b) in support.iter().enumerate() {
                let mut z = self.entry(a, b);
                if i == j {
                    z -= 1.0;
                }
                out.push(z);
            }
        }
        out
    }

    /// `||A_S* A_S - I||` (spectral norm).
    pub fn support_deviation(&self, support: &[usize]) -> f64 {
        let k = support.len();
        let d = self.deviation(support);
        match k {
            1 => d[0].re.abs(),
            2 => {
                let (p, r) = (d[0].re, d[3].re);
                let mid = 0.5 * (p + r);
                let rad = (0.25 * (p - r) * (p - r) + d[1].norm_sqr()).sqrt();
                (mid + rad).abs().max((mid - rad).abs())
            }
            _ => hermitian_eigen(k, &d).spectral_norm(),
        }
    }
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// The `rank`-th `k`-subset in colexicographic order.
pub fn colex_unrank(mut rank: u128, k: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    for i in (1..=k).rev() {
        // largest c with C(c, i) <= rank
        let mut c = i - 1;
        while binomial(c + 1, i) <= rank {
            c += 1;
        }
        out[i - 1] = c;
        rank -= binomial(c, i);
    }
    out
}

/// Advances `comb` to its colex successor among subsets of `[0, n)`.
pub fn colex_next(comb: &mut [usize], n: usize) -> bool {
    let k = comb.len();
    for i in 0..k {
        let limit = if i + 1 < k { comb[i + 1] } else { n };
        if comb[i] + 1 < limit {
            comb[i] += 1;
            for (j, c) in comb.iter_mut().enumerate().take(i) {
                *c = j;
            }
            return true;
        }
    }
    false
}

fn check_order(a: &PartialOperator<'_>, k: usize) -> Result<()> {
    if k == 0 || k > a.cols() {
        return Err(Error::InvalidParameter(format!(
            "sparsity order k={k} must lie in 1..={}",
            a.cols()
        )));
    }
    Ok(())
}

/// Exact `δ_k` with the default enumeration budget.
pub fn rip_constant_exact(a: &PartialOperator<'_>, k: usize) -> Result<RipEstimate> {
    rip_constant_exact_with_budget(a, k, DEFAULT_ENUMERATION_BUDGET)
}

/// Exact `δ_k` by enumerating all `C(N, k)` supports.
///
/// Refuses when the support count exceeds `budget`. Work is split into rank
/// ranges; the reduction keeps the largest value and, among equal values,
/// the support with the smallest colex rank.
pub fn rip_constant_exact_with_budget(
    a: &PartialOperator<'_>,
    k: usize,
    budget: u64,
) -> Result<RipEstimate> {
    check_order(a, k)?;
    let n = a.cols();
    let total = binomial(n, k);
    if total > budget as u128 {
        return Err(Error::BudgetExceeded {
            supports: total,
            budget,
        });
    }
    let start = Instant::now();
    let gram = Gram::of(a);
    exhaustive_max(&gram, k, total, start)
}

pub(crate) fn exhaustive_max(gram: &Gram, k: usize, total: u128, start: Instant) -> Result<RipEstimate> {
    let n = gram.dim();
    let chunks = (rayon::current_num_threads() as u64 * 8).min(total as u64).max(1);
    let per = total.div_ceil(chunks as u128);
    let best = (0..chunks)
        .into_par_iter()
        .filter_map(|c| {
            let c = c as u128;
            let lo = c * per;
            let hi = ((c + 1) * per).min(total);
            if lo >= hi {
                return None;
            }
            let mut comb = colex_unrank(lo, k);
            let mut best = (f64::NEG_INFINITY, lo);
            for rank in lo..hi {
                let v = gram.support_deviation(&comb);
                if v > best.0 {
                    best = (v, rank);
                }
                if rank + 1 < hi {
                    colex_next(&mut comb, n);
                }
            }
            Some(best)
        })
        .reduce_with(|x, y| if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x })
        .expect("at least one support");
    Ok(RipEstimate {
        k,
        value: best.0,
        mode: RipMode::Exhaustive,
        witness: colex_unrank(best.1, k),
        seed: None,
        elapsed_ms: Some(start.elapsed().as_secs_f64() * 1e3),
    })
}

/// Lower bound on `δ_k`: the maximum deviation over `trials` uniformly random
/// supports. Support `t` is drawn from stream `(seed, t)`, so a run with more
/// trials sees a superset of the supports of a shorter run.
pub fn rip_lower_bound(
    a: &PartialOperator<'_>,
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<RipEstimate> {
    check_order(a, k)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let start = Instant::now();
    let gram = Gram::of(a);
    let mut est = random_support_max(&gram, k, trials, seed);
    est.elapsed_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    Ok(est)
}

pub(crate) fn random_support_max(gram: &Gram, k: usize, trials: u64, seed: u64) -> RipEstimate {
    let n = gram.dim();
    let (value, _, witness) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(seed, t);
            let mut s = rand::seq::index::sample(&mut r, n, k).into_vec();
            s.sort_unstable();
            (gram.support_deviation(&s), t, s)
        })
        .reduce_with(|x, y| if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x })
        .expect("trials >= 1");
    RipEstimate {
        k,
        value,
        mode: RipMode::RandomSupports { trials },
        witness,
        seed: Some(seed),
        elapsed_ms: None,
    }
}

/// The extreme eigenpair of `A_S*A_S - I` for a support `S`: the signed
/// eigenvalue of largest magnitude and its unit eigenvector embedded in `C^N`.
pub fn witness_eigenpair(a: &PartialOperator<'_>, support: &[usize]) -> (f64, ComplexVector) {
    let gram = Gram::of(a);
    let d = gram.deviation(support);
    let e = hermitian_eigen(support.len(), &d);
    let i = e.extreme_index();
    let mut x = vec![Complex64::new(0.0, 0.0); a.cols()];
    for (&s, &z) in support.iter().zip(e.vector(i)) {
        x[s] = z;
    }
    (e.values[i], ComplexVector::from_vec_unchecked(x))
}

/// Whether `(1-eps)||x||² <= ||Ax||² <= (1+eps)||x||²`.
pub fn check_rip_for_vector(a: &PartialOperator<'_>, x: &ComplexVector, eps: f64) -> Result<bool> {
    let nx = x.norm2_sqr();
    if nx == 0.0 {
        return Err(Error::InvalidParameter("x must be nonzero".into()));
    }
    let nax = a.apply(x)?.norm2_sqr();
    Ok(approx_within(nax, nx, ApproxSpec::new(eps, 0.0)?))
}
