//! Sparse recovery from `y = Ax` with `A` a subsampled unitary.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_dim, ComplexVector};
use crate::sampling::PartialOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Iht,
    Omp,
}

impl std::fmt::Display for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Solver::Iht => "iht",
            Solver::Omp => "omp",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub solver: Solver,
    pub estimate: ComplexVector,
    pub iterations: usize,
    /// `||A x̂ - y||_2`.
    pub residual: f64,
    /// Nonzero coordinates of the estimate, ascending.
    pub support: Vec<usize>,
    /// Residual reached `tol`.
    pub converged: bool,
    /// OMP hit a column already in the span of the chosen ones.
    pub degenerate: bool,
    /// Residual norm before the first and after every iteration.
    pub residual_history: Vec<f64>,
}

impl RecoveryResult {
    /// `||x̂ - x||_2 / ||x||_2` (absolute error when `x = 0`).
    pub fn relative_error(&self, truth: &ComplexVector) -> Result<f64> {
        let d = self.estimate.distance(truth)?;
        let n = truth.norm2();
        Ok(if n == 0.0 { d } else { d / n })
    }
}

fn check_inputs(a: &PartialOperator<'_>, y: &ComplexVector, k: usize) -> Result<()> {
    check_dim(a.rows(), y.len())?;
    if k == 0 || k > a.cols() {
        return Err(Error::InvalidParameter(format!("k={k} must lie in 1..={}", a.cols())));
    }
    Ok(())
}

/// Keeps the `k` largest-magnitude entries, breaking ties toward the lower
/// index, and zeroes the rest.
pub fn hard_threshold(v: &mut [Complex64], k: usize) {
    if k >= v.len() {
        return;
    }
    let mut order: Vec<(f64, usize)> = v.iter().enumerate().map(|(i, z)| (z.norm_sqr(), i)).collect();
    order.select_nth_unstable_by(k - 1, |a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in &order[k..] {
        v[i] = Complex64::new(0.0, 0.0);
    }
}

fn residual_of(a: &PartialOperator<'_>, x: &ComplexVector, y: &ComplexVector) -> Result<(ComplexVector, f64)> {
    let ax = a.apply(x)?;
    let r: Vec<Complex64> = y.iter().zip(ax.iter()).map(|(u, v)| u - v).collect();
    let norm = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok((ComplexVector::from_vec_unchecked(r), norm))
}

/// Iterative hard thresholding with unit step: `x ← H_k(x + A*(y - Ax))`
/// from `x = 0`, until `||y - Ax||_2 <= tol` or `max_iters` updates.
pub fn iht(a: &PartialOperator<'_>, y: &ComplexVector, k: usize, max_iters: usize, tol: f64) -> Result<RecoveryResult> {
    check_inputs(a, y, k)?;
    let mut x = ComplexVector::zeros(a.cols());
    let (mut r, mut norm) = residual_of(a, &x, y)?;
    let mut history = vec![norm];
    let mut iterations = 0;
    while norm > tol && iterations < max_iters {
        let grad = a.apply_adjoint(&r)?;
        let mut next: Vec<Complex64> = x.iter().zip(grad.iter()).map(|(u, g)| u + g).collect();
        hard_threshold(&mut next, k);
        x = ComplexVector::from_vec_unchecked(next);
        (r, norm) = residual_of(a, &x, y)?;
        history.push(norm);
        iterations += 1;
        if !norm.is_finite() {
            break;
        }
    }
    Ok(RecoveryResult {
        solver: Solver::Iht,
        support: x.support(),
        estimate: x,
        iterations,
        residual: norm,
        converged: norm <= tol,
        degenerate: false,
        residual_history: history,
    })
}

fn dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn norm(u: &[Complex64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative size below which a new column counts as dependent.
const DEPENDENCE_TOLERANCE: f64 = 1e-10;

/// Orthogonal matching pursuit: up to `k` greedy picks of the column most
/// correlated with the residual (lowest index on ties), each followed by a
/// least-squares refit kept incrementally via Gram-Schmidt.
pub fn omp(a: &PartialOperator<'_>, y: &ComplexVector, k: usize, tol: f64) -> Result<RecoveryResult> {
    check_inputs(a, y, k)?;
    let n = a.cols();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut in_support = vec![false; n];
    // orthonormal basis of the chosen columns and R with A_S = Q R
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    let mut r_cols: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    let mut resid: Vec<Complex64> = y.as_slice().to_vec();
    let mut history = vec![norm(&resid)];
    let mut degenerate = false;

    while chosen.len() < k && *history.last().unwrap() > tol {
        let corr = a.apply_adjoint(&ComplexVector::from_vec_unchecked(resid.clone()))?;
        let mut best: Option<(usize, f64)> = None;
        for (j, c) in corr.iter().enumerate() {
            let m = c.norm_sqr();
            if !in_support[j] && best.is_none_or(|(_, b)| m > b) {
                best = Some((j, m));
            }
        }
        let Some((j, _)) = best else { break };
        let col = a.column(j);
        let col_norm = norm(&col);
        let mut v = col.clone();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); basis.len()];
        // two Gram-Schmidt passes
        for _ in 0..2 {
            for (b, c) in basis.iter().zip(coeffs.iter_mut()) {
                let p = dot(b, &v);
                *c += p;
                v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= bi * p);
            }
        }
        let rest = norm(&v);
        if rest <= DEPENDENCE_TOLERANCE * col_norm.max(f64::MIN_POSITIVE) {
            degenerate = true;
            break;
        }
        v.iter_mut().for_each(|z| *z /= rest);
        let p = dot(&v, &resid);
        resid.iter_mut().zip(&v).for_each(|(ri, vi)| *ri -= vi * p);
        coeffs.push(Complex64::new(rest, 0.0));
        basis.push(v);
        r_cols.push(coeffs);
        chosen.push(j);
        in_support[j] = true;
        history.push(norm(&resid));
    }

    // back-substitute R z = Q* y
    let s = chosen.len();
    let qty: Vec<Complex64> = basis.iter().map(|b| dot(b, y.as_slice())).collect();
    let mut z = vec![Complex64::new(0.0, 0.0); s];
    for i in (0..s).rev() {
        let mut acc = qty[i];
        for c in i + 1..s {
            acc -= r_cols[c][i] * z[c];
        }
        z[i] = acc / r_cols[i][i];
    }
    let mut est = vec![Complex64::new(0.0, 0.0); n];
    for (&j, &v) in chosen.iter().zip(&z) {
        est[j] = v;
    }
    let estimate = ComplexVector::from_vec_unchecked(est);
    let (_, residual) = residual_of(a, &estimate, y)?;
    Ok(RecoveryResult {
        solver: Solver::Omp,
        support: estimate.support(),
        estimate,
        iterations: chosen.len(),
        residual,
        converged: residual <= tol,
        degenerate,
        residual_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ImplicitUnitary;
    use crate::rip::rip_constant_exact;
    use crate::rng;
    use crate::sampling::{sample_rows, RowSample};
    use rand::Rng as _;

    fn sign_sparse(n: usize, k: usize, seed: u64) -> ComplexVector {
        let mut r = rng::from_seed(seed);
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for j in rand::seq::index::sample(&mut r, n, k) {
            v[j] = Complex64::new(if r.random::<bool>() { 1.0 } else { -1.0 }, 0.0);
        }
        ComplexVector::new(v).unwrap()
    }

    #[test]
    fn threshold_ties_go_to_lower_index() {
        let mut v: Vec<Complex64> = [1.0, 2.0, 2.0, -2.0, 0.5].iter().map(|&x| Complex64::new(x, 0.0)).collect();
        hard_threshold(&mut v, 2);
        let kept: Vec<usize> = (0..5).filter(|&i| v[i].norm() > 0.0).collect();
        assert_eq!(kept, vec![1, 2]);
    }

    #[test]
    fn full_sample_recovers_in_one_step() {
        let m = ImplicitUnitary::dft(64).unwrap();
        let a = PartialOperator::new(&m, RowSample::full(64)).unwrap();
        let x = sign_sparse(64, 5, 1);
        let y = a.apply(&x).unwrap();
        let res = iht(&a, &y, 5, 10, 1e-10).unwrap();
        assert_eq!(res.iterations, 1);
        assert!(res.relative_error(&x).unwrap() < 1e-12);
        assert_eq!(res.support, x.support());
    }

    #[test]
    fn zero_measurements_give_zero() {
        let m = ImplicitUnitary::hadamard(32).unwrap();
        let a = PartialOperator::new(&m, sample_rows(32, 12, 3).unwrap()).unwrap();
        let y = ComplexVector::zeros(12);
        for res in [iht(&a, &y, 3, 50, 1e-12).unwrap(), omp(&a, &y, 3, 1e-12).unwrap()] {
            assert!(res.support.is_empty());
            assert_eq!(res.iterations, 0);
            assert!(res.converged);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = ImplicitUnitary::dft(8).unwrap();
        let a = PartialOperator::new(&m, sample_rows(8, 4, 0).unwrap()).unwrap();
        assert!(iht(&a, &ComplexVector::zeros(5), 1, 1, 0.0).is_err());
        assert!(omp(&a, &ComplexVector::zeros(4), 0, 0.0).is_err());
    }

    #[test]
    fn omp_finds_single_column() {
        let m = ImplicitUnitary::dft(128).unwrap();
        let a = PartialOperator::new(&m, sample_rows(128, 24, 8).unwrap()).unwrap();
        for j in [0, 17, 127] {
            let x = ComplexVector::basis(128, j).scaled(Complex64::new(0.3, -1.2));
            let y = a.apply(&x).unwrap();
            let res = omp(&a, &y, 1, 1e-10).unwrap();
            assert_eq!(res.support, vec![j]);
            assert!(res.relative_error(&x).unwrap() < 1e-12);
        }
    }

    #[test]
    fn omp_residual_is_nonincreasing() {
        let m = ImplicitUnitary::hadamard(256).unwrap();
        for seed in 0..30 {
            let a = PartialOperator::new(&m, sample_rows(256, 40, seed).unwrap()).unwrap();
            let x = sign_sparse(256, 10, seed + 100);
            let y = a.apply(&x).unwrap();
            let res = omp(&a, &y, 12, 1e-12).unwrap();
            for w in res.residual_history.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn omp_reports_dependent_columns() {
        // only two distinct rows: any third column is in the span
        let m = ImplicitUnitary::dft(16).unwrap();
        let a = PartialOperator::new(&m, RowSample::from_indices(16, vec![0, 5, 0, 5]).unwrap()).unwrap();
        let x = sign_sparse(16, 4, 2);
        let y = a.apply(&x).unwrap();
        let res = omp(&a, &y, 4, 0.0).unwrap();
        assert!(res.degenerate || res.converged);
        assert!(res.iterations <= 2);
        assert!(res.residual.is_finite());
    }

    #[test]
    fn iht_is_exactly_sparse_every_run() {
        let m = ImplicitUnitary::dft(128).unwrap();
        for seed in 0..20 {
            let a = PartialOperator::new(&m, sample_rows(128, 30, seed).unwrap()).unwrap();
            let x = sign_sparse(128, 4, seed);
            let res = iht(&a, &a.apply(&x).unwrap(), 4, 30, 0.0).unwrap();
            assert!(res.support.len() <= 4);
        }
    }

    #[test]
    fn small_rip_constant_implies_recovery() {
        // Whenever exhaustive δ_3k < 1/√32, every tested k-sparse x is recovered.
        let n = 16;
        let k = 1;
        let m = ImplicitUnitary::dft(n).unwrap();
        let mut qualified = 0;
        for seed in 0..40 {
            let a = PartialOperator::new(&m, sample_rows(n, 512, seed).unwrap()).unwrap();
            if rip_constant_exact(&a, 3 * k).unwrap().value >= 1.0 / 32f64.sqrt() {
                continue;
            }
            qualified += 1;
            for j in 0..n {
                for phase in [1.0, -1.0] {
                    let x = ComplexVector::basis(n, j).scaled(Complex64::new(phase, 0.0));
                    let res = iht(&a, &a.apply(&x).unwrap(), k, 200, 1e-12).unwrap();
                    assert!(res.relative_error(&x).unwrap() < 1e-9, "seed {seed}, column {j}");
                }
            }
        }
        assert!(qualified >= 10, "only {qualified} samples qualified");
    }

    #[test]
    fn iht_recovers_at_moderate_scale() {
        let n = 1024;
        let k = 8;
        let q = 4 * k * 10;
        let m = ImplicitUnitary::dft(n).unwrap();
        let mut iht_ok = 0;
        let mut omp_ok = 0;
        for seed in 0..20u64 {
            let a = PartialOperator::new(&m, sample_rows(n, q, seed).unwrap()).unwrap();
            let x = sign_sparse(n, k, 10_000 + seed);
            let y = a.apply(&x).unwrap();
            let tol = 1e-10 * y.norm2();
            iht_ok += (iht(&a, &y, k, 500, tol).unwrap().relative_error(&x).unwrap() <= 1e-6) as u32;
            omp_ok += (omp(&a, &y, k, tol).unwrap().relative_error(&x).unwrap() <= 1e-6) as u32;
        }
        assert!(iht_ok >= 17, "iht {iht_ok}/20");
        assert!(omp_ok >= 17, "omp {omp_ok}/20");
    }
}
