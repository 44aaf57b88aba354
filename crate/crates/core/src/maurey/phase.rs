use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use rand_distr::weighted::WeightedAliasIndex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexVector;

const L1_TOLERANCE: f64 = 1e-10;

/// `i^s` for `s ∈ {0,1,2,3}`: `1, i, -1, -i`.
pub fn unit_phase(s: usize) -> Complex64 {
    match s & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Weights `p_{ℓ,s} >= 0` over `[N] x {0,1,2,3}` with total mass 1.
///
/// For a decomposition of `x`: `Σ_s p_{ℓ,s} = |x_ℓ|` and
/// `√2 · Σ_s p_{ℓ,s}·i^s = x_ℓ`, so `Mx` is the expectation of
/// `√2 · i^s · M^(ℓ)` under `(ℓ, s) ~ p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDistribution {
    weights: Vec<[f64; 4]>,
}

/// Splits each `x_ℓ = a + bi` across the four phases: positive and negative
/// parts of `a` and `b` scaled by `1/√2`, plus an equal slack on phases 0 and
/// 2 that cancels in the signed sum and restores the mass `|x_ℓ|`.
pub fn phase_decompose(x: &ComplexVector) -> Result<PhaseDistribution> {
    let l1 = x.norm1();
    if (l1 - 1.0).abs() > L1_TOLERANCE {
        return Err(Error::NotL1Normalized(l1));
    }
    let weights = x
        .iter()
        .map(|z| {
            let (a, b) = (z.re, z.im);
            let mut p = [
                a.max(0.0) / SQRT_2,
                b.max(0.0) / SQRT_2,
                (-a).max(0.0) / SQRT_2,
                (-b).max(0.0) / SQRT_2,
            ];
            let slack = ((z.norm() - (a.abs() + b.abs()) / SQRT_2) / 2.0).max(0.0);
            p[0] += slack;
            p[2] += slack;
            p
        })
        .collect();
    Ok(PhaseDistribution { weights })
}

impl PhaseDistribution {
    /// Wraps explicit weights; they must be finite, nonnegative and sum to 1.
    pub fn from_weights(weights: Vec<[f64; 4]>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty);
        }
        if weights.iter().flatten().any(|&w| !(w.is_finite() && w >= 0.0)) {
            return Err(Error::InvalidParameter("weights must be finite and nonnegative".into()));
        }
        let d = Self { weights };
        let total = d.total_mass();
        if (total - 1.0).abs() > L1_TOLERANCE {
            return Err(Error::NotL1Normalized(total));
        }
        Ok(d)
    }

    /// All mass on the single pair `(col, phase)`.
    pub fn point_mass(n: usize, col: usize, phase: usize) -> Self {
        let mut weights = vec![[0.0; 4]; n];
        weights[col][phase & 3] = 1.0;
        Self { weights }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, col: usize, phase: usize) -> f64 {
        self.weights[col][phase]
    }

    pub fn weights(&self) -> &[[f64; 4]] {
        &self.weights
    }

    /// `Σ_s p_{ℓ,s}`.
    pub fn mass(&self, col: usize) -> f64 {
        self.weights[col].iter().sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().flatten().sum()
    }

    /// `√2 · Σ_s p_{ℓ,s}·i^s`, the entry this distribution encodes.
    pub fn signed_sum(&self, col: usize) -> Complex64 {
        self.weights[col]
            .iter()
            .enumerate()
            .map(|(s, &p)| unit_phase(s) * p)
            .sum::<Complex64>()
            * SQRT_2
    }

    /// Alias table over the flattened index `4ℓ + s`.
    pub(crate) fn sampler(&self) -> WeightedAliasIndex<f64> {
        WeightedAliasIndex::new(self.weights.iter().flatten().copied().collect())
            .expect("validated weights")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn check_invariants(x: &ComplexVector, d: &PhaseDistribution) {
        for (l, z) in x.iter().enumerate() {
            assert!((d.mass(l) - z.norm()).abs() <= 1e-12, "mass at {l}");
            assert!((d.signed_sum(l) - z).norm() <= 1e-12, "signed sum at {l}");
            assert!(d.weights()[l].iter().all(|&p| p >= 0.0));
        }
        assert!((d.total_mass() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn real_unit_entry() {
        let x = ComplexVector::basis(3, 0);
        let d = phase_decompose(&x).unwrap();
        // oracle: evaluate the two invariants independently of the builder
        let slack = (1.0 - 1.0 / SQRT_2) / 2.0;
        assert!((d.weight(0, 0) - (1.0 / SQRT_2 + slack)).abs() < 1e-15);
        assert!((d.weight(0, 2) - slack).abs() < 1e-15);
        assert_eq!(d.weight(0, 1), 0.0);
        assert_eq!(d.weight(0, 3), 0.0);
        let signed = SQRT_2 * (d.weight(0, 0) - d.weight(0, 2));
        assert!((signed - 1.0).abs() < 1e-15);
        check_invariants(&x, &d);
    }

    #[test]
    fn imaginary_unit_entry() {
        let x = ComplexVector::new(vec![Complex64::new(0.0, 1.0)]).unwrap();
        let d = phase_decompose(&x).unwrap();
        assert!(d.weight(0, 1) > 0.0);
        assert_eq!(d.weight(0, 3), 0.0);
        assert_eq!(d.weight(0, 0), d.weight(0, 2));
        check_invariants(&x, &d);
    }

    #[test]
    fn rejects_unnormalized() {
        let x = ComplexVector::from_real(&[0.5, 0.6]).unwrap();
        assert!(matches!(phase_decompose(&x), Err(Error::NotL1Normalized(_))));
    }

    #[test]
    fn invariants_on_many_vectors() {
        let mut r = rng::from_seed(31);
        for trial in 0..10_000 {
            let n = r.random_range(1..12);
            let raw: Vec<Complex64> = (0..n)
                .map(|_| match trial % 4 {
                    0 => Complex64::new(r.random_range(-1.0..1.0), 0.0),
                    1 => Complex64::new(0.0, r.random_range(-1.0..1.0)),
                    2 => Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)),
                    _ => Complex64::new(0.0, 0.0),
                })
                .collect();
            let mut v = ComplexVector::new(raw).unwrap();
            if v.norm1() == 0.0 {
                // degenerate single-entry case
                let j = r.random_range(0..n);
                let phase = Complex64::from_polar(1.0, r.random_range(0.0..std::f64::consts::TAU));
                v = ComplexVector::basis(n, j).scaled(phase);
            }
            let x = v.l1_normalized().unwrap();
            check_invariants(&x, &phase_decompose(&x).unwrap());
        }
    }

    #[test]
    fn explicit_weights_are_validated() {
        assert!(PhaseDistribution::from_weights(vec![[0.5, 0.5, 0.0, 0.0]]).is_ok());
        assert!(PhaseDistribution::from_weights(vec![[0.5, 0.4, 0.0, 0.0]]).is_err());
        assert!(PhaseDistribution::from_weights(vec![[1.5, -0.5, 0.0, 0.0]]).is_err());
        let d = PhaseDistribution::point_mass(4, 2, 1);
        assert_eq!(d.total_mass(), 1.0);
        assert_eq!(d.signed_sum(2), Complex64::new(0.0, SQRT_2));
    }
}
