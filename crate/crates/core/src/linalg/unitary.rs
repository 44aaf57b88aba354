use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::vector::{check_dim, ComplexVector};
use crate::error::{Error, Result};

/// Maximum per-entry deviation of `M*M` from `I` accepted for dense input.
pub const DENSE_UNITARY_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitaryKind {
    /// Unitary DFT with kernel `exp(+2πi·jℓ/N)/√N`.
    Dft,
    /// Sylvester-Hadamard matrix scaled by `1/√N`; `N` must be a power of two.
    Hadamard,
    /// An explicit, validated dense matrix.
    Dense,
}

impl fmt::Display for UnitaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnitaryKind::Dft => "dft",
            UnitaryKind::Hadamard => "hadamard",
            UnitaryKind::Dense => "dense",
        })
    }
}

#[derive(Clone)]
enum Repr {
    Fft {
        plus: Arc<dyn Fft<f64>>,
        minus: Arc<dyn Fft<f64>>,
    },
    Walsh,
    /// Row-major `N x N`.
    Dense(Arc<[Complex64]>),
}

/// An `N x N` unitary matrix exposed through entry access and matvec.
///
/// Immutable after construction; cloning shares the underlying plan or
/// storage.
#[derive(Clone)]
pub struct ImplicitUnitary {
    n: usize,
    kind: UnitaryKind,
    flatness: f64,
    repr: Repr,
}

impl fmt::Debug for ImplicitUnitary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ImplicitUnitary")
            .field("n", &self.n)
            .field("kind", &self.kind)
            .field("flatness", &self.flatness)
            .field("fast", &self.has_fast_path())
            .finish()
    }
}

/// Builds a structured unitary of the given kind.
///
/// `Dense` has no canonical instance and is rejected here; use
/// [`ImplicitUnitary::from_dense`].
pub fn make_unitary(kind: UnitaryKind, n: usize) -> Result<ImplicitUnitary> {
    match kind {
        UnitaryKind::Dft => ImplicitUnitary::dft(n),
        UnitaryKind::Hadamard => ImplicitUnitary::hadamard(n),
        UnitaryKind::Dense => Err(Error::InvalidParameter(
            "dense unitaries must be supplied explicitly".into(),
        )),
    }
}

impl ImplicitUnitary {
    /// Unitary DFT. Powers of two use an FFT; other sizes are materialized.
    pub fn dft(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        let flatness = 1.0 / (n as f64).sqrt();
        let repr = if n.is_power_of_two() {
            let mut planner = FftPlanner::new();
            Repr::Fft {
                // rustfft's inverse direction carries the +i sign.
                plus: planner.plan_fft_inverse(n),
                minus: planner.plan_fft_forward(n),
            }
        } else {
            let mut data = Vec::with_capacity(n * n);
            for j in 0..n {
                for l in 0..n {
                    data.push(dft_entry(n, j, l));
                }
            }
            Repr::Dense(data.into())
        };
        Ok(Self {
            n,
            kind: UnitaryKind::Dft,
            flatness,
            repr,
        })
    }

    pub fn hadamard(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        if !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        Ok(Self {
            n,
            kind: UnitaryKind::Hadamard,
            flatness: 1.0 / (n as f64).sqrt(),
            repr: Repr::Walsh,
        })
    }

    /// Validates and wraps a row-major `n x n` matrix.
    pub fn from_dense(n: usize, entries: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        check_dim(n * n, entries.len())?;
        if let Some(index) = entries
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite { index });
        }
        let deviation = gram_deviation(n, &entries);
        if deviation > DENSE_UNITARY_TOLERANCE {
            return Err(Error::NotUnitary { deviation });
        }
        let flatness = entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        Ok(Self {
            n,
            kind: UnitaryKind::Dense,
            flatness,
            repr: Repr::Dense(entries.into()),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> UnitaryKind {
        self.kind
    }

    /// `||M||_inf`, the largest entry magnitude.
    pub fn flatness(&self) -> f64 {
        self.flatness
    }

    pub fn has_fast_path(&self) -> bool {
        !matches!(self.repr, Repr::Dense(_))
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        assert!(row < self.n && col < self.n, "index out of range");
        match &self.repr {
            Repr::Fft { .. } => dft_entry(self.n, row, col),
            Repr::Walsh => {
                let s = self.flatness;
                if (row & col).count_ones() % 2 == 0 {
                    Complex64::new(s, 0.0)
                } else {
                    Complex64::new(-s, 0.0)
                }
            }
            Repr::Dense(d) => d[row * self.n + col],
        }
    }

    /// Column `M^(col)`.
    pub fn column(&self, col: usize) -> Vec<Complex64> {
        (0..self.n).map(|j| self.entry(j, col)).collect()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Complex64> {
        match &self.repr {
            Repr::Dense(d) => d.to_vec(),
            _ => {
                let mut out = Vec::with_capacity(self.n * self.n);
                for j in 0..self.n {
                    for l in 0..self.n {
                        out.push(self.entry(j, l));
                    }
                }
                out
            }
        }
    }

    /// `Mx`.
    pub fn apply(&self, x: &ComplexVector) -> Result<ComplexVector> {
        check_dim(self.n, x.len())?;
        let mut buf = x.as_slice().to_vec();
        self.apply_in_place(&mut buf, false);
        Ok(ComplexVector::from_vec_unchecked(buf))
    }

    /// `M* y`.
    pub fn apply_adjoint(&self, y: &ComplexVector) -> Result<ComplexVector> {
        check_dim(self.n, y.len())?;
        let mut buf = y.as_slice().to_vec();
        self.apply_in_place(&mut buf, true);
        Ok(ComplexVector::from_vec_unchecked(buf))
    }

    /// `Mx` (or `M* x`) on a raw buffer of length `N`.
    pub(crate) fn apply_in_place(&self, buf: &mut Vec<Complex64>, adjoint: bool) {
        debug_assert_eq!(buf.len(), self.n);
        let scale = 1.0 / (self.n as f64).sqrt();
        match &self.repr {
            Repr::Fft { plus, minus } => {
                if adjoint {
                    minus.process(buf);
                } else {
                    plus.process(buf);
                }
                buf.iter_mut().for_each(|z| *z *= scale);
            }
            Repr::Walsh => {
                fwht(buf);
                buf.iter_mut().for_each(|z| *z *= scale);
            }
            Repr::Dense(d) => {
                let n = self.n;
                let out: Vec<Complex64> = if adjoint {
                    (0..n)
                        .map(|l| (0..n).map(|j| d[j * n + l].conj() * buf[j]).sum())
                        .collect()
                } else {
                    (0..n)
                        .map(|j| d[j * n..(j + 1) * n].iter().zip(buf.iter()).map(|(a, b)| a * b).sum())
                        .collect()
                };
                *buf = out;
            }
        }
    }

    /// `Mx` by direct O(N²) summation over [`entry`](Self::entry).
    pub fn apply_naive(&self, x: &ComplexVector) -> Result<ComplexVector> {
        check_dim(self.n, x.len())?;
        let out = (0..self.n)
            .map(|j| (0..self.n).map(|l| self.entry(j, l) * x[l]).sum())
            .collect();
        Ok(ComplexVector::from_vec_unchecked(out))
    }

    /// Largest per-entry deviation of `M*M` from the identity. O(N³).
    pub fn unitarity_deviation(&self) -> f64 {
        gram_deviation(self.n, &self.to_dense())
    }
}

fn dft_entry(n: usize, j: usize, l: usize) -> Complex64 {
    let phase = ((j as u128 * l as u128) % n as u128) as f64;
    Complex64::from_polar(1.0 / (n as f64).sqrt(), 2.0 * PI * phase / n as f64)
}

/// Unnormalized in-place fast Walsh-Hadamard transform (Sylvester order).
pub(crate) fn fwht<T>(buf: &mut [T])
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T>,
{
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in buf.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

fn gram_deviation(n: usize, m: &[Complex64]) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in a..n {
            let g: Complex64 = (0..n).map(|j| m[j * n + a].conj() * m[j * n + b]).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((g - target).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn random_vector(n: usize, seed: u64) -> ComplexVector {
        let mut r = rng::from_seed(seed);
        ComplexVector::new(
            (0..n)
                .map(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn dft_small_cases() {
        let m1 = make_unitary(UnitaryKind::Dft, 1).unwrap();
        assert_eq!(m1.entry(0, 0), Complex64::new(1.0, 0.0));

        let m2 = make_unitary(UnitaryKind::Dft, 2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((m2.entry(1, 1) - Complex64::new(-h, 0.0)).norm() < 1e-15);
        assert!((m2.entry(0, 1) - Complex64::new(h, 0.0)).norm() < 1e-15);
        assert_eq!(m2.flatness(), 1.0 / 2f64.sqrt());
    }

    #[test]
    fn dft4_is_unitary_by_dense_multiply() {
        let m = ImplicitUnitary::dft(4).unwrap();
        let d = m.to_dense();
        for a in 0..4 {
            for b in 0..4 {
                let g: Complex64 = (0..4).map(|j| d[j * 4 + a].conj() * d[j * 4 + b]).sum();
                let t = if a == b { 1.0 } else { 0.0 };
                assert!((g - t).norm() < 1e-12, "({a},{b}) {g}");
            }
        }
    }

    #[test]
    fn dft_first_column_is_flat() {
        let m = ImplicitUnitary::dft(4).unwrap();
        let y = m.apply(&ComplexVector::basis(4, 0)).unwrap();
        for z in y.iter() {
            assert!((z - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn hadamard_rejects_non_power_of_two() {
        assert!(matches!(
            make_unitary(UnitaryKind::Hadamard, 12),
            Err(Error::NotPowerOfTwo(12))
        ));
    }

    #[test]
    fn non_power_of_two_dft_uses_dense_path() {
        let m = ImplicitUnitary::dft(6).unwrap();
        assert!(!m.has_fast_path());
        assert!(m.unitarity_deviation() < 1e-12);
        assert!((m.flatness() - 1.0 / 6f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn all_kinds_unitary_up_to_64() {
        for n in [1, 2, 4, 8, 16, 32, 64] {
            for m in [ImplicitUnitary::dft(n).unwrap(), ImplicitUnitary::hadamard(n).unwrap()] {
                assert!(m.unitarity_deviation() < 1e-10, "{m:?}");
            }
        }
        for n in [3, 5, 12] {
            assert!(ImplicitUnitary::dft(n).unwrap().unitarity_deviation() < 1e-10);
        }
    }

    #[test]
    fn fast_matches_naive() {
        for n in [4, 8, 16, 64, 256] {
            for kind in [UnitaryKind::Dft, UnitaryKind::Hadamard] {
                let m = make_unitary(kind, n).unwrap();
                for t in 0..100 {
                    let x = random_vector(n, (n * 1000 + t) as u64);
                    let fast = m.apply(&x).unwrap();
                    let slow = m.apply_naive(&x).unwrap();
                    let rel = fast.distance(&slow).unwrap() / slow.norm2();
                    assert!(rel <= 1e-10, "{kind} n={n} rel={rel:e}");
                }
            }
        }
    }

    #[test]
    fn adjoint_inverts_apply() {
        for kind in [UnitaryKind::Dft, UnitaryKind::Hadamard] {
            let m = make_unitary(kind, 32).unwrap();
            let x = random_vector(32, 5);
            let back = m.apply_adjoint(&m.apply(&x).unwrap()).unwrap();
            assert!(back.distance(&x).unwrap() < 1e-12);
        }
        let m = ImplicitUnitary::dft(6).unwrap();
        let x = random_vector(6, 9);
        let back = m.apply_adjoint(&m.apply(&x).unwrap()).unwrap();
        assert!(back.distance(&x).unwrap() < 1e-12);
    }

    #[test]
    fn dense_validation() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let ok = vec![
            Complex64::new(h, 0.0),
            Complex64::new(0.0, h),
            Complex64::new(0.0, h),
            Complex64::new(h, 0.0),
        ];
        let m = ImplicitUnitary::from_dense(2, ok).unwrap();
        assert_eq!(m.kind(), UnitaryKind::Dense);
        assert!((m.flatness() - h).abs() < 1e-15);

        let bad = vec![Complex64::new(1.0, 0.0); 4];
        assert!(matches!(
            ImplicitUnitary::from_dense(2, bad),
            Err(Error::NotUnitary { .. })
        ));
        assert!(matches!(
            ImplicitUnitary::from_dense(2, vec![Complex64::new(1.0, 0.0); 3]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn apply_rejects_wrong_dimension() {
        let m = ImplicitUnitary::dft(8).unwrap();
        assert!(matches!(
            m.apply(&ComplexVector::zeros(4)),
            Err(Error::DimensionMismatch { expected: 8, actual: 4 })
        ));
    }
}
