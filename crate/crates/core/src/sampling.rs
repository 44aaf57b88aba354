//! Random row multisets and the scaled partial operator they define.

use num_complex::Complex64;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_dim, ComplexVector, ImplicitUnitary};
use crate::rng::{self, Rng};

/// A multiset `Q` of `q` row indices in `[0, N)`, drawn with replacement.
///
/// Index order is the draw order; duplicates are kept and count with
/// multiplicity everywhere.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RowSampleRepr", into = "RowSampleRepr")]
pub struct RowSample {
    n: usize,
    indices: Vec<usize>,
    seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct RowSampleRepr {
    #[serde(rename = "N")]
    n: usize,
    q: usize,
    indices: Vec<usize>,
    seed: Option<u64>,
}

impl TryFrom<RowSampleRepr> for RowSample {
    type Error = Error;

    fn try_from(r: RowSampleRepr) -> Result<Self> {
        check_dim(r.q, r.indices.len())?;
        let mut s = RowSample::from_indices(r.n, r.indices)?;
        s.seed = r.seed;
        Ok(s)
    }
}

impl From<RowSample> for RowSampleRepr {
    fn from(s: RowSample) -> Self {
        RowSampleRepr {
            n: s.n,
            q: s.indices.len(),
            indices: s.indices,
            seed: s.seed,
        }
    }
}

/// `q` iid uniform draws from `[0, N)`, reproducible from `seed`.
pub fn sample_rows(n: usize, q: usize, seed: u64) -> Result<RowSample> {
    let mut s = sample_rows_with(&mut rng::from_seed(seed), n, q)?;
    s.seed = Some(seed);
    Ok(s)
}

/// As [`sample_rows`], drawing from an existing stream.
pub fn sample_rows_with(rng: &mut Rng, n: usize, q: usize) -> Result<RowSample> {
    if n == 0 || q == 0 {
        return Err(Error::InvalidParameter(format!(
            "row sample needs N >= 1 and q >= 1 (N={n}, q={q})"
        )));
    }
    let indices = (0..q).map(|_| rng.random_range(0..n)).collect();
    Ok(RowSample {
        n,
        indices,
        seed: None,
    })
}

impl RowSample {
    pub fn from_indices(n: usize, indices: Vec<usize>) -> Result<Self> {
        if n == 0 || indices.is_empty() {
            return Err(Error::InvalidParameter(
                "row sample needs N >= 1 and q >= 1".into(),
            ));
        }
        if let Some(&bad) = indices.iter().find(|&&j| j >= n) {
            return Err(Error::InvalidParameter(format!(
                "row index {bad} out of range for N={n}"
            )));
        }
        Ok(Self {
            n,
            indices,
            seed: None,
        })
    }

    /// Every row exactly once (`q = N`, unit scale).
    pub fn full(n: usize) -> Self {
        assert!(n >= 1);
        Self {
            n,
            indices: (0..n).collect(),
            seed: None,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// `√(N/q)`.
    pub fn scale(&self) -> f64 {
        (self.n as f64 / self.q() as f64).sqrt()
    }

    /// The first `q` draws, i.e. the sample a shorter run of the same stream
    /// would have produced.
    pub fn prefix(&self, q: usize) -> Result<Self> {
        if q == 0 || q > self.q() {
            return Err(Error::InvalidParameter(format!(
                "prefix length {q} outside 1..={}",
                self.q()
            )));
        }
        Ok(Self {
            n: self.n,
            indices: self.indices[..q].to_vec(),
            seed: self.seed,
        })
    }

    /// Multiplicity of every row.
    pub fn histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.n];
        for &j in &self.indices {
            h[j] += 1;
        }
        h
    }
}

/// `A = √(N/q) · M_Q`, the rows of `M` listed by `Q`.
#[derive(Clone, Debug)]
pub struct PartialOperator<'a> {
    base: &'a ImplicitUnitary,
    sample: RowSample,
}

impl<'a> PartialOperator<'a> {
    pub fn new(base: &'a ImplicitUnitary, sample: RowSample) -> Result<Self> {
        check_dim(base.dim(), sample.n())?;
        Ok(Self { base, sample })
    }

    pub fn base(&self) -> &'a ImplicitUnitary {
        self.base
    }

    pub fn sample(&self) -> &RowSample {
        &self.sample
    }

    /// Number of columns `N`.
    pub fn cols(&self) -> usize {
        self.sample.n()
    }

    /// Number of rows `q`.
    pub fn rows(&self) -> usize {
        self.sample.q()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.base.entry(self.sample.indices[row], col) * self.sample.scale()
    }

    /// Column `col` of `A` (length `q`).
    pub fn column(&self, col: usize) -> Vec<Complex64> {
        let s = self.sample.scale();
        self.sample
            .indices
            .iter()
            .map(|&j| self.base.entry(j, col) * s)
            .collect()
    }

    /// Row-major `q x N` copy of `A`.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let n = self.cols();
        let mut out = Vec::with_capacity(self.rows() * n);
        for r in 0..self.rows() {
            out.extend((0..n).map(|l| self.entry(r, l)));
        }
        out
    }

    /// `Ax`: one full apply of `M`, then a gather over `Q`.
    pub fn apply(&self, x: &ComplexVector) -> Result<ComplexVector> {
        let mx = self.base.apply(x)?;
        let s = self.sample.scale();
        Ok(ComplexVector::from_vec_unchecked(
            self.sample.indices.iter().map(|&j| mx[j] * s).collect(),
        ))
    }

    /// `A* y`: scatter-add over `Q`, then one adjoint apply of `M`.
    pub fn apply_adjoint(&self, y: &ComplexVector) -> Result<ComplexVector> {
        check_dim(self.rows(), y.len())?;
        let s = self.sample.scale();
        let mut buf = vec![Complex64::new(0.0, 0.0); self.cols()];
        for (&j, &v) in self.sample.indices.iter().zip(y.iter()) {
            buf[j] += v * s;
        }
        self.base.apply_in_place(&mut buf, true);
        Ok(ComplexVector::from_vec_unchecked(buf))
    }
}

/// `Ax` for the partial operator `A`.
pub fn apply_partial(a: &PartialOperator<'_>, x: &ComplexVector) -> Result<ComplexVector> {
    a.apply(x)
}

/// `E_{j∈Q} |(Mx)_j|²`, duplicates counted.
pub fn sampled_mean(a: &PartialOperator<'_>, x: &ComplexVector) -> Result<f64> {
    let mx = a.base.apply(x)?;
    Ok(mean_sqr_over(&mx, a.sample.indices()))
}

/// `E_{j∈[N]} |(Mx)_j|²`.
pub fn full_mean(m: &ImplicitUnitary, x: &ComplexVector) -> Result<f64> {
    let mx = m.apply(x)?;
    Ok(mx.norm2_sqr() / mx.len() as f64)
}

pub(crate) fn mean_sqr_over(v: &ComplexVector, indices: &[usize]) -> f64 {
    indices.iter().map(|&j| v[j].norm_sqr()).sum::<f64>() / indices.len() as f64
}
