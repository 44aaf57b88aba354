//! Cyclic Jacobi eigen-decomposition for small Hermitian matrices.

use num_complex::Complex64;

const MAX_SWEEPS: usize = 64;

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column-major: eigenvector `i` occupies `vectors[i*n..(i+1)*n]`.
    vectors: Vec<Complex64>,
    n: usize,
}

impl HermitianEigen {
    pub fn vector(&self, i: usize) -> &[Complex64] {
        &self.vectors[i * self.n..(i + 1) * self.n]
    }

    /// Index of the eigenvalue with the largest magnitude (first on ties).
    pub fn extreme_index(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if v.abs() > self.values[best].abs() {
                best = i;
            }
        }
        best
    }

    pub fn spectral_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Decomposes the Hermitian row-major `n x n` matrix `a`.
///
/// Only the upper triangle's Hermitian symmetry is assumed; the diagonal's
/// imaginary parts are ignored.
pub fn hermitian_eigen(n: usize, a: &[Complex64]) -> HermitianEigen {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
        m[i * n + i].im = 0.0;
    }
    if n == 1 {
        return HermitianEigen {
            values: vec![m[0].re],
            vectors: v,
            n,
        };
    }

    let scale: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| m[p * n + q].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-16 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, n, p, q);
            }
        }
    }

    // v stores eigenvectors as columns of a row-major matrix; sort and
    // transpose to column-major storage.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].re.total_cmp(&m[j * n + j].re));
    let values = order.iter().map(|&i| m[i * n + i].re).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for &c in &order {
        for r in 0..n {
            vectors.push(v[r * n + c]);
        }
    }
    HermitianEigen { values, vectors, n }
}

/// One Jacobi step annihilating `m[p][q]`: `m <- W* m W`, `v <- v W`, with
/// `W = diag(1, e^{-iφ}) · R(θ)` on the `(p, q)` plane.
fn rotate(m: &mut [Complex64], v: &mut [Complex64], n: usize, p: usize, q: usize) {
    let apq = m[p * n + q];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r; // e^{iφ}
    let app = m[p * n + p].re;
    let aqq = m[q * n + q].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let w_pp = Complex64::new(c, 0.0);
    let w_pq = Complex64::new(s, 0.0);
    let w_qp = -phase.conj() * s;
    let w_qq = phase.conj() * c;

    // columns: m <- m W
    for k in 0..n {
        let (mkp, mkq) = (m[k * n + p], m[k * n + q]);
        m[k * n + p] = mkp * w_pp + mkq * w_qp;
        m[k * n + q] = mkp * w_pq + mkq * w_qq;
        let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
        v[k * n + p] = vkp * w_pp + vkq * w_qp;
        v[k * n + q] = vkp * w_pq + vkq * w_qq;
    }
    // rows: m <- W* m
    for k in 0..n {
        let (mpk, mqk) = (m[p * n + k], m[q * n + k]);
        m[p * n + k] = w_pp.conj() * mpk + w_qp.conj() * mqk;
        m[q * n + k] = w_pq.conj() * mpk + w_qq.conj() * mqk;
    }
    m[p * n + q] = Complex64::new(0.0, 0.0);
    m[q * n + p] = Complex64::new(0.0, 0.0);
    m[p * n + p].im = 0.0;
    m[q * n + q].im = 0.0;
}
