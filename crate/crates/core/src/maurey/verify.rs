use serde::{Deserialize, Serialize};

use super::{NetFamily, NetParams, NetVariant};
use crate::error::{Error, Result};
use crate::linalg::{approx_within, check_dim, ApproxSpec, ComplexVector, ImplicitUnitary};
use crate::sampling::RowSample;

/// Which average a check is taken over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// Uniform over `[N]`.
    Full,
    /// Over the multiset `Q`, duplicates counted.
    Sampled,
}

/// Slack multipliers turning the `O(ε)`, `O(η)` of the decomposition
/// statements into concrete tolerances.
///
/// Two-sided items use `x ≈_{eps_mult·ε, eta_mult·η + bad_mult·L·γ} y` where
/// `L` is the number of levels the variant draws (`t` or `t + r`). The
/// one-sided level-mass item allows `level_mass_mult·η`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifySlack {
    pub eps_mult: f64,
    pub eta_mult: f64,
    pub bad_mult: f64,
    pub level_mass_mult: f64,
}

impl VerifySlack {
    pub fn for_variant(variant: NetVariant) -> Self {
        match variant {
            NetVariant::Simple => Self {
                eps_mult: 3.0,
                eta_mult: 9.0,
                bad_mult: 2.0,
                level_mass_mult: 1.0,
            },
            NetVariant::Improved => Self {
                eps_mult: 10.0,
                eta_mult: 9.0,
                bad_mult: 60.0,
                level_mass_mult: 1.0,
            },
        }
    }

    /// Concrete `(ε, α)` for the two-sided items.
    pub fn spec(&self, params: &NetParams) -> ApproxSpec {
        let levels = match params.variant {
            NetVariant::Simple => params.t,
            NetVariant::Improved => params.t + params.r,
        };
        ApproxSpec {
            eps: self.eps_mult * params.eps,
            alpha: self.eta_mult * params.eta + self.bad_mult * levels as f64 * params.gamma,
        }
    }
}

/// One comparison `lhs ≈ rhs` (or `lhs >= rhs - alpha` when `one_sided`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub name: String,
    pub domain: Domain,
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs|`.
    pub additive_gap: f64,
    /// `|lhs - rhs| / |rhs|`; `None` when `rhs = 0` and the gap is not.
    pub relative_gap: Option<f64>,
    pub eps: f64,
    pub alpha: f64,
    pub one_sided: bool,
    pub passed: bool,
}

impl LemmaCheck {
    pub fn two_sided(name: &str, domain: Domain, lhs: f64, rhs: f64, spec: ApproxSpec) -> Self {
        Self::build(name, domain, lhs, rhs, spec, false, approx_within(lhs, rhs, spec))
    }

    pub fn at_least(name: &str, domain: Domain, lhs: f64, rhs: f64, alpha: f64) -> Self {
        let spec = ApproxSpec::additive(alpha);
        Self::build(name, domain, lhs, rhs, spec, true, lhs >= rhs - alpha)
    }

    fn build(
        name: &str,
        domain: Domain,
        lhs: f64,
        rhs: f64,
        spec: ApproxSpec,
        one_sided: bool,
        passed: bool,
    ) -> Self {
        let additive_gap = (lhs - rhs).abs();
        let relative_gap = if additive_gap == 0.0 {
            Some(0.0)
        } else if rhs == 0.0 {
            None
        } else {
            Some(additive_gap / rhs.abs())
        };
        Self {
            name: name.to_string(),
            domain,
            lhs,
            rhs,
            additive_gap,
            relative_gap,
            eps: spec.eps,
            alpha: spec.alpha,
            one_sided,
            passed,
        }
    }
}

/// Both sides of every decomposition item for one `(x, Q, family)`.
///
/// Averages of `|Mx|²` are reported in unit-flatness scale, i.e. divided by
/// `||M||_inf²`, so they are directly comparable to the family's output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub variant: NetVariant,
    pub flatness: f64,
    pub target_full: f64,
    pub target_sampled: f64,
    pub approx_full: f64,
    pub approx_sampled: f64,
    /// `Σ_i 2^{-i}·|C_i|/N`; absent for the simple family.
    pub level_mass: Option<f64>,
    /// Fraction of `[N]` where `|(Mx)_j|²` misses the pointwise band
    /// `≈_{eps_mult·ε, eta_mult·η}` around the family's value.
    pub bad_fraction_full: f64,
    /// Same fraction over `Q` with multiplicity.
    pub bad_fraction_sampled: f64,
    pub checks: Vec<LemmaCheck>,
    pub passed: bool,
}

fn mean_over(values: &[f64], indices: impl Iterator<Item = usize>, count: usize) -> f64 {
    indices.map(|j| values[j]).sum::<f64>() / count as f64
}

/// Unit-scale `|(Mx)_j|²` for every `j`.
fn unit_targets(m: &ImplicitUnitary, x: &ComplexVector) -> Result<Vec<f64>> {
    let mx = m.apply(x)?;
    let inv = 1.0 / (m.flatness() * m.flatness());
    Ok(mx.iter().map(|z| z.norm_sqr() * inv).collect())
}

/// Compares `E|(Mx)_j|²` with the family's approximation over `[N]` and `Q`
/// against the slack in `slack`. Never fails on a bad decomposition: the
/// outcome is in the report.
pub fn verify_decomposition(
    m: &ImplicitUnitary,
    x: &ComplexVector,
    q: &RowSample,
    family: &NetFamily,
    params: &NetParams,
    slack: &VerifySlack,
) -> Result<DecompositionReport> {
    check_dim(m.dim(), x.len())?;
    check_dim(m.dim(), family.dim())?;
    check_dim(m.dim(), q.n())?;
    let variant = match family {
        NetFamily::Simple(_) => NetVariant::Simple,
        NetFamily::Improved(_) => NetVariant::Improved,
    };
    if variant != params.variant {
        return Err(Error::InvalidParameter(format!(
            "family is {variant:?} but parameters are {:?}",
            params.variant
        )));
    }
    let n = m.dim();
    let target = unit_targets(m, x)?;
    let approx = family.approximation();
    let target_full = mean_over(&target, 0..n, n);
    let target_sampled = mean_over(&target, q.indices().iter().copied(), q.q());
    let approx_full = mean_over(&approx, 0..n, n);
    let approx_sampled = mean_over(&approx, q.indices().iter().copied(), q.q());

    let pointwise = ApproxSpec {
        eps: slack.eps_mult * params.eps,
        alpha: slack.eta_mult * params.eta,
    };
    let bad: Vec<bool> = target
        .iter()
        .zip(&approx)
        .map(|(&a, &h)| !approx_within(a, h, pointwise))
        .collect();
    let bad_fraction_full = bad.iter().filter(|&&b| b).count() as f64 / n as f64;
    let bad_fraction_sampled = q.indices().iter().filter(|&&j| bad[j]).count() as f64 / q.q() as f64;

    let spec = slack.spec(params);
    let mut checks = Vec::with_capacity(3);
    let mut level_mass = None;
    if let NetFamily::Improved(f) = family {
        let mass = f.level_mass();
        level_mass = Some(mass);
        checks.push(LemmaCheck::at_least(
            "level_mass",
            Domain::Full,
            target_full,
            mass,
            slack.level_mass_mult * params.eta,
        ));
    }
    checks.push(LemmaCheck::two_sided(
        "sampled_average",
        Domain::Sampled,
        target_sampled,
        approx_sampled,
        spec,
    ));
    checks.push(LemmaCheck::two_sided("full_average", Domain::Full, target_full, approx_full, spec));
    let passed = checks.iter().all(|c| c.passed);
    Ok(DecompositionReport {
        variant,
        flatness: m.flatness(),
        target_full,
        target_sampled,
        approx_full,
        approx_sampled,
        level_mass,
        bad_fraction_full,
        bad_fraction_sampled,
        checks,
        passed,
    })
}

/// The end-to-end comparison `E_Q|(Mx)_j|² ≈_{ε, η·||x||_1²·||M||_inf²}
/// E_[N]|(Mx)_j|²`, reported in native scale.
pub fn sampled_vs_full(
    m: &ImplicitUnitary,
    x: &ComplexVector,
    q: &RowSample,
    eps: f64,
    eta: f64,
) -> Result<LemmaCheck> {
    check_dim(m.dim(), x.len())?;
    check_dim(m.dim(), q.n())?;
    let mx = m.apply(x)?;
    let sq: Vec<f64> = mx.iter().map(|z| z.norm_sqr()).collect();
    let n = m.dim();
    let full = mean_over(&sq, 0..n, n);
    let sampled = mean_over(&sq, q.indices().iter().copied(), q.q());
    let l1 = x.norm1();
    let spec = ApproxSpec::new(eps, eta * l1 * l1 * m.flatness() * m.flatness())?;
    Ok(LemmaCheck::two_sided("sampled_vs_full", Domain::Sampled, sampled, full, spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maurey::{build_improved_family, build_simple_family, realize_levels};
    use crate::rng;
    use crate::sampling::sample_rows;
    use num_complex::Complex64;
    use rand::Rng as _;

    fn random_sparse(n: usize, k: usize, seed: u64) -> ComplexVector {
        let mut r = rng::from_seed(seed);
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for j in rand::seq::index::sample(&mut r, n, k) {
            v[j] = Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        }
        ComplexVector::new(v).unwrap().l1_normalized().unwrap()
    }

    fn family_for(
        m: &ImplicitUnitary,
        x: &ComplexVector,
        q: &RowSample,
        p: &NetParams,
        seed: u64,
    ) -> NetFamily {
        let levels = realize_levels(m, x, q, p, seed, 64).unwrap();
        match p.variant {
            NetVariant::Simple => NetFamily::Simple(build_simple_family(&levels.g, p).unwrap()),
            NetVariant::Improved => NetFamily::Improved(build_improved_family(&levels.g, p).unwrap()),
        }
    }

    #[test]
    fn basis_vector_energy_is_one_over_n() {
        let n = 64;
        let m = ImplicitUnitary::dft(n).unwrap();
        let x = ComplexVector::basis(n, 7);
        let mx = m.apply(&x).unwrap();
        let mean = mx.norm2_sqr() / n as f64;
        assert!((mean - 1.0 / n as f64).abs() < 1e-15);
        // unit scale: divide by ||M||_inf² = 1/N
        let p = NetParams::simple(0.25, 0.25).unwrap();
        let q = RowSample::full(n);
        let f = family_for(&m, &x, &q, &p, 1);
        let r = verify_decomposition(&m, &x, &q, &f, &p, &VerifySlack::for_variant(p.variant)).unwrap();
        assert!((r.target_full - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_sample_items_coincide() {
        let n = 64;
        let m = ImplicitUnitary::hadamard(n).unwrap();
        let q = RowSample::full(n);
        for variant in [NetVariant::Simple, NetVariant::Improved] {
            let p = NetParams::new(variant, 0.25, 0.25).unwrap();
            let x = random_sparse(n, 3, 5);
            let f = family_for(&m, &x, &q, &p, 9);
            let r = verify_decomposition(&m, &x, &q, &f, &p, &VerifySlack::for_variant(variant)).unwrap();
            assert_eq!(r.target_full, r.target_sampled);
            assert_eq!(r.approx_full, r.approx_sampled);
            assert_eq!(r.bad_fraction_full, r.bad_fraction_sampled);
            let end = sampled_vs_full(&m, &x, &q, 0.0, 0.0).unwrap();
            assert!(end.passed);
            assert_eq!(end.additive_gap, 0.0);
        }
    }

    #[test]
    fn slack_defaults() {
        let p = NetParams::simple(0.125, 0.125).unwrap();
        let s = VerifySlack::for_variant(NetVariant::Simple).spec(&p);
        assert!((s.eps - 0.375).abs() < 1e-15);
        // 9η + 2tγ = 9η + η
        assert!((s.alpha - 10.0 * 0.125).abs() < 1e-12);
        let p = NetParams::improved(0.125, 0.125).unwrap();
        let s = VerifySlack::for_variant(NetVariant::Improved).spec(&p);
        assert!((s.eps - 1.25).abs() < 1e-15);
        assert!((s.alpha - 10.0 * 0.125).abs() < 1e-12);
    }

    #[test]
    fn variant_mismatch_is_rejected() {
        let n = 16;
        let m = ImplicitUnitary::dft(n).unwrap();
        let x = ComplexVector::basis(n, 0);
        let q = RowSample::full(n);
        let p = NetParams::simple(0.25, 0.25).unwrap();
        let f = family_for(&m, &x, &q, &p, 1);
        let wrong = NetParams::improved(0.25, 0.25).unwrap();
        assert!(verify_decomposition(&m, &x, &q, &f, &wrong, &VerifySlack::for_variant(wrong.variant)).is_err());
    }

    #[test]
    fn dft256_sparse_inputs_pass_at_default_slack() {
        let n = 256;
        let m = ImplicitUnitary::dft(n).unwrap();
        for variant in [NetVariant::Simple, NetVariant::Improved] {
            let p = NetParams::new(variant, 0.125, 0.125).unwrap();
            let slack = VerifySlack::for_variant(variant);
            let mut passes = 0;
            for trial in 0..100u64 {
                let x = random_sparse(n, 4, 1000 + trial);
                let q = sample_rows(n, 64, 2000 + trial).unwrap();
                let f = family_for(&m, &x, &q, &p, 3000 + trial);
                let r = verify_decomposition(&m, &x, &q, &f, &p, &slack).unwrap();
                passes += r.passed as u32;
            }
            assert!(passes >= 90, "{variant:?}: {passes}/100");
        }
    }

    #[test]
    fn report_json_roundtrip() {
        let n = 16;
        let m = ImplicitUnitary::dft(n).unwrap();
        let x = random_sparse(n, 2, 4);
        let q = sample_rows(n, 8, 4).unwrap();
        let p = NetParams::improved(0.25, 0.25).unwrap();
        let f = family_for(&m, &x, &q, &p, 4);
        let r = verify_decomposition(&m, &x, &q, &f, &p, &VerifySlack::for_variant(p.variant)).unwrap();
        assert!(r.level_mass.is_some());
        assert_eq!(r.checks.len(), 3);
        let back: DecompositionReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
