use num_complex::Complex64;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{approx_within, ApproxSpec};
use crate::rng::{self, Rng};

/// Law of the iid variables whose sample mean is probed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    Constant { value: f64 },
    /// `scale` with probability `p`, else 0.
    Bernoulli { p: f64, scale: f64 },
    Uniform { low: f64, high: f64 },
    /// `±scale` with equal probability.
    Rademacher { scale: f64 },
    /// `radius·e^{iθ}` with `θ` uniform.
    UniformPhase { radius: f64 },
    /// Accepted by the parser, rejected by [`tail_probe`].
    Gaussian { mean: f64, std: f64 },
    /// Accepted by the parser, rejected by [`tail_probe`].
    Exponential { rate: f64 },
}

impl Distribution {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            Distribution::Constant { value } if !value.is_finite() => bad(format!("constant {value}")),
            Distribution::Bernoulli { p, scale } if !(0.0..=1.0).contains(&p) || !(scale.is_finite() && scale > 0.0) => {
                bad(format!("bernoulli p={p}, scale={scale}"))
            }
            Distribution::Uniform { low, high } if !(low.is_finite() && high.is_finite() && low < high) => {
                bad(format!("uniform [{low}, {high}]"))
            }
            Distribution::Rademacher { scale } if !(scale.is_finite() && scale > 0.0) => {
                bad(format!("rademacher scale={scale}"))
            }
            Distribution::UniformPhase { radius } if !(radius.is_finite() && radius > 0.0) => {
                bad(format!("uniform phase radius={radius}"))
            }
            Distribution::Gaussian { .. } | Distribution::Exponential { .. } => {
                Err(Error::UnsupportedDistribution(format!("{self:?} is unbounded")))
            }
            _ => Ok(()),
        }
    }

    /// `sup |X|`.
    pub fn bound(&self) -> Option<f64> {
        match *self {
            Distribution::Constant { value } => Some(value.abs()),
            Distribution::Bernoulli { scale, .. } | Distribution::Rademacher { scale } => Some(scale),
            Distribution::Uniform { low, high } => Some(low.abs().max(high.abs())),
            Distribution::UniformPhase { radius } => Some(radius),
            Distribution::Gaussian { .. } | Distribution::Exponential { .. } => None,
        }
    }

    pub fn is_real(&self) -> bool {
        !matches!(self, Distribution::UniformPhase { .. })
    }

    pub fn is_nonnegative(&self) -> bool {
        match *self {
            Distribution::Constant { value } => value >= 0.0,
            Distribution::Bernoulli { .. } | Distribution::Exponential { .. } => true,
            Distribution::Uniform { low, .. } => low >= 0.0,
            _ => false,
        }
    }

    pub fn mean(&self) -> Complex64 {
        let re = match *self {
            Distribution::Constant { value } => value,
            Distribution::Bernoulli { p, scale } => p * scale,
            Distribution::Uniform { low, high } => (low + high) / 2.0,
            Distribution::Rademacher { .. } | Distribution::UniformPhase { .. } => 0.0,
            Distribution::Gaussian { mean, .. } => mean,
            Distribution::Exponential { rate } => 1.0 / rate,
        };
        Complex64::new(re, 0.0)
    }

    /// `E|X|`; `None` for unbounded laws.
    pub fn mean_abs(&self) -> Option<f64> {
        Some(match *self {
            Distribution::Constant { value } => value.abs(),
            Distribution::Bernoulli { p, scale } => p * scale,
            Distribution::Uniform { low, high } => {
                if low >= 0.0 || high <= 0.0 {
                    ((low + high) / 2.0).abs()
                } else {
                    (low * low + high * high) / (2.0 * (high - low))
                }
            }
            Distribution::Rademacher { scale } => scale,
            Distribution::UniformPhase { radius } => radius,
            Distribution::Gaussian { .. } | Distribution::Exponential { .. } => return None,
        })
    }

    fn sample(&self, rng: &mut Rng) -> Complex64 {
        match *self {
            Distribution::Constant { value } => Complex64::new(value, 0.0),
            Distribution::Bernoulli { p, scale } => Complex64::new(if rng.random::<f64>() < p { scale } else { 0.0 }, 0.0),
            Distribution::Uniform { low, high } => Complex64::new(rng.random_range(low..high), 0.0),
            Distribution::Rademacher { scale } => Complex64::new(if rng.random::<bool>() { scale } else { -scale }, 0.0),
            Distribution::UniformPhase { radius } => {
                Complex64::from_polar(radius, rng.random_range(0.0..std::f64::consts::TAU))
            }
            Distribution::Gaussian { .. } | Distribution::Exponential { .. } => {
                unreachable!("rejected by validate")
            }
        }
    }
}

/// The concentration event checked for the sample mean `X̄`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "statement", rename_all = "snake_case")]
pub enum TailStatement {
    /// `X̄ ≈_{ε,0} μ`; variables in `[0,a]`.
    Multiplicative { eps: f64 },
    /// `X̄ ≈_{ε,α} μ`; variables in `[0,a]`.
    Combined { eps: f64, alpha: f64 },
    /// `X̄ ≈_{0, ε'·E|X| + α} μ`; variables in `[-a,a]`.
    SignedCombined { eps: f64, alpha: f64 },
    /// `X̄ ≈_{0,b} μ`; variables in `[-a,a]`.
    Additive { b: f64 },
    /// `|X̄| ≈_{0,b} |μ|`; `|X| <= a`.
    ComplexModulus { b: f64 },
}

impl TailStatement {
    fn validate(&self, dist: &Distribution) -> Result<()> {
        let eps_ok = |e: f64| e > 0.0 && e <= 0.5;
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let ok = match *self {
            TailStatement::Multiplicative { eps } => eps_ok(eps),
            TailStatement::Combined { eps, alpha } | TailStatement::SignedCombined { eps, alpha } => {
                eps_ok(eps) && pos(alpha)
            }
            TailStatement::Additive { b } | TailStatement::ComplexModulus { b } => pos(b),
        };
        if !ok {
            return Err(Error::InvalidParameter(format!("invalid parameters in {self:?}")));
        }
        let domain_ok = match self {
            TailStatement::Multiplicative { .. } | TailStatement::Combined { .. } => dist.is_nonnegative(),
            TailStatement::SignedCombined { .. } | TailStatement::Additive { .. } => dist.is_real(),
            TailStatement::ComplexModulus { .. } => true,
        };
        if !domain_ok {
            return Err(Error::InvalidParameter(format!("{dist:?} does not fit {self:?}")));
        }
        Ok(())
    }

    fn holds(&self, mean: Complex64, dist: &Distribution) -> bool {
        let mu = dist.mean();
        match *self {
            TailStatement::Multiplicative { eps } => approx_within(mean.re, mu.re, ApproxSpec::relative(eps)),
            TailStatement::Combined { eps, alpha } => approx_within(mean.re, mu.re, ApproxSpec { eps, alpha }),
            TailStatement::SignedCombined { eps, alpha } => {
                approx_within(mean.re, mu.re, ApproxSpec::additive(eps * dist.mean_abs().unwrap_or(f64::INFINITY) + alpha))
            }
            TailStatement::Additive { b } => approx_within(mean.re, mu.re, ApproxSpec::additive(b)),
            TailStatement::ComplexModulus { b } => approx_within(mean.norm(), mu.norm(), ApproxSpec::additive(b)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailProbe {
    pub distribution: Distribution,
    pub statement: TailStatement,
    pub n_vars: usize,
    pub trials: usize,
    pub failures: usize,
    pub failure_rate: f64,
    pub seed: u64,
}

/// Fraction of `trials` sample means of `n_vars` iid draws that violate
/// `statement`. Trial `k` draws from stream `(seed, k)`.
pub fn tail_probe(
    distribution: Distribution,
    statement: TailStatement,
    n_vars: usize,
    trials: usize,
    seed: u64,
) -> Result<TailProbe> {
    distribution.validate()?;
    statement.validate(&distribution)?;
    if n_vars == 0 || trials == 0 {
        return Err(Error::InvalidParameter("n_vars and trials must be positive".into()));
    }
    let failures = (0..trials as u64)
        .into_par_iter()
        .filter(|&k| {
            let mut r = rng::stream(seed, k);
            let sum: Complex64 = (0..n_vars).map(|_| distribution.sample(&mut r)).sum();
            !statement.holds(sum / n_vars as f64, &distribution)
        })
        .count();
    Ok(TailProbe {
        distribution,
        statement,
        n_vars,
        trials,
        failures,
        failure_rate: failures as f64 / trials as f64,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_never_fails() {
        let d = Distribution::Constant { value: 0.7 };
        let p = tail_probe(d, TailStatement::Multiplicative { eps: 0.01 }, 50, 200, 1).unwrap();
        assert_eq!(p.failures, 0);
    }

    #[test]
    fn unbounded_laws_are_rejected() {
        for d in [
            Distribution::Gaussian { mean: 0.0, std: 1.0 },
            Distribution::Exponential { rate: 1.0 },
        ] {
            assert!(matches!(
                tail_probe(d, TailStatement::Additive { b: 0.1 }, 10, 10, 0),
                Err(Error::UnsupportedDistribution(_))
            ));
        }
    }

    #[test]
    fn domain_mismatch_is_rejected() {
        let signed = Distribution::Rademacher { scale: 1.0 };
        assert!(tail_probe(signed, TailStatement::Multiplicative { eps: 0.1 }, 10, 10, 0).is_err());
        let complex = Distribution::UniformPhase { radius: 1.0 };
        assert!(tail_probe(complex, TailStatement::Additive { b: 0.1 }, 10, 10, 0).is_err());
        assert!(tail_probe(signed, TailStatement::Multiplicative { eps: 0.7 }, 10, 10, 0).is_err());
    }

    #[test]
    fn bernoulli_half_decays() {
        let d = Distribution::Bernoulli { p: 0.5, scale: 1.0 };
        let s = TailStatement::Multiplicative { eps: 0.1 };
        let small = tail_probe(d, s, 1000, 10_000, 5).unwrap();
        let large = tail_probe(d, s, 4000, 10_000, 5).unwrap();
        assert!(large.failure_rate < small.failure_rate);
    }

    #[test]
    fn uniform_phase_mean_concentrates_at_zero() {
        let d = Distribution::UniformPhase { radius: 1.0 };
        let s = TailStatement::ComplexModulus { b: 0.2 };
        let rates: Vec<f64> = [10, 50, 400]
            .iter()
            .map(|&n| 1.0 - tail_probe(d, s, n, 2000, 7).unwrap().failure_rate)
            .collect();
        assert!(rates[0] < rates[1] && rates[1] <= rates[2]);
        assert!(rates[2] > 0.999);
    }

    #[test]
    fn mean_abs_matches_monte_carlo() {
        let d = Distribution::Uniform { low: -1.0, high: 3.0 };
        // (1 + 9) / 8
        assert!((d.mean_abs().unwrap() - 1.25).abs() < 1e-15);
        let mut r = rng::from_seed(2);
        let n = 200_000;
        let mc = (0..n).map(|_| d.sample(&mut r).re.abs()).sum::<f64>() / n as f64;
        assert!((mc - 1.25).abs() < 0.01);
        assert_eq!(Distribution::Exponential { rate: 1.0 }.mean_abs(), None);
    }

    #[test]
    fn deterministic_for_seed() {
        let d = Distribution::Rademacher { scale: 1.0 };
        let s = TailStatement::Additive { b: 0.05 };
        assert_eq!(tail_probe(d, s, 500, 300, 9).unwrap(), tail_probe(d, s, 500, 300, 9).unwrap());
    }

    #[test]
    fn json_tags() {
        let s = serde_json::to_string(&Distribution::UniformPhase { radius: 1.0 }).unwrap();
        assert_eq!(s, r#"{"kind":"uniform_phase","radius":1.0}"#);
        let t: TailStatement = serde_json::from_str(r#"{"statement":"combined","eps":0.1,"alpha":0.01}"#).unwrap();
        assert_eq!(t, TailStatement::Combined { eps: 0.1, alpha: 0.01 });
    }
}
