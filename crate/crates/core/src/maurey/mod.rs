//! Maurey-sampling vector families covering `|Mx|²` scale by scale.
//!
//! A vector `x` with `||x||_1 = 1` turns into a probability distribution over
//! signed columns of `M` ([`phase_decompose`]); averaging few samples from it
//! gives vectors `g^(i)` that track `|Mx|` up to `2^{-i/2}` on all but a
//! `γ` fraction of coordinates ([`find_good_g`]). Level sets and clipped or
//! telescoped squares of these vectors ([`build_simple_family`],
//! [`build_improved_family`]) approximate `|Mx|²`, and
//! [`verify_decomposition`] measures how well.
//!
//! All thresholds assume `||M||_inf = 1`. Builders take g-levels in that
//! unit-flatness scale (see [`RealizedLevels`]); verification rescales
//! `|Mx|²` by `||M||_inf^{-2}` itself.

mod family;
mod levels;
mod phase;
mod tail;
mod verify;

pub use family::{build_improved_family, build_simple_family, ImprovedFamily, NetFamily, SimpleFamily};
pub use levels::{find_good_g, realize_levels, sample_g, GoodSample, LevelCheck, RealizedLevels};
pub use phase::{phase_decompose, unit_phase, PhaseDistribution};
pub use tail::{tail_probe, Distribution, TailProbe, TailStatement};
pub use verify::{sampled_vs_full, verify_decomposition, DecompositionReport, Domain, LemmaCheck, VerifySlack};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default multiplier in `|F| = ⌈c_F · 2^i · log₂(1/γ)⌉`.
pub const DEFAULT_SAMPLE_CONSTANT: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetVariant {
    /// Clipped level sets `B_i` and vectors `h^(i)`.
    Simple,
    /// Level sets `C_i` with telescoped differences `Δ^(i,m)`.
    Improved,
}

/// Scale parameters of a net family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetParams {
    pub variant: NetVariant,
    pub eps: f64,
    pub eta: f64,
    /// `⌈log₂(1/η)⌉`
    pub t: u32,
    /// `⌈log₂(1/ε²)⌉`
    pub r: u32,
    /// Tolerated fraction of badly approximated coordinates per level.
    pub gamma: f64,
    /// Sample-size multiplier `c_F`.
    pub c_f: f64,
}

impl NetParams {
    pub fn new(variant: NetVariant, eps: f64, eta: f64) -> Result<Self> {
        for (name, v) in [("eps", eps), ("eta", eta)] {
            if !(v > 0.0 && v <= 0.5) {
                return Err(Error::InvalidParameter(format!("{name}={v} must lie in (0, 1/2]")));
            }
        }
        if variant == NetVariant::Improved && eps < eta {
            return Err(Error::InvalidParameter(format!(
                "improved variant requires eps >= eta (eps={eps}, eta={eta})"
            )));
        }
        let t = ceil_log2(1.0 / eta);
        let r = ceil_log2(1.0 / (eps * eps));
        let gamma = match variant {
            NetVariant::Simple => eta / (2.0 * t as f64),
            NetVariant::Improved => eta / (60.0 * (t + r) as f64),
        };
        Ok(Self {
            variant,
            eps,
            eta,
            t,
            r,
            gamma,
            c_f: DEFAULT_SAMPLE_CONSTANT,
        })
    }

    pub fn simple(eps: f64, eta: f64) -> Result<Self> {
        Self::new(NetVariant::Simple, eps, eta)
    }

    pub fn improved(eps: f64, eta: f64) -> Result<Self> {
        Self::new(NetVariant::Improved, eps, eta)
    }

    pub fn with_sample_constant(mut self, c_f: f64) -> Result<Self> {
        if !(c_f.is_finite() && c_f > 0.0) {
            return Err(Error::InvalidParameter(format!("c_F={c_f} must be positive")));
        }
        self.c_f = c_f;
        Ok(self)
    }

    /// Highest level `t + r`.
    pub fn max_level(&self) -> u32 {
        self.t + self.r
    }

    /// Levels whose g-vectors the variant consumes: `1+r..=t+r` for the
    /// simple family, `1..=t+r` for the improved one.
    pub fn required_levels(&self) -> std::ops::RangeInclusive<u32> {
        match self.variant {
            NetVariant::Simple => (self.r + 1)..=self.max_level(),
            NetVariant::Improved => 1..=self.max_level(),
        }
    }

    /// `|F|` at `level`.
    pub fn sample_size(&self, level: u32) -> usize {
        (self.c_f * 2f64.powi(level as i32) * (1.0 / self.gamma).log2()).ceil() as usize
    }

    /// Additive band `2^{-level/2}` (unit-flatness scale).
    pub fn band(level: u32) -> f64 {
        2f64.powf(-(level as f64) / 2.0)
    }

    pub(crate) fn check_level(&self, level: u32) -> Result<()> {
        if level == 0 || level > self.max_level() {
            return Err(Error::InvalidParameter(format!(
                "level {level} outside 1..={}",
                self.max_level()
            )));
        }
        Ok(())
    }
}

/// `⌈log₂ x⌉`, treating values within rounding of a power of two as exact.
fn ceil_log2(x: f64) -> u32 {
    (x.log2() - 1e-12).ceil().max(1.0) as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eighth_eighth_parameters() {
        let s = NetParams::simple(0.125, 0.125).unwrap();
        assert_eq!((s.t, s.r), (3, 6));
        assert!((s.gamma - 1.0 / 48.0).abs() < 1e-15);
        assert_eq!(s.required_levels(), 7..=9);
        let i = NetParams::improved(0.125, 0.125).unwrap();
        assert!((i.gamma - 1.0 / 4320.0).abs() < 1e-15);
        assert_eq!(i.required_levels(), 1..=9);
    }

    #[test]
    fn sample_size_formula() {
        let s = NetParams::simple(0.125, 0.125).unwrap();
        // 8 · 2 · log2(48)
        assert_eq!(s.sample_size(1), (16.0 * 48f64.log2()).ceil() as usize);
        assert!(s.sample_size(2) >= 2 * s.sample_size(1) - 1);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(NetParams::simple(0.0, 0.1).is_err());
        assert!(NetParams::simple(0.6, 0.1).is_err());
        assert!(NetParams::improved(0.1, 0.2).is_err());
        assert!(NetParams::simple(0.1, 0.2).is_ok());
        assert!(NetParams::simple(0.1, 0.1).unwrap().with_sample_constant(0.0).is_err());
    }

    #[test]
    fn non_dyadic_parameters_round_up() {
        let p = NetParams::simple(0.3, 0.3).unwrap();
        assert_eq!(p.t, 2); // log2(3.33) = 1.74
        assert_eq!(p.r, 4); // log2(11.1) = 3.47
    }
}
