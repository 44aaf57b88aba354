//! Complex vectors, implicit unitary operators and the asymmetric
//! approximation relation used throughout the net machinery.

mod dense_io;
mod eigen;
mod unitary;
mod vector;

pub use dense_io::{load_dense_unitary, parse_complex, read_dense_unitary, write_dense_unitary};
pub use eigen::{hermitian_eigen, HermitianEigen};
pub use unitary::{make_unitary, ImplicitUnitary, UnitaryKind, DENSE_UNITARY_TOLERANCE};
pub use vector::ComplexVector;
pub(crate) use vector::check_dim;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack `eps` and additive slack `alpha` of `x ≈_{eps,alpha} y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxSpec {
    pub eps: f64,
    pub alpha: f64,
}

impl ApproxSpec {
    pub fn new(eps: f64, alpha: f64) -> Result<Self> {
        if !(eps.is_finite() && alpha.is_finite() && eps >= 0.0 && alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "approximation slack must be finite and nonnegative (eps={eps}, alpha={alpha})"
            )));
        }
        Ok(Self { eps, alpha })
    }

    pub const fn additive(alpha: f64) -> Self {
        Self { eps: 0.0, alpha }
    }

    pub const fn relative(eps: f64) -> Self {
        Self { eps, alpha: 0.0 }
    }
}

/// `x ≈_{eps,alpha} y`, i.e. `(1-eps)·y - alpha <= x <= (1+eps)·y + alpha`.
///
/// Not symmetric: `y` is the reference value the band is built around.
pub fn approx_within(x: f64, y: f64, spec: ApproxSpec) -> bool {
    let lo = (1.0 - spec.eps) * y - spec.alpha;
    let hi = (1.0 + spec.eps) * y + spec.alpha;
    lo <= x && x <= hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn approx_examples() {
        assert!(approx_within(1.05, 1.0, ApproxSpec::relative(0.1)));
        assert!(approx_within(0.0, 0.0, ApproxSpec::new(0.3, 0.0).unwrap()));
        assert!(approx_within(0.0, 0.0, ApproxSpec::additive(0.0)));
        assert!(!approx_within(1.2, 1.0, ApproxSpec::new(0.1, 0.05).unwrap()));
    }

    #[test]
    fn approx_is_asymmetric() {
        // 2 is within 50% of 4, but 4 is not within 50% of 2.
        let s = ApproxSpec::relative(0.5);
        assert!(approx_within(2.0, 4.0, s));
        assert!(!approx_within(4.0, 2.0, s));
    }

    #[test]
    fn rejects_negative_slack() {
        assert!(ApproxSpec::new(-0.1, 0.0).is_err());
        assert!(ApproxSpec::new(0.1, f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn widening_never_breaks_membership(
            x in -10.0f64..10.0, y in 0.0f64..10.0,
            eps in 0.0f64..1.0, alpha in 0.0f64..1.0,
            d_eps in 0.0f64..1.0, d_alpha in 0.0f64..1.0,
        ) {
            let narrow = ApproxSpec { eps, alpha };
            let wide = ApproxSpec { eps: eps + d_eps, alpha: alpha + d_alpha };
            if approx_within(x, y, narrow) {
                prop_assert!(approx_within(x, y, wide));
            }
        }
    }
}
