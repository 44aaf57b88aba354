//! Subsampled unitary measurement matrices.
//!
//! Build `A = √(N/q)·M_Q` from random rows of a flat unitary `M`, compute
//! its restricted isometry constants exactly (small `N`) or as lower bounds,
//! realize the Maurey-sampling vector families that cover `|Mx|²` scale by
//! scale, and run sparse recovery and scaling experiments on top.

pub mod error;
pub mod harness;
pub mod linalg;
pub mod maurey;
pub mod numeric;
pub mod recovery;
pub mod rng;
pub mod rip;
pub mod sampling;

pub use error::{Error, Result};
pub use linalg::{approx_within, make_unitary, ApproxSpec, ComplexVector, ImplicitUnitary, UnitaryKind};
pub use maurey::{
    build_improved_family, build_simple_family, find_good_g, phase_decompose, sample_g, tail_probe,
    verify_decomposition, NetFamily, NetParams, NetVariant, PhaseDistribution,
};
pub use num_complex::Complex64;
pub use recovery::{iht, omp, RecoveryResult, Solver};
pub use sampling::{apply_partial, full_mean, sample_rows, sampled_mean, PartialOperator, RowSample};
