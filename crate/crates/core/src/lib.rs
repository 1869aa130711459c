//! Quadratic-variation toolkit for functions on the unit interval.
//!
//! The crate computes the quadratic variation `v2(f, P)` of a function over
//! partitions and interval families, the variation norm as a supremum over
//! partitions, and the mesh-constrained variation that induces the variation
//! measure of a function. On top of those engines it provides
//!
//! * estimation of the variation measure (distribution function, atoms,
//!   discrete/continuous split, distance bounds),
//! * constructive synthesis of a function realizing a prescribed measure
//!   (step part for atoms, square-root tent levels for the continuous part,
//!   Rademacher primitives as the uniform special case),
//! * biorthogonality checkers and greedy subsequence selection with
//!   re-verifiable certificates,
//! * dyadic-tree combinatorics: `S^p` norms with optimal antichains, the
//!   branch/antichain decomposition inequality, level-set subtrees, system
//!   bundle validators and the level-averaging transform.
//!
//! The crate is `no_std`-compatible (`alloc` required); enable the `libm`
//! feature for builds without `std`. All operations are pure and safe to
//! call concurrently.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("quadvar-core requires either the `std` or the `libm` feature");

pub mod biorthogonal;
pub mod dyadictree;
pub mod fixtures;
pub mod funcmodel;
pub mod intervals;
pub mod synthesis;
pub mod varmeasure;
pub mod varnorm;

pub(crate) mod math;
pub(crate) mod util;

use alloc::string::String;
use core::fmt;

/// Absolute tolerance for identities that hold exactly up to float rounding.
pub const EXACT_TOL: f64 = 1e-12;

/// Guard subtracted from strict mesh bounds so that exact dyadic gap values
/// never flip on rounding noise.
pub const MESH_GUARD: f64 = 1e-15;

/// Errors shared by the whole crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Partition points not strictly increasing or outside `[0,1]`.
    InvalidPartition(String),
    /// Interval bounds out of order or outside `[0,1]`.
    InvalidInterval(String),
    /// Family violates the disjoint-interior requirement.
    InvalidFamily(String),
    /// Mesh ladder not strictly decreasing in `(0,1]`.
    InvalidLadder(String),
    /// Function model violates a structural invariant.
    InvalidModel(String),
    /// Measure specification violates monotonicity or positivity.
    InvalidMeasure(String),
    /// Evaluation point outside `[0,1]`.
    Domain(f64),
    /// A grid is too coarse for the requested mesh bound.
    GridTooCoarse { spacing: f64, delta: f64 },
    /// A grid would need more points than the configured cap.
    GridOverflow { needed: usize, cap: usize },
    /// Greedy selection ran out of admissible candidates.
    SelectionFailed { step: usize, detail: String },
    /// Mismatched argument lengths.
    LengthMismatch { left: usize, right: usize },
    /// A bundle is structurally incomplete for its declared depth.
    IncompleteBundle(String),
    /// Transform constants degenerate (`theta' <= 0`).
    DegenerateConstants(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidPartition(s) => write!(f, "invalid partition: {s}"),
            Error::InvalidInterval(s) => write!(f, "invalid interval: {s}"),
            Error::InvalidFamily(s) => write!(f, "invalid interval family: {s}"),
            Error::InvalidLadder(s) => write!(f, "invalid mesh ladder: {s}"),
            Error::InvalidModel(s) => write!(f, "invalid function model: {s}"),
            Error::InvalidMeasure(s) => write!(f, "invalid measure: {s}"),
            Error::Domain(t) => write!(f, "evaluation point {t} outside [0,1]"),
            Error::GridTooCoarse { spacing, delta } => {
                write!(f, "grid spacing {spacing} exceeds delta/4 for delta {delta}")
            }
            Error::GridOverflow { needed, cap } => {
                write!(f, "grid would need {needed} points, cap is {cap}")
            }
            Error::SelectionFailed { step, detail } => {
                write!(f, "selection failed at step {step}: {detail}")
            }
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::IncompleteBundle(s) => write!(f, "incomplete bundle: {s}"),
            Error::DegenerateConstants(s) => write!(f, "degenerate constants: {s}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

pub use funcmodel::{FunctionModel, Interpolation, JumpPoint, Jumps};
pub use intervals::{Interval, IntervalFamily, MeshLadder, Partition};
pub use varmeasure::{MeasureEstimate, MeasureSpec, PiecewiseLinear};
pub use varnorm::{Method, VariationResult, Witness};
