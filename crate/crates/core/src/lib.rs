//! Isoperimetric profiles of finitely generated groups and of their
//! measure-preserving actions.
//!
//! The group side works with exact subsets of ℤ^d, the Heisenberg group and
//! free groups; the action side with finite measured graphings (tori,
//! Heisenberg quotients, weighted cycles). Tilings, Rokhlin towers and the
//! inequalities between the two profiles sit on top.
//!
//! Measures are generic over [`Scalar`]; [`Rational`] is the exact choice
//! used by all checks.

pub mod action_profile;
pub mod bounds;
pub mod error;
pub mod graphings;
pub mod groups;
pub mod isoperimetry;
pub mod rokhlin;
pub mod scalar;
pub mod tilings;

pub use error::{Error, Result};
pub use groups::{Ball, GroupElement, GroupKind, MarkedGroup};
pub use isoperimetry::GroupSubset;
pub use scalar::{Exponent, Interval, Scalar, Verdict};
pub use tilings::MultiTile;

/// Exact rationals.
pub type Rational = num_rational::BigRational;
/// Graphing with exact rational weights.
pub type Graphing = graphings::MeasuredGraphing<Rational>;
/// Graphing with `f64` weights, for quick exploratory runs.
pub type FloatGraphing = graphings::MeasuredGraphing<f64>;
