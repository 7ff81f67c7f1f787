//! Exact linear real arithmetic over arbitrary-precision rationals.

mod delta;
mod fourier_motzkin;
mod interpolate;
mod linear;
mod polyhedron;
mod simplex;

pub use delta::DeltaRat;
pub use fourier_motzkin::project;
pub use interpolate::{interpolate, refute, InterpolationError, Refutation};
pub use linear::{rat, rat_frac, LinConstraint, LinExpr, LinRow, Rel};
pub use polyhedron::{hull, widen, Polyhedron};
pub use simplex::{entailment_countermodel, entails, entails_row, is_sat, sat, SatResult, Witness};

/// Rational numbers used throughout.
pub type Rat = num_rational::BigRational;
