//! Safety verification of constrained Horn clauses.
//!
//! A program is analysed over convex polyhedra; when the resulting
//! approximation still derives `false`, a derivation skeleton (trace term) is
//! extracted and checked. Infeasible traces are generalised into an
//! interpolant tree automaton whose language is removed from the program's
//! trace automaton, and a refined program is generated from what remains.

pub mod absint;
pub mod chc;
pub mod derivations;
pub mod driver;
mod exec;
pub mod fta;
pub mod lra;
pub mod model;
pub mod refinement;
pub mod tree_interpolation;

pub use exec::num_threads;

use thiserror::Error;

/// Any error raised by the verifier's building blocks.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] chc::ParseError),
    #[error(transparent)]
    Program(#[from] chc::ProgramError),
    #[error(transparent)]
    Automaton(#[from] fta::FtaError),
    #[error(transparent)]
    Derivation(#[from] derivations::DerivationError),
    #[error(transparent)]
    Interpolation(#[from] lra::InterpolationError),
    #[error(transparent)]
    TreeInterpolation(#[from] tree_interpolation::TreeInterpolationError),
    #[error(transparent)]
    Refinement(#[from] refinement::RefinementError),
    #[error("time limit exceeded")]
    Timeout,
}
