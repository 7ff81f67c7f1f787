//! Binary interpolation from Farkas refutations.
//!
//! For an unsatisfiable `phi1 ∧ phi2` there are multipliers `y` (nonnegative
//! on inequalities, free on equalities) with `y·A = 0`, `y·b <= 0`, and
//! either `y·b < 0` or a strict row carrying positive weight. The interpolant
//! is the weighted sum of the `phi1` rows alone.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::linear::{rat, LinConstraint, LinExpr, LinRow, Rel};
use super::simplex::{is_sat, SatResult, Witness};
use super::Rat;
use crate::chc::Var;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InterpolationError {
    #[error("the two formulas are jointly satisfiable")]
    JointlySatisfiable,
}

/// Multipliers of a refutation of `phi1 ∧ phi2`, indexed by row position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refutation {
    pub first: Vec<Rat>,
    pub second: Vec<Rat>,
}

fn multiplier(side: &str, i: usize) -> Var {
    Var::new(format!("#farkas:{side}{i}"))
}

/// The linear system whose solutions are Farkas refutations. `extra` rows are
/// added verbatim (used to pin multipliers to zero).
fn farkas_system(phi1: &[LinRow], phi2: &[LinRow], extra: &[LinRow]) -> LinConstraint {
    let rows: Vec<(Var, &LinRow)> = phi1
        .iter()
        .enumerate()
        .map(|(i, r)| (multiplier("a", i), r))
        .chain(
            phi2.iter()
                .enumerate()
                .map(|(j, r)| (multiplier("b", j), r)),
        )
        .collect();

    let vars: BTreeSet<&Var> = rows.iter().flat_map(|(_, r)| r.vars()).collect();
    let mut system = Vec::new();
    for x in vars {
        let combo = LinExpr::from_terms(
            rows.iter()
                .filter_map(|(y, r)| r.expr.coeff(x).map(|c| (y.clone(), c.clone()))),
        );
        system.push(LinRow::eq(combo, Rat::zero()));
    }
    let mut weighted_rhs = LinExpr::zero();
    let mut strict_weight = LinExpr::zero();
    for (y, r) in &rows {
        if r.rel != Rel::Eq {
            system.push(LinRow::ge(LinExpr::var(y.clone()), Rat::zero()));
        }
        weighted_rhs.add_term(y.clone(), r.rhs.clone());
        if r.rel == Rel::Lt {
            strict_weight.add_term(y.clone(), Rat::one());
        }
    }
    // y·b <= 0  and  -y·b + sum(strict y) = 1
    system.push(LinRow::le(weighted_rhs.clone(), Rat::zero()));
    let mut normal = strict_weight;
    normal.add_scaled(&weighted_rhs, &rat(-1));
    system.push(LinRow::eq(normal, Rat::one()));
    system.extend(extra.iter().cloned());
    LinConstraint::new(system)
}

fn read_multipliers(w: &Witness, n1: usize, n2: usize) -> Refutation {
    let get = |v: Var| w.get(&v).map(|d| d.real.clone()).unwrap_or_else(Rat::zero);
    Refutation {
        first: (0..n1).map(|i| get(multiplier("a", i))).collect(),
        second: (0..n2).map(|j| get(multiplier("b", j))).collect(),
    }
}

/// A Farkas refutation of `phi1 ∧ phi2` with an inclusion-minimal set of
/// nonzero `phi2` multipliers (greedy, in row order), or `None` if the
/// conjunction is satisfiable.
pub fn refute(phi1: &LinConstraint, phi2: &LinConstraint) -> Option<Refutation> {
    let (r1, r2) = (phi1.rows(), phi2.rows());
    let base = farkas_system(r1, r2, &[]);
    let mut witness = match is_sat(&base) {
        SatResult::Unsat => return None,
        SatResult::Sat(w) => w,
    };
    let mut pinned: Vec<LinRow> = Vec::new();
    for j in 0..r2.len() {
        let current = read_multipliers(&witness, r1.len(), r2.len());
        if current.second[j].is_zero() {
            pinned.push(LinRow::eq(LinExpr::var(multiplier("b", j)), Rat::zero()));
            continue;
        }
        let mut attempt = pinned.clone();
        attempt.push(LinRow::eq(LinExpr::var(multiplier("b", j)), Rat::zero()));
        if let SatResult::Sat(w) = is_sat(&farkas_system(r1, r2, &attempt)) {
            pinned = attempt;
            witness = w;
        }
    }
    Some(read_multipliers(&witness, r1.len(), r2.len()))
}

/// A Craig interpolant `I` of an unsatisfiable pair: `phi1 ⊨ I`, `I ∧ phi2`
/// is unsatisfiable and `I` only mentions variables common to both sides.
/// The result is a single row (possibly constant) or the empty conjunction.
pub fn interpolate(
    phi1: &LinConstraint,
    phi2: &LinConstraint,
) -> Result<LinConstraint, InterpolationError> {
    let refutation = refute(phi1, phi2).ok_or(InterpolationError::JointlySatisfiable)?;
    let mut expr = LinExpr::zero();
    let mut rhs = Rat::zero();
    let mut strict = false;
    for (row, y) in phi1.rows().iter().zip(&refutation.first) {
        if y.is_zero() {
            continue;
        }
        expr.add_scaled(&row.expr, y);
        rhs += &row.rhs * y;
        if row.rel == Rel::Lt && y.is_positive() {
            strict = true;
        }
    }
    let rel = if strict { Rel::Lt } else { Rel::Le };
    let row = LinRow::new(expr, rel, rhs);
    match row.constant_truth() {
        Some(true) => Ok(LinConstraint::top()),
        Some(false) => Ok(LinConstraint::falsum()),
        None => Ok(LinConstraint::new(vec![row.normalized()])),
    }
}
