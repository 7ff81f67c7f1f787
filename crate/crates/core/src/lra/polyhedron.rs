//! Convex polyhedra as minimised constraint systems.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};

use super::fourier_motzkin::{dedupe, project};
use super::linear::{rat, LinConstraint, LinExpr, LinRow, Rel};
use super::simplex::{entails, entails_row, sat};
use super::Rat;
use crate::chc::Var;

/// A convex polyhedron: either empty or a satisfiable constraint system
/// without redundant rows. `Constraint` with no rows is the universe.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Polyhedron {
    Empty,
    Constraint(LinConstraint),
}

impl Polyhedron {
    pub fn top() -> Self {
        Polyhedron::Constraint(LinConstraint::top())
    }

    /// Checks satisfiability and removes redundant rows. Pairs of opposite
    /// inequalities become equalities.
    pub fn from_constraint(c: &LinConstraint) -> Self {
        if !sat(c) {
            return Polyhedron::Empty;
        }
        Polyhedron::Constraint(minimise(c))
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Polyhedron::Empty)
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Polyhedron::Constraint(c) if c.is_empty())
    }

    /// The constraint view; `Empty` becomes the unsatisfiable row.
    pub fn constraint(&self) -> LinConstraint {
        match self {
            Polyhedron::Empty => LinConstraint::falsum(),
            Polyhedron::Constraint(c) => c.clone(),
        }
    }

    /// Number of half-spaces, counting an equality as two.
    pub fn half_spaces(&self) -> usize {
        match self {
            Polyhedron::Empty => 0,
            Polyhedron::Constraint(c) => c
                .rows()
                .iter()
                .map(|r| if r.rel == Rel::Eq { 2 } else { 1 })
                .sum(),
        }
    }

    /// Inclusion `self ⊆ other`.
    pub fn leq(&self, other: &Polyhedron) -> bool {
        match (self, other) {
            (Polyhedron::Empty, _) => true,
            (_, Polyhedron::Empty) => false,
            (Polyhedron::Constraint(a), Polyhedron::Constraint(b)) => entails(a, b),
        }
    }

    pub fn equivalent(&self, other: &Polyhedron) -> bool {
        self.leq(other) && other.leq(self)
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Polyhedron {
        match self {
            Polyhedron::Empty => Polyhedron::Empty,
            Polyhedron::Constraint(c) => Polyhedron::Constraint(c.rename(map)),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        match self {
            Polyhedron::Empty => BTreeSet::new(),
            Polyhedron::Constraint(c) => c.vars(),
        }
    }
}

impl fmt::Display for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polyhedron::Empty => f.write_str("empty"),
            Polyhedron::Constraint(c) => write!(f, "{c}"),
        }
    }
}

/// Removes redundant rows of a satisfiable system and detects implicit
/// equalities.
fn minimise(c: &LinConstraint) -> LinConstraint {
    let mut rows = dedupe(c.rows().to_vec());
    let full = LinConstraint::new(rows.clone());
    // Implicit equalities.
    for r in rows.iter_mut() {
        if r.rel == Rel::Le {
            let reverse = LinRow::le(r.expr.scaled(&rat(-1)), -r.rhs.clone());
            if entails_row(&full, &reverse) {
                *r = LinRow::eq(r.expr.clone(), r.rhs.clone()).normalized();
            }
        }
    }
    let mut rows = dedupe(rows);
    let mut i = 0;
    while i < rows.len() {
        let rest: Vec<LinRow> = rows
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, r)| r.clone())
            .collect();
        if entails_row(&LinConstraint::new(rest), &rows[i]) {
            rows.remove(i);
        } else {
            i += 1;
        }
    }
    LinConstraint::new(rows)
}

/// The least polyhedron containing both arguments.
///
/// Computed on the topological closures with the lifted system
/// `x = y + z, A1 y <= b1 l, A2 z <= b2 (1 - l), 0 <= l <= 1` projected onto
/// `x`. A resulting row is made strict when both arguments satisfy its strict
/// version.
pub fn hull(p1: &Polyhedron, p2: &Polyhedron) -> Polyhedron {
    let (c1, c2) = match (p1, p2) {
        (Polyhedron::Empty, _) => return p2.clone(),
        (_, Polyhedron::Empty) => return p1.clone(),
        (Polyhedron::Constraint(a), Polyhedron::Constraint(b)) => (a, b),
    };
    if c1.is_empty() || c2.is_empty() {
        return Polyhedron::top();
    }
    let vars: BTreeSet<Var> = c1.vars().union(&c2.vars()).cloned().collect();
    let lambda = Var::new("#hull:l");
    let y = |v: &Var| Var::new(format!("#hull:y:{v}"));
    let z = |v: &Var| Var::new(format!("#hull:z:{v}"));

    let mut rows = Vec::new();
    for v in &vars {
        rows.push(LinRow::eq(
            LinExpr::from_terms([(v.clone(), rat(1)), (y(v), rat(-1)), (z(v), rat(-1))]),
            Rat::zero(),
        ));
    }
    let closed = |r: &LinRow| if r.rel == Rel::Lt { Rel::Le } else { r.rel };
    for r in c1.rows() {
        // A y - b l rel 0
        let mut e = LinExpr::from_terms(r.expr.terms().map(|(v, c)| (y(v), c.clone())));
        e.add_term(lambda.clone(), -r.rhs.clone());
        rows.push(LinRow::new(e, closed(r), Rat::zero()));
    }
    for r in c2.rows() {
        // A z + b l rel b
        let mut e = LinExpr::from_terms(r.expr.terms().map(|(v, c)| (z(v), c.clone())));
        e.add_term(lambda.clone(), r.rhs.clone());
        rows.push(LinRow::new(e, closed(r), r.rhs.clone()));
    }
    rows.push(LinRow::ge(LinExpr::var(lambda.clone()), Rat::zero()));
    rows.push(LinRow::le(LinExpr::var(lambda), Rat::one()));

    let projected = project(&LinConstraint::new(rows), &vars);
    let strictified: Vec<LinRow> = projected
        .rows()
        .iter()
        .map(|r| {
            if r.rel == Rel::Le {
                let strict = LinRow::lt(r.expr.clone(), r.rhs.clone());
                if entails_row(c1, &strict) && entails_row(c2, &strict) {
                    return strict;
                }
            }
            r.clone()
        })
        .collect();
    Polyhedron::from_constraint(&LinConstraint::new(strictified))
}

/// Standard widening: keeps the rows of `p1` that `p2` satisfies. If `p1` is
/// not included in `p2`, `p2` is first replaced by their hull.
pub fn widen(p1: &Polyhedron, p2: &Polyhedron) -> Polyhedron {
    let c1 = match p1 {
        Polyhedron::Empty => return p2.clone(),
        Polyhedron::Constraint(c) => c,
    };
    let upper = if p1.leq(p2) { p2.clone() } else { hull(p1, p2) };
    let c2 = match &upper {
        Polyhedron::Empty => return p1.clone(),
        Polyhedron::Constraint(c) => c,
    };
    let kept: Vec<LinRow> = c1
        .rows()
        .iter()
        .flat_map(|r| r.split())
        .filter(|r| entails_row(c2, r))
        .collect();
    Polyhedron::from_constraint(&LinConstraint::new(kept))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Var {
        Var::new("x")
    }

    fn poly(rows: Vec<LinRow>) -> Polyhedron {
        Polyhedron::from_constraint(&LinConstraint::new(rows))
    }

    fn between(lo: i64, hi: i64) -> Polyhedron {
        poly(vec![
            LinRow::ge(LinExpr::var(x()), rat(lo)),
            LinRow::le(LinExpr::var(x()), rat(hi)),
        ])
    }

    #[test]
    fn hull_of_two_points_is_segment() {
        let a = poly(vec![LinRow::eq(LinExpr::var(x()), rat(0))]);
        let b = poly(vec![LinRow::eq(LinExpr::var(x()), rat(1))]);
        let h = hull(&a, &b);
        assert!(h.equivalent(&between(0, 1)));
    }

    #[test]
    fn hull_with_empty_is_identity() {
        let a = between(0, 3);
        assert_eq!(hull(&a, &Polyhedron::Empty), a);
        assert_eq!(hull(&Polyhedron::Empty, &a), a);
    }

    #[test]
    fn hull_keeps_common_strictness() {
        // 0 < x < 1  join  2 < x < 3  ==>  0 < x < 3
        let a = poly(vec![
            LinRow::gt(LinExpr::var(x()), rat(0)),
            LinRow::lt(LinExpr::var(x()), rat(1)),
        ]);
        let b = poly(vec![
            LinRow::gt(LinExpr::var(x()), rat(2)),
            LinRow::lt(LinExpr::var(x()), rat(3)),
        ]);
        let h = hull(&a, &b);
        let expected = poly(vec![
            LinRow::gt(LinExpr::var(x()), rat(0)),
            LinRow::lt(LinExpr::var(x()), rat(3)),
        ]);
        assert!(h.equivalent(&expected), "{h}");
    }

    #[test]
    fn widening_drops_unstable_bounds() {
        let w = widen(&between(0, 1), &between(0, 2));
        let expected = poly(vec![LinRow::ge(LinExpr::var(x()), rat(0))]);
        assert!(w.equivalent(&expected));
        assert_eq!(widen(&between(0, 1), &between(0, 1)), between(0, 1));
        assert_eq!(widen(&Polyhedron::Empty, &between(0, 1)), between(0, 1));
    }

    #[test]
    fn implicit_equalities_are_merged() {
        let p = between(2, 2);
        match p {
            Polyhedron::Constraint(c) => {
                assert_eq!(c.len(), 1);
                assert_eq!(c.rows()[0].rel, Rel::Eq);
            }
            Polyhedron::Empty => panic!("not empty"),
        }
    }
}
