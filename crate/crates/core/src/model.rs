//! Interpretations as sets of constrained facts `p(X) :- phi`.

use std::collections::BTreeMap;
use std::fmt;

use crate::chc::{Atom, Pred, Var};
use crate::lra::{LinConstraint, Polyhedron};

/// `p(args) :- constraint` where the constraint only mentions `args`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConstrainedFact {
    pub args: Vec<Var>,
    pub constraint: Polyhedron,
}

impl ConstrainedFact {
    /// The fact's constraint over the arguments of `atom`. Variables of the
    /// constraint outside the fact's tuple are renamed apart with `tag`.
    pub fn instantiate(&self, atom: &Atom, tag: &str) -> LinConstraint {
        let mut map: BTreeMap<Var, Var> = self
            .args
            .iter()
            .cloned()
            .zip(atom.args.iter().cloned())
            .collect();
        let c = self.constraint.constraint();
        for v in c.vars() {
            map.entry(v.clone())
                .or_insert_with(|| Var::new(format!("#{tag}:{v}")));
        }
        c.rename(&map)
    }
}

/// A map from predicates to constrained facts. A predicate without an entry
/// denotes the empty relation.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct InterpretationModel {
    facts: BTreeMap<Pred, ConstrainedFact>,
}

impl InterpretationModel {
    pub fn new() -> Self {
        InterpretationModel::default()
    }

    pub fn insert(&mut self, pred: Pred, args: Vec<Var>, constraint: Polyhedron) {
        self.facts
            .insert(pred, ConstrainedFact { args, constraint });
    }

    pub fn get(&self, pred: &Pred) -> Option<&ConstrainedFact> {
        self.facts.get(pred)
    }

    pub fn remove(&mut self, pred: &Pred) -> Option<ConstrainedFact> {
        self.facts.remove(pred)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Pred, &ConstrainedFact)> {
        self.facts.iter()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// `gamma(atom)`: the entry for the atom's predicate over the atom's
    /// arguments; the unsatisfiable row when there is no entry.
    pub fn gamma(&self, atom: &Atom, tag: &str) -> LinConstraint {
        match self.facts.get(&atom.pred) {
            Some(f) => f.instantiate(atom, tag),
            None => LinConstraint::falsum(),
        }
    }

    /// Whether `atom`'s predicate has a non-empty entry.
    pub fn has_nonempty(&self, pred: &Pred) -> bool {
        self.facts
            .get(pred)
            .is_some_and(|f| !f.constraint.is_empty())
    }
}

impl fmt::Display for InterpretationModel {
    /// One `p(X1,...,Xn) :- constraints.` line per predicate.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (pred, fact) in &self.facts {
            let atom = Atom::new(pred.clone(), fact.args.clone());
            match &fact.constraint {
                Polyhedron::Constraint(c) if c.is_empty() => writeln!(f, "{atom}.")?,
                p => writeln!(f, "{atom} :- {}.", p.constraint())?,
            }
        }
        Ok(())
    }
}
