//! Refined programs from a program and an automaton over its clause ids.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::chc::{Atom, Clause, ClauseId, Pred, Program, ProgramError};
use crate::fta::{State, TreeAutomaton};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RefinementError {
    #[error("the automaton is not bottom-up deterministic")]
    Nondeterministic,
    #[error("{0} is not a clause of the program")]
    UnknownClause(ClauseId),
    #[error("transition on {0} does not match the clause's body length")]
    ArityMismatch(ClauseId),
    #[error(transparent)]
    Program(#[from] ProgramError),
}

/// A generated program together with the source clause of each new clause.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refined {
    pub program: Program,
    pub id_map: BTreeMap<ClauseId, ClauseId>,
}

impl Refined {
    /// `generated=source` lines, in generated-id order.
    pub fn side_map(&self) -> String {
        let mut out = String::new();
        for c in self.program.clauses() {
            let _ = writeln!(out, "{}={}", c.id, self.id_map[&c.id]);
        }
        out
    }
}

fn indexed(pred: &Pred, k: usize) -> Pred {
    Pred::new(format!("{}__q{}", pred.name(), k))
}

/// One clause per transition `c(q1,...,qk) -> q`: clause `c` with its head
/// predicate tagged by `q` and each body predicate by its `qi`. Integrity
/// constraints are kept only for final `q`, with head `false`. State tags are
/// positions in the automaton's sorted state set. Clauses that cannot take
/// part in a derivation of `false` are dropped, and the rest renumbered
/// `c1, c2, ...` in source-clause order.
pub fn generate_clauses(p: &Program, a: &TreeAutomaton) -> Result<Refined, RefinementError> {
    if !a.is_deterministic() {
        return Err(RefinementError::Nondeterministic);
    }
    let index: BTreeMap<&State, usize> = a.states().iter().zip(1..).collect();
    let by_symbol = a.by_symbol();
    for symbol in by_symbol.keys() {
        p.clause_by_id(symbol)
            .map_err(|_| RefinementError::UnknownClause((*symbol).clone()))?;
    }
    let mut generated: Vec<(Clause, ClauseId)> = Vec::new();
    for c in p.clauses() {
        for t in by_symbol.get(&c.id).into_iter().flatten() {
            if t.args.len() != c.body.len() {
                return Err(RefinementError::ArityMismatch(c.id.clone()));
            }
            let head = if c.is_integrity() {
                if !a.is_final(&t.target) {
                    continue;
                }
                c.head.clone()
            } else {
                Atom::new(indexed(&c.head.pred, index[&t.target]), c.head.args.clone())
            };
            let body = c
                .body
                .iter()
                .zip(&t.args)
                .map(|(b, q)| Atom::new(indexed(&b.pred, index[q]), b.args.clone()))
                .collect();
            generated.push((
                Clause {
                    id: c.id.clone(),
                    origin: c.origin.clone(),
                    head,
                    constraint: c.constraint.clone(),
                    body,
                },
                c.id.clone(),
            ));
        }
    }
    let kept = collect_garbage(generated);
    let mut id_map = BTreeMap::new();
    let clauses = kept
        .into_iter()
        .enumerate()
        .map(|(k, (mut clause, source))| {
            clause.id = ClauseId::numbered(k + 1);
            id_map.insert(clause.id.clone(), source);
            clause
        })
        .collect();
    Ok(Refined {
        program: Program::new(clauses)?,
        id_map,
    })
}

/// Drops clauses with an underivable body atom, then clauses whose head
/// does not lead to `false`.
fn collect_garbage(mut clauses: Vec<(Clause, ClauseId)>) -> Vec<(Clause, ClauseId)> {
    let mut productive: BTreeSet<Pred> = BTreeSet::new();
    loop {
        let before = productive.len();
        for (c, _) in &clauses {
            if c.body.iter().all(|b| productive.contains(&b.pred)) {
                productive.insert(c.head.pred.clone());
            }
        }
        if productive.len() == before {
            break;
        }
    }
    clauses.retain(|(c, _)| c.body.iter().all(|b| productive.contains(&b.pred)));

    let mut useful: BTreeSet<Pred> = BTreeSet::from([Pred::falsum()]);
    loop {
        let before = useful.len();
        for (c, _) in &clauses {
            if useful.contains(&c.head.pred) {
                useful.extend(c.body.iter().map(|b| b.pred.clone()));
            }
        }
        if useful.len() == before {
            break;
        }
    }
    clauses.retain(|(c, _)| useful.contains(&c.head.pred));
    clauses
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chc::parse_program;
    use crate::fta::{determinise, trace_fta};

    #[test]
    fn identity_refinement_keeps_structure() {
        let p = parse_program("p(X) :- X=0. p(X) :- p(Y), X=Y+1. false :- p(X), X<0.").unwrap();
        let r = generate_clauses(&p, &determinise(&trace_fta(&p))).unwrap();
        assert_eq!(r.program.len(), 3);
        assert_eq!(r.side_map(), "c1=c1\nc2=c2\nc3=c3\n");
        assert!(r.program.to_string().contains("p__q"));
    }

    #[test]
    fn nondeterminism_is_rejected() {
        let p = parse_program("p(X) :- X=0. false :- p(X).").unwrap();
        let a: TreeAutomaton = "finals: f\nc1 -> a\nc1 -> b\nc2(a) -> f\n".parse().unwrap();
        assert_eq!(
            generate_clauses(&p, &a),
            Err(RefinementError::Nondeterministic)
        );
    }

    #[test]
    fn empty_language_gives_empty_program() {
        let p = parse_program("p(X) :- X=0. false :- p(X).").unwrap();
        let a = TreeAutomaton::empty(BTreeMap::new());
        assert!(generate_clauses(&p, &a).unwrap().program.is_empty());
    }
}
