//! Polyhedral over-approximation of a program's least model.

use std::collections::{BTreeMap, BTreeSet};

use crate::chc::{Clause, Pred, Program, Var};
use crate::lra::{entails, hull, project, widen, Polyhedron};
use crate::model::InterpretationModel;

pub const DEFAULT_WIDEN_DELAY: usize = 3;

/// The head's facts contributed by one clause under `m`, over `args`.
fn post(c: &Clause, m: &InterpretationModel, args: &[Var]) -> Option<Polyhedron> {
    let mut body = c.constraint.clone();
    for (i, b) in c.body.iter().enumerate() {
        if !m.has_nonempty(&b.pred) {
            return None;
        }
        body = body.and(&m.gamma(b, &format!("b{i}")));
    }
    let keep: BTreeSet<Var> = c.head.args.iter().cloned().collect();
    let projected = Polyhedron::from_constraint(&project(&body, &keep));
    if projected.is_empty() {
        return None;
    }
    let map: BTreeMap<Var, Var> = c
        .head
        .args
        .iter()
        .cloned()
        .zip(args.iter().cloned())
        .collect();
    Some(projected.rename(&map))
}

fn args_of(p: &Program, pred: &Pred) -> Vec<Var> {
    p.canonical_args(pred).unwrap_or_default()
}

/// Round-robin Kleene iteration over the clauses in source order. From the
/// `widen_delay`-th update of a predicate on, its entry is widened instead of
/// joined. A single descending pass follows and is kept when it is still a
/// pre-fixpoint.
pub fn analyze(p: &Program, widen_delay: usize) -> InterpretationModel {
    let mut m = InterpretationModel::new();
    let mut updates: BTreeMap<Pred, usize> = BTreeMap::new();
    loop {
        let mut changed = false;
        for c in p.clauses() {
            let pred = &c.head.pred;
            let args = args_of(p, pred);
            let Some(new) = post(c, &m, &args) else {
                continue;
            };
            let next = match m.get(pred) {
                None => new,
                Some(old) if new.leq(&old.constraint) => continue,
                Some(old) => {
                    let joined = hull(&old.constraint, &new);
                    let count = updates.get(pred).copied().unwrap_or(0);
                    if count >= widen_delay {
                        widen(&old.constraint, &joined)
                    } else {
                        joined
                    }
                }
            };
            *updates.entry(pred.clone()).or_default() += 1;
            m.insert(pred.clone(), args, next);
            changed = true;
        }
        if !changed {
            break;
        }
    }
    let narrowed = descend(p, &m);
    if is_prefixpoint(p, &narrowed) {
        narrowed
    } else {
        m
    }
}

/// One application of the consequence operator, joining per predicate.
fn descend(p: &Program, m: &InterpretationModel) -> InterpretationModel {
    let mut out = InterpretationModel::new();
    for c in p.clauses() {
        let pred = &c.head.pred;
        let args = args_of(p, pred);
        let Some(new) = post(c, m, &args) else {
            continue;
        };
        let joined = match out.get(pred) {
            None => new,
            Some(old) => hull(&old.constraint, &new),
        };
        out.insert(pred.clone(), args, joined);
    }
    out
}

/// Whether every clause's consequences under `m` are contained in `m`.
pub fn is_prefixpoint(p: &Program, m: &InterpretationModel) -> bool {
    p.clauses().iter().all(|c| {
        let mut body = c.constraint.clone();
        for (i, b) in c.body.iter().enumerate() {
            body = body.and(&m.gamma(b, &format!("b{i}")));
        }
        entails(&body, &m.gamma(&c.head, "h"))
    })
}

/// Whether `false` has a non-empty entry.
pub fn has_false(m: &InterpretationModel) -> bool {
    m.has_nonempty(&Pred::falsum())
}
