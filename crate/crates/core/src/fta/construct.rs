use std::collections::BTreeMap;

use super::{State, TraceTerm, Transition, TreeAutomaton};
use crate::chc::{Clause, ClauseId, Pred, Program};
use crate::exec;
use crate::lra::sat;
use crate::model::InterpretationModel;

fn alphabet_of(p: &Program) -> BTreeMap<ClauseId, usize> {
    p.clauses()
        .iter()
        .map(|c| (c.id.clone(), c.body.len()))
        .collect()
}

fn clause_transition(c: &Clause) -> Transition {
    Transition::new(
        c.id.clone(),
        c.body.iter().map(|b| State::new(b.pred.name())).collect(),
        State::new(c.head.pred.name()),
    )
}

fn predicate_states(p: &Program) -> Vec<State> {
    p.predicates()
        .iter()
        .map(|q| State::new(q.name()))
        .chain(std::iter::once(State::new(Pred::FALSE_NAME)))
        .collect()
}

/// One state per predicate plus `false` (the only final state), and one
/// transition `c(p1,...,pk) -> p` per clause.
pub fn trace_fta(p: &Program) -> TreeAutomaton {
    TreeAutomaton::new(
        predicate_states(p),
        [State::new(Pred::FALSE_NAME)],
        alphabet_of(p),
        p.clauses().iter().map(clause_transition),
    )
    .expect("clause transitions respect their own arities")
}

/// The automaton accepting exactly `t`. Nodes are numbered in preorder; node
/// `i` becomes state `e<i>` and the root state `e1` is final.
pub fn singleton_fta(t: &TraceTerm) -> TreeAutomaton {
    let nodes = t.preorder();
    let mut index: BTreeMap<*const TraceTerm, usize> = BTreeMap::new();
    for (i, n) in nodes.iter().enumerate() {
        index.insert(*n as *const TraceTerm, i + 1);
    }
    let state = |n: &TraceTerm| State::new(format!("e{}", index[&(n as *const TraceTerm)]));
    let mut alphabet = BTreeMap::new();
    let mut transitions = Vec::new();
    for n in &nodes {
        alphabet.insert(n.symbol.clone(), n.children.len());
        transitions.push(Transition::new(
            n.symbol.clone(),
            n.children.iter().map(state).collect(),
            state(n),
        ));
    }
    TreeAutomaton::new(
        nodes.iter().map(|n| state(n)),
        [State::new("e1")],
        alphabet,
        transitions,
    )
    .expect("a term is arity-consistent")
}

/// The trace automaton restricted to clauses whose body is satisfiable when
/// each body atom is constrained by its entry in `m`.
pub fn model_fta(p: &Program, m: &InterpretationModel) -> TreeAutomaton {
    let keep = exec::map(p.clauses(), |c| {
        let mut body = c.constraint.clone();
        for (i, b) in c.body.iter().enumerate() {
            body = body.and(&m.gamma(b, &format!("b{i}")));
        }
        sat(&body)
    });
    let transitions: Vec<Transition> = p
        .clauses()
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(c, _)| clause_transition(c))
        .collect();
    TreeAutomaton::new(
        predicate_states(p),
        [State::new(Pred::FALSE_NAME)],
        alphabet_of(p),
        transitions,
    )
    .expect("clause transitions respect their own arities")
}
