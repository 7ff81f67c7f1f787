use std::collections::{BTreeMap, BTreeSet};

use super::{FtaError, State, Transition, TreeAutomaton};
use crate::chc::ClauseId;

type StateSet = BTreeSet<State>;

/// Transitions of one automaton indexed by symbol.
struct Index<'a> {
    by_symbol: BTreeMap<&'a ClauseId, Vec<&'a Transition>>,
}

impl<'a> Index<'a> {
    fn new(a: &'a TreeAutomaton) -> Self {
        Index {
            by_symbol: a.by_symbol(),
        }
    }

    /// Every target reachable by `symbol` from argument sets `args`.
    fn step(&self, symbol: &ClauseId, args: &[&StateSet]) -> StateSet {
        self.by_symbol
            .get(symbol)
            .into_iter()
            .flatten()
            .filter(|t| {
                t.args.len() == args.len()
                    && t.args.iter().zip(args).all(|(q, set)| set.contains(q))
            })
            .map(|t| t.target.clone())
            .collect()
    }
}

/// Calls `f` on every tuple drawn from `pools`, in lexicographic order.
fn for_each_tuple<T>(pools: &[Vec<T>], f: &mut impl FnMut(&[&T])) {
    fn go<'a, T>(pools: &'a [Vec<T>], acc: &mut Vec<&'a T>, f: &mut impl FnMut(&[&T])) {
        match pools.split_first() {
            None => f(acc),
            Some((head, rest)) => {
                for x in head {
                    acc.push(x);
                    go(rest, acc, f);
                    acc.pop();
                }
            }
        }
    }
    go(pools, &mut Vec::new(), f)
}

/// Bottom-up subset construction restricted to reachable sets. Each state of
/// the result is named after its member set, e.g. `{q1,q2}`.
pub fn determinise(a: &TreeAutomaton) -> TreeAutomaton {
    let index = Index::new(a);
    let mut sets: Vec<StateSet> = Vec::new();
    let mut known: BTreeSet<StateSet> = BTreeSet::new();
    let mut transitions: BTreeSet<(ClauseId, Vec<usize>, StateSet)> = BTreeSet::new();
    loop {
        let before = sets.len();
        let mut found: Vec<StateSet> = Vec::new();
        for (symbol, &arity) in a.alphabet() {
            let pools: Vec<Vec<usize>> = vec![(0..sets.len()).collect(); arity];
            for_each_tuple(&pools, &mut |tuple| {
                let args: Vec<&StateSet> = tuple.iter().map(|&&i| &sets[i]).collect();
                let target = index.step(symbol, &args);
                if target.is_empty() {
                    return;
                }
                let key: Vec<usize> = tuple.iter().map(|&&i| i).collect();
                transitions.insert((symbol.clone(), key, target.clone()));
                if !known.contains(&target) {
                    found.push(target);
                }
            });
        }
        for s in found {
            if known.insert(s.clone()) {
                sets.push(s);
            }
        }
        if sets.len() == before {
            break;
        }
    }
    let name = |s: &StateSet| State::of_set(s);
    let finals = sets
        .iter()
        .filter(|s| s.iter().any(|q| a.is_final(q)))
        .map(name);
    let transitions = transitions.into_iter().map(|(symbol, args, target)| {
        Transition::new(
            symbol,
            args.into_iter().map(|i| name(&sets[i])).collect(),
            name(&target),
        )
    });
    TreeAutomaton::new(
        sets.iter().map(name),
        finals,
        a.alphabet().clone(),
        transitions,
    )
    .expect("subset construction preserves arities")
}

/// An automaton for `L(a) \ L(b)`: the product of `a` with the completed
/// determinisation of `b`, built lazily from reachable pairs. The sink of the
/// completion is the empty set `{}`.
pub fn difference(a: &TreeAutomaton, b: &TreeAutomaton) -> Result<TreeAutomaton, FtaError> {
    let alphabet = a.merged_alphabet(b)?;
    let b_index = Index::new(b);
    let a_by_symbol = a.by_symbol();

    // Reachable pairs (state of a, subset of b's states), grouped by the
    // a-component.
    let mut pairs: Vec<(State, StateSet)> = Vec::new();
    let mut known: BTreeSet<(State, StateSet)> = BTreeSet::new();
    let mut by_a: BTreeMap<State, Vec<usize>> = BTreeMap::new();
    let mut transitions: BTreeSet<(ClauseId, Vec<usize>, (State, StateSet))> = BTreeSet::new();
    loop {
        let before = pairs.len();
        let mut found = Vec::new();
        for (symbol, ts) in &a_by_symbol {
            for t in ts {
                let pools: Vec<Vec<usize>> = t
                    .args
                    .iter()
                    .map(|q| by_a.get(q).cloned().unwrap_or_default())
                    .collect();
                if pools.iter().any(Vec::is_empty) {
                    continue;
                }
                for_each_tuple(&pools, &mut |tuple| {
                    let args: Vec<&StateSet> = tuple.iter().map(|&&i| &pairs[i].1).collect();
                    let target = (t.target.clone(), b_index.step(symbol, &args));
                    let key: Vec<usize> = tuple.iter().map(|&&i| i).collect();
                    transitions.insert(((*symbol).clone(), key, target.clone()));
                    if !known.contains(&target) {
                        found.push(target);
                    }
                });
            }
        }
        for p in found {
            if known.insert(p.clone()) {
                by_a.entry(p.0.clone()).or_default().push(pairs.len());
                pairs.push(p);
            }
        }
        if pairs.len() == before {
            break;
        }
    }
    let name = |(q, s): &(State, StateSet)| State::new(format!("({},{})", q, State::of_set(s)));
    let finals = pairs
        .iter()
        .filter(|(q, s)| a.is_final(q) && !s.iter().any(|r| b.is_final(r)))
        .map(name);
    let transitions = transitions.into_iter().map(|(symbol, args, target)| {
        Transition::new(
            symbol,
            args.into_iter().map(|i| name(&pairs[i])).collect(),
            name(&target),
        )
    });
    TreeAutomaton::new(pairs.iter().map(name), finals, alphabet, transitions)
}
