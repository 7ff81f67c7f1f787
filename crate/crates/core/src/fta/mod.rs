//! Bottom-up finite tree automata over clause-identifier alphabets.

mod construct;
mod determinise;
mod search;
mod term;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::chc::ClauseId;

pub use construct::{model_fta, singleton_fta, trace_fta};
pub use determinise::{determinise, difference};
pub use search::{enumerate, find_accepted, ENUMERATE_BOUND};
pub use term::TraceTerm;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FtaError {
    #[error("symbol {symbol} has arity {left} on one side and {right} on the other")]
    AlphabetMismatch {
        symbol: ClauseId,
        left: usize,
        right: usize,
    },
    #[error("enumeration depth {requested} exceeds the bound {bound}")]
    DepthBoundExceeded { requested: usize, bound: usize },
    #[error("transition {0} does not respect the symbol's arity")]
    ArityMismatch(String),
    #[error("final state {0} is not a state")]
    UnknownFinal(State),
    #[error("malformed automaton text: {0}")]
    Malformed(String),
}

/// An automaton state, identified by its name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(Arc<str>);

impl State {
    pub fn new(name: impl AsRef<str>) -> Self {
        State(Arc::from(name.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// Canonical name of a set of states: sorted members in braces.
    pub fn of_set<'a>(members: impl IntoIterator<Item = &'a State>) -> State {
        let sorted: BTreeSet<&State> = members.into_iter().collect();
        let names: Vec<&str> = sorted.iter().map(|s| s.name()).collect();
        State::new(format!("{{{}}}", names.join(",")))
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `symbol(args) -> target`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Transition {
    pub symbol: ClauseId,
    pub args: Vec<State>,
    pub target: State,
}

impl Transition {
    pub fn new(symbol: ClauseId, args: Vec<State>, target: State) -> Self {
        Transition {
            symbol,
            args,
            target,
        }
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol)?;
        if !self.args.is_empty() {
            let args: Vec<&str> = self.args.iter().map(|s| s.name()).collect();
            write!(f, "({})", args.join(","))?;
        }
        write!(f, " -> {}", self.target)
    }
}

/// `(Q, Q_f, Sigma, Delta)`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct TreeAutomaton {
    states: BTreeSet<State>,
    finals: BTreeSet<State>,
    alphabet: BTreeMap<ClauseId, usize>,
    transitions: BTreeSet<Transition>,
}

impl TreeAutomaton {
    /// Builds an automaton, adding every state mentioned by a transition.
    pub fn new(
        states: impl IntoIterator<Item = State>,
        finals: impl IntoIterator<Item = State>,
        alphabet: BTreeMap<ClauseId, usize>,
        transitions: impl IntoIterator<Item = Transition>,
    ) -> Result<Self, FtaError> {
        let mut a = TreeAutomaton {
            states: states.into_iter().collect(),
            finals: BTreeSet::new(),
            alphabet,
            transitions: BTreeSet::new(),
        };
        for t in transitions {
            match a.alphabet.get(&t.symbol) {
                Some(&k) if k == t.args.len() => {}
                Some(_) => return Err(FtaError::ArityMismatch(t.to_string())),
                None => {
                    a.alphabet.insert(t.symbol.clone(), t.args.len());
                }
            }
            a.states.extend(t.args.iter().cloned());
            a.states.insert(t.target.clone());
            a.transitions.insert(t);
        }
        for f in finals {
            if !a.states.contains(&f) {
                return Err(FtaError::UnknownFinal(f));
            }
            a.finals.insert(f);
        }
        Ok(a)
    }

    /// The automaton with no states over the given alphabet.
    pub fn empty(alphabet: BTreeMap<ClauseId, usize>) -> Self {
        TreeAutomaton {
            alphabet,
            ..Default::default()
        }
    }

    pub fn states(&self) -> &BTreeSet<State> {
        &self.states
    }

    pub fn finals(&self) -> &BTreeSet<State> {
        &self.finals
    }

    pub fn alphabet(&self) -> &BTreeMap<ClauseId, usize> {
        &self.alphabet
    }

    pub fn transitions(&self) -> &BTreeSet<Transition> {
        &self.transitions
    }

    pub fn is_final(&self, q: &State) -> bool {
        self.finals.contains(q)
    }

    /// Transitions grouped by symbol.
    pub fn by_symbol(&self) -> BTreeMap<&ClauseId, Vec<&Transition>> {
        let mut out: BTreeMap<&ClauseId, Vec<&Transition>> = BTreeMap::new();
        for t in &self.transitions {
            out.entry(&t.symbol).or_default().push(t);
        }
        out
    }

    /// At most one target per left-hand side.
    pub fn is_deterministic(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.transitions
            .iter()
            .all(|t| seen.insert((&t.symbol, &t.args)))
    }

    /// States reached by running `t` bottom-up.
    pub fn run(&self, t: &TraceTerm) -> BTreeSet<State> {
        let child_states: Vec<BTreeSet<State>> = t.children.iter().map(|c| self.run(c)).collect();
        self.transitions
            .iter()
            .filter(|tr| tr.symbol == t.symbol && tr.args.len() == child_states.len())
            .filter(|tr| {
                tr.args
                    .iter()
                    .zip(&child_states)
                    .all(|(q, set)| set.contains(q))
            })
            .map(|tr| tr.target.clone())
            .collect()
    }

    pub fn accepts(&self, t: &TraceTerm) -> bool {
        self.run(t).iter().any(|q| self.finals.contains(q))
    }

    /// Arity-compatible union of the two alphabets.
    pub(crate) fn merged_alphabet(
        &self,
        other: &TreeAutomaton,
    ) -> Result<BTreeMap<ClauseId, usize>, FtaError> {
        let mut out = self.alphabet.clone();
        for (s, &k) in &other.alphabet {
            match out.get(s) {
                Some(&j) if j != k => {
                    return Err(FtaError::AlphabetMismatch {
                        symbol: s.clone(),
                        left: j,
                        right: k,
                    })
                }
                _ => {
                    out.insert(s.clone(), k);
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for TreeAutomaton {
    /// Dump format: `states:`, `finals:` and `alphabet:` header lines, then
    /// one `c(q1,...,qk) -> q` transition per line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |set: &BTreeSet<State>| {
            set.iter()
                .map(|s| s.name().to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(f, "states: {}", join(&self.states))?;
        writeln!(f, "finals: {}", join(&self.finals))?;
        let alpha: Vec<String> = self
            .alphabet
            .iter()
            .map(|(s, k)| format!("{s}/{k}"))
            .collect();
        writeln!(f, "alphabet: {}", alpha.join(" "))?;
        for t in &self.transitions {
            writeln!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Splits on commas outside of brackets.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '{' | '[' => depth += 1,
            ')' | '}' | ']' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

impl FromStr for TreeAutomaton {
    type Err = FtaError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut states = Vec::new();
        let mut finals = Vec::new();
        let mut alphabet = BTreeMap::new();
        let mut transitions = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix("states:") {
                states.extend(rest.split_whitespace().map(State::new));
            } else if let Some(rest) = line.strip_prefix("finals:") {
                finals.extend(rest.split_whitespace().map(State::new));
            } else if let Some(rest) = line.strip_prefix("alphabet:") {
                for item in rest.split_whitespace() {
                    let (s, k) = item
                        .rsplit_once('/')
                        .ok_or_else(|| FtaError::Malformed(format!("bad alphabet entry {item}")))?;
                    let k: usize = k
                        .parse()
                        .map_err(|_| FtaError::Malformed(format!("bad arity in {item}")))?;
                    alphabet.insert(ClauseId::new(s), k);
                }
            } else {
                let (lhs, rhs) = line
                    .split_once("->")
                    .ok_or_else(|| FtaError::Malformed(format!("expected `->` in {line:?}")))?;
                let lhs = lhs.trim();
                let (symbol, args) = match lhs.find('(') {
                    None => (lhs, Vec::new()),
                    Some(open) => {
                        let inner = lhs[open + 1..].strip_suffix(')').ok_or_else(|| {
                            FtaError::Malformed(format!("unbalanced parentheses in {line:?}"))
                        })?;
                        let args = split_top_level(inner)
                            .into_iter()
                            .map(|s| State::new(s.trim()))
                            .collect();
                        (&lhs[..open], args)
                    }
                };
                transitions.push(Transition::new(
                    ClauseId::new(symbol.trim()),
                    args,
                    State::new(rhs.trim()),
                ));
            }
        }
        TreeAutomaton::new(states, finals, alphabet, transitions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_round_trips() {
        let text = "\
states: e1 e2 e3 e4
finals: e1
alphabet: c1/0 c2/2 c3/1
c1 -> e3
c1 -> e4
c2(e3,e4) -> e2
c3(e2) -> e1
";
        let a: TreeAutomaton = text.parse().unwrap();
        assert_eq!(a.to_string(), text);
        let b: TreeAutomaton = a.to_string().parse().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn set_states_parse_with_nested_commas() {
        let text = "finals: {a,b}\nf({a,b},(x,{y})) -> {a,b}\n";
        let a: TreeAutomaton = text.parse().unwrap();
        let t = a.transitions().iter().next().unwrap();
        assert_eq!(t.args.len(), 2);
        assert_eq!(t.args[1].name(), "(x,{y})");
    }

    #[test]
    fn arity_violations_are_rejected() {
        let text = "alphabet: f/1\nf(a,b) -> c\n";
        assert!(matches!(
            text.parse::<TreeAutomaton>(),
            Err(FtaError::ArityMismatch(_))
        ));
    }
}
